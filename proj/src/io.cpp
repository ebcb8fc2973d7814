// Copyright 2026 The cbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cbound/io.hpp>

#include <cbound/error.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cbound::io {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw ParseError(msg.str());
}

template <typename T>
T parse_integer(std::string_view text, std::size_t line, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_fail(line, "invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

double parse_real(std::string_view text, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_fail(line, "invalid number '" + std::string(text) + "'");
  }
  return value;
}

// Reads one line, dropping a trailing CR. Returns false at end of input.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

// CSV ids are written verbatim, so they cannot hold separators.
const std::string& csv_id(const std::string& id) {
  if (id.find_first_of(",\r\n") != std::string::npos) {
    throw ValidationError("sample id '" + id + "' cannot be written to CSV");
  }
  return id;
}

// Checks "sample_id,label,<prefix><first>,..." and returns the column count
// after the first two.
std::size_t check_header(std::string_view header, std::string_view prefix, std::size_t first) {
  auto fields = split_csv(header);
  if (fields.size() < 3 || fields[0] != "sample_id" || fields[1] != "label") {
    parse_fail(1, "header must start with 'sample_id,label,'");
  }
  for (std::size_t j = 2; j < fields.size(); ++j) {
    std::string expected = std::string(prefix) + std::to_string(j - 2 + first);
    if (fields[j] != expected) {
      parse_fail(1, "expected column '" + expected + "', got '" + std::string(fields[j]) + "'");
    }
  }
  return fields.size() - 2;
}

std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::make_unsigned_t<T>;
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw ParseError("embeddings binary file is truncated");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return static_cast<T>(bits);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buffer.data(), ptr);
}

Label PredictionsFile::inferred_label_count() const {
  Label largest = 0;
  bool any = false;
  for (const auto& record : records) {
    for (Label l : record.outputs) {
      largest = std::max(largest, l);
      any = true;
    }
  }
  return any ? largest + 1 : 0;
}

PredictionsFile read_predictions(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) parse_fail(1, "missing header");
  PredictionsFile file;
  file.arity = check_header(line, "f_", 1);
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != file.arity + 2) {
      parse_fail(line_no, "expected " + std::to_string(file.arity + 2) + " fields, got " +
                              std::to_string(fields.size()));
    }
    PredictionRecord record;
    record.sample_id = std::string(fields[0]);
    if (!fields[1].empty()) record.true_label = parse_integer<std::uint32_t>(fields[1], line_no, "label");
    record.outputs.reserve(file.arity);
    for (std::size_t q = 0; q < file.arity; ++q) {
      record.outputs.push_back(parse_integer<Label>(fields[q + 2], line_no, "classifier output"));
    }
    file.records.push_back(std::move(record));
  }
  return file;
}

PredictionsFile read_predictions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_predictions(in);
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records,
                       std::size_t arity) {
  out << "sample_id,label";
  for (std::size_t q = 1; q <= arity; ++q) out << ",f_" << q;
  out << '\n';
  for (const auto& record : records) {
    out << csv_id(record.sample_id) << ',';
    if (record.true_label) out << *record.true_label;
    for (Label l : record.outputs) out << ',' << l;
    out << '\n';
  }
}

std::string occupancy_to_json(const OccupancyTable& table) {
  Json doc;
  doc["arity"] = table.arity();
  doc["label_count"] = table.label_count();
  doc["total"] = table.total();
  Json cells = Json::array();
  for (const auto& cell : table.cells()) {
    Json entry;
    entry["coords"] = cell.coords;
    entry["count"] = cell.count;
    cells.push_back(std::move(entry));
  }
  doc["cells"] = std::move(cells);
  return doc.dump() + "\n";
}

OccupancyTable occupancy_from_json(std::string_view text) {
  try {
    Json doc = Json::parse(text);
    std::vector<Cell> cells;
    for (const auto& entry : doc.at("cells")) {
      cells.push_back({entry.at("coords").get<CellIndex>(), entry.at("count").get<std::uint64_t>()});
    }
    auto table = OccupancyTable::from_cells(doc.at("arity").get<std::size_t>(),
                                            doc.at("label_count").get<Label>(), std::move(cells));
    if (table.total() != doc.at("total").get<std::uint64_t>()) {
      throw ParseError("occupancy total does not match the sum of its cells");
    }
    return table;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed occupancy JSON: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid occupancy JSON: ") + e.what());
  }
}

Json bound_result_to_json(const BoundResult& result) {
  auto cell_json = [&](std::size_t pos) {
    if (result.has_coords() && pos < result.cell_coords.size() / result.cell_arity) {
      auto coords = result.coords_of(pos);
      return Json(std::vector<Label>(coords.begin(), coords.end()));
    }
    return Json::array({pos});
  };
  Json doc;
  doc["coherence"] = result.coherence;
  doc["mistake_bound"] = result.mistake_bound;
  doc["solver"] = to_string(result.solver);
  doc["exact"] = result.exact;
  if (result.oracle_min_mistakes) doc["oracle_min_mistakes"] = *result.oracle_min_mistakes;
  Json phi = Json::array();
  for (std::size_t k = 0; k < result.phi_star.size(); ++k) {
    phi.push_back({{"class", k}, {"cell", cell_json(result.phi_star[k])}});
  }
  doc["phi_star"] = std::move(phi);
  Json witness = Json::array();
  for (const auto& e : result.witness.entries) {
    witness.push_back({{"class", e.cls}, {"cell", cell_json(e.cell)}, {"count", e.count}});
  }
  doc["witness"] = std::move(witness);
  return doc;
}

EmbeddingSet read_embeddings_csv(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) parse_fail(1, "missing header");
  const std::size_t dimension = check_header(line, "v_", 0);
  EmbeddingSet set(dimension);
  std::vector<double> v(dimension);
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != dimension + 2) {
      parse_fail(line_no, "expected " + std::to_string(dimension + 2) + " fields, got " +
                              std::to_string(fields.size()));
    }
    std::optional<std::uint32_t> label;
    if (!fields[1].empty()) label = parse_integer<std::uint32_t>(fields[1], line_no, "label");
    for (std::size_t i = 0; i < dimension; ++i) v[i] = parse_real(fields[i + 2], line_no);
    try {
      set.add(std::string(fields[0]), v, label);
    } catch (const ValidationError& e) {
      parse_fail(line_no, e.what());
    }
  }
  return set;
}

void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set) {
  out << "sample_id,label";
  for (std::size_t i = 0; i < set.dimension(); ++i) out << ",v_" << i;
  out << '\n';
  for (std::size_t s = 0; s < set.size(); ++s) {
    out << csv_id(set.id(s)) << ',';
    if (set.label(s)) out << *set.label(s);
    for (double x : set.row(s)) out << ',' << format_double(x);
    out << '\n';
  }
}

EmbeddingSet read_embeddings_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      !std::equal(magic.begin(), magic.end(), std::begin(kEmbeddingMagic))) {
    throw ParseError("not an embeddings binary file (bad magic)");
  }
  const auto dimension = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  if (dimension == 0) throw ParseError("embeddings binary file declares dimension 0");
  EmbeddingSet set(dimension);
  std::vector<double> v(dimension);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto id_length = get_le<std::uint32_t>(in);
    std::string id(id_length, '\0');
    if (!in.read(id.data(), id_length)) throw ParseError("embeddings binary file is truncated");
    const auto label = get_le<std::int64_t>(in);
    for (auto& x : v) x = std::bit_cast<double>(get_le<std::uint64_t>(in));
    std::optional<std::uint32_t> maybe_label;
    if (label >= 0) maybe_label = static_cast<std::uint32_t>(label);
    try {
      set.add(std::move(id), v, maybe_label);
    } catch (const ValidationError& e) {
      throw ParseError(std::string("record ") + std::to_string(r) + ": " + e.what());
    }
  }
  return set;
}

void write_embeddings_binary(std::ostream& out, const EmbeddingSet& set) {
  out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.dimension()));
  put_le<std::uint64_t>(out, set.size());
  for (std::size_t s = 0; s < set.size(); ++s) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.id(s).size()));
    out.write(set.id(s).data(), static_cast<std::streamsize>(set.id(s).size()));
    put_le<std::int64_t>(out, set.label(s) ? static_cast<std::int64_t>(*set.label(s)) : -1);
    for (double x : set.row(s)) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  }
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path, true);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  bool binary = in.gcount() == 8 && std::equal(magic.begin(), magic.end(), std::begin(kEmbeddingMagic));
  in.clear();
  in.seekg(0);
  return binary ? read_embeddings_binary(in) : read_embeddings_csv(in);
}

std::vector<LearnerSpec> learner_specs_from_json(std::string_view text) {
  try {
    Json doc = Json::parse(text);
    if (!doc.is_array()) throw ParseError("learner spec file must hold a JSON array");
    std::vector<LearnerSpec> specs;
    for (const auto& entry : doc) {
      LearnerSpec spec;
      spec.kind = parse_learner_kind(entry.at("kind").get<std::string>());
      spec.dims = entry.value("dims", std::size_t{0});
      spec.reps_per_class = entry.value("reps_per_class", std::size_t{1});
      spec.seed = entry.value("seed", std::uint64_t{0});
      spec.name = entry.value("name", std::string(to_string(spec.kind)) + "_" +
                                          std::to_string(specs.size()));
      if (spec.kind != LearnerKind::identity && spec.dims == 0) {
        throw ParseError("learner '" + spec.name + "' needs dims >= 1");
      }
      specs.push_back(std::move(spec));
    }
    return specs;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed learner spec JSON: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid learner spec: ") + e.what());
  }
}

std::vector<LearnerSpec> read_learner_specs(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return learner_specs_from_json(buffer.str());
}

void write_experiment_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
  out << "m,mean_bound,std_bound,mean_actual,trials,seed,mean_coherence\n";
  for (const auto& row : rows) {
    out << row.mistakes << ',' << format_double(row.mean_bound) << ','
        << format_double(row.std_bound) << ',' << format_double(row.mean_actual) << ','
        << row.trials << ',' << row.seed << ',' << format_double(row.mean_coherence) << '\n';
  }
}

void write_correlated_csv(std::ostream& out, std::span<const CorrelatedRow> rows) {
  out << "m,mean_diagonal_mass,mean_bound,std_bound,mean_actual,trials,seed,mean_coherence\n";
  for (const auto& row : rows) {
    out << row.mistakes << ',' << format_double(row.mean_diagonal_mass) << ','
        << format_double(row.mean_bound) << ',' << format_double(row.std_bound) << ','
        << format_double(row.mean_actual) << ',' << row.trials << ',' << row.seed << ','
        << format_double(row.mean_coherence) << '\n';
  }
}

void write_study_csv(std::ostream& out, const StudyResult& study,
                     std::span<const LearnerSpec> learners) {
  out << "pair,learner_a,learner_b,mistake_bound,coherence,false_same,acc_a,acc_b,true_same,"
         "diagonal_mass\n";
  for (const auto& row : study.rows) {
    out << row.pair << ',' << learners[row.learner_a].name << ','
        << learners[row.learner_b].name << ',' << row.mistake_bound << ',' << row.coherence
        << ',' << row.false_same << ',' << format_double(row.accuracy_a) << ','
        << format_double(row.accuracy_b) << ',' << row.true_same << ','
        << format_double(row.diagonal_mass) << '\n';
  }
}

Json study_summary_json(const StudyResult& study, std::span<const LearnerSpec> learners) {
  Json doc;
  doc["pairs"] = study.rows.size();
  doc["regression"] = {{"x", "mistake_bound"},
                       {"y", "false_same"},
                       {"slope", study.slope},
                       {"intercept", study.intercept},
                       {"pearson_r", study.pearson_r}};
  doc["representative_classes"] = study.representative_classes;
  Json list = Json::array();
  for (std::size_t i = 0; i < learners.size(); ++i) {
    list.push_back({{"name", learners[i].name},
                    {"kind", to_string(learners[i].kind)},
                    {"dims", learners[i].dims},
                    {"reps_per_class", learners[i].reps_per_class},
                    {"seed", learners[i].seed},
                    {"accuracy", study.accuracies[i]}});
  }
  doc["learners"] = std::move(list);
  return doc;
}

}  // namespace cbound::io
