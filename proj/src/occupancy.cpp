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

#include <cbound/occupancy.hpp>

#include <cbound/error.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace cbound {

namespace {

// L^Q, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> checked_power(std::uint64_t base, std::uint64_t exponent) {
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < exponent; ++i) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::nullopt;
    }
    result *= base;
  }
  return result;
}

void check_coords(std::span<const Label> coords, std::size_t arity, Label label_count,
                  std::string_view sample_id) {
  if (coords.size() != arity) {
    std::ostringstream msg;
    msg << "sample '" << sample_id << "': expected " << arity << " outputs, got "
        << coords.size();
    throw ValidationError(msg.str());
  }
  for (std::size_t q = 0; q < coords.size(); ++q) {
    if (coords[q] >= label_count) {
      std::ostringstream msg;
      msg << "sample '" << sample_id << "': label " << coords[q] << " of classifier " << q + 1
          << " is outside [0, " << label_count << ")";
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace

OccupancyTable::OccupancyTable(std::size_t arity, Label label_count)
    : arity_(arity), label_count_(label_count) {
  if (arity == 0) throw ValidationError("occupancy table needs at least one classifier");
  if (label_count == 0) throw ValidationError("occupancy table needs at least one label");
}

OccupancyTable OccupancyTable::from_cells(std::size_t arity, Label label_count,
                                          std::vector<Cell> cells) {
  OccupancyTable table(arity, label_count);
  for (const auto& cell : cells) {
    check_coords(cell.coords, arity, label_count, "<cell>");
    if (cell.count == 0) throw ValidationError("occupancy cells must have positive counts");
    table.total_ += cell.count;
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.coords < b.coords; });
  auto dup = std::adjacent_find(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.coords == b.coords;
  });
  if (dup != cells.end()) throw ValidationError("occupancy cells must be unique");
  table.cells_ = std::move(cells);
  return table;
}

std::optional<std::size_t> OccupancyTable::position_of(std::span<const Label> coords) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), coords,
                             [](const Cell& cell, std::span<const Label> key) {
                               return std::lexicographical_compare(
                                   cell.coords.begin(), cell.coords.end(), key.begin(),
                                   key.end());
                             });
  if (it == cells_.end() || !std::equal(it->coords.begin(), it->coords.end(), coords.begin(),
                                        coords.end())) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - cells_.begin());
}

std::uint64_t OccupancyTable::count_of(std::span<const Label> coords) const {
  auto pos = position_of(coords);
  return pos ? cells_[*pos].count : 0;
}

std::vector<std::uint64_t> OccupancyTable::marginal(std::size_t axis) const {
  if (axis >= arity_) throw ValidationError("marginal axis out of range");
  std::vector<std::uint64_t> histogram(label_count_, 0);
  for (const auto& cell : cells_) histogram[cell.coords[axis]] += cell.count;
  return histogram;
}

OccupancyBuilder::OccupancyBuilder(std::size_t arity, Label label_count,
                                   std::uint64_t expected_records)
    : arity_(arity), label_count_(label_count) {
  if (arity == 0) throw ValidationError("occupancy table needs at least one classifier");
  if (label_count == 0) throw ValidationError("occupancy table needs at least one label");
  auto cells = checked_power(label_count, arity);
  packed_ = cells.has_value();
  if (packed_ && *cells <= kDenseCellLimit &&
      *cells <= std::max<std::uint64_t>(kDenseFloor, 4 * expected_records)) {
    dense_counts_.assign(*cells, 0);
  } else if (packed_) {
    packed_counts_.reserve(std::min<std::uint64_t>(expected_records, *cells));
  }
}

void OccupancyBuilder::add(std::span<const Label> outputs, std::string_view sample_id) {
  check_coords(outputs, arity_, label_count_, sample_id);
  ++total_;
  if (packed_) {
    std::uint64_t code = 0;
    for (Label label : outputs) code = code * label_count_ + label;
    if (!dense_counts_.empty()) {
      ++dense_counts_[code];
    } else {
      ++packed_counts_[code];
    }
  } else {
    ++wide_counts_[CellIndex(outputs.begin(), outputs.end())];
  }
}

void OccupancyBuilder::add_rows(std::span<const Label> outputs) {
  if (outputs.size() % arity_ != 0) {
    throw ValidationError("label matrix size is not a multiple of the classifier count");
  }
  const std::size_t rows = outputs.size() / arity_;
  const Label* data = outputs.data();
  const std::uint64_t base = label_count_;
  std::uint64_t* dense = dense_counts_.empty() ? nullptr : dense_counts_.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Label* row = data + r * arity_;
    bool in_range = true;
    std::uint64_t code = 0;
    for (std::size_t q = 0; q < arity_; ++q) {
      in_range &= row[q] < label_count_;
      code = code * base + row[q];
    }
    if (!in_range) {
      check_coords({row, arity_}, arity_, label_count_, "row " + std::to_string(r));
    }
    if (dense) {
      ++dense[code];
    } else if (packed_) {
      ++packed_counts_[code];
    } else {
      ++wide_counts_[CellIndex(row, row + arity_)];
    }
  }
  total_ += rows;
}

OccupancyTable OccupancyBuilder::finish() const {
  OccupancyTable table(arity_, label_count_);
  table.total_ = total_;
  if (packed_) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> codes;
    if (!dense_counts_.empty()) {
      for (std::uint64_t code = 0; code < dense_counts_.size(); ++code) {
        if (dense_counts_[code] != 0) codes.emplace_back(code, dense_counts_[code]);
      }
    } else {
      codes.assign(packed_counts_.begin(), packed_counts_.end());
      std::sort(codes.begin(), codes.end());
    }
    table.cells_.reserve(codes.size());
    for (auto [code, count] : codes) {
      CellIndex coords(arity_);
      for (std::size_t q = arity_; q-- > 0;) {
        coords[q] = static_cast<Label>(code % label_count_);
        code /= label_count_;
      }
      table.cells_.push_back({std::move(coords), count});
    }
  } else {
    table.cells_.reserve(wide_counts_.size());
    for (const auto& [coords, count] : wide_counts_) table.cells_.push_back({coords, count});
  }
  return table;
}

OccupancyTable build_occupancy(std::span<const PredictionRecord> records, std::size_t arity,
                               Label label_count) {
  OccupancyBuilder builder(arity, label_count, records.size());
  for (const auto& record : records) builder.add(record);
  return builder.finish();
}

OccupancyTable build_occupancy(std::span<const Label> outputs, std::size_t arity,
                               Label label_count) {
  if (arity == 0) throw ValidationError("occupancy table needs at least one classifier");
  if (outputs.size() % arity != 0) {
    throw ValidationError("label matrix size is not a multiple of the classifier count");
  }
  OccupancyBuilder builder(arity, label_count, outputs.size() / arity);
  builder.add_rows(outputs);
  return builder.finish();
}

OccupancyTable merge(const OccupancyTable& a, const OccupancyTable& b) {
  if (a.arity() != b.arity() || a.label_count() != b.label_count()) {
    throw ValidationError("cannot merge occupancy tables of different shape");
  }
  std::vector<Cell> cells;
  cells.reserve(a.size() + b.size());
  auto ia = a.cells().begin();
  auto ib = b.cells().begin();
  while (ia != a.cells().end() || ib != b.cells().end()) {
    if (ib == b.cells().end() || (ia != a.cells().end() && ia->coords < ib->coords)) {
      cells.push_back(*ia++);
    } else if (ia == a.cells().end() || ib->coords < ia->coords) {
      cells.push_back(*ib++);
    } else {
      cells.push_back({ia->coords, ia->count + ib->count});
      ++ia;
      ++ib;
    }
  }
  return OccupancyTable::from_cells(a.arity(), a.label_count(), std::move(cells));
}

ResolutionAdvisory check_resolution(std::uint64_t class_count, std::uint64_t arity,
                                    std::uint64_t label_count) {
  ResolutionAdvisory advisory;
  auto cells = checked_power(label_count, arity);
  if (!cells || *cells > class_count) {
    std::ostringstream msg;
    msg << "L^Q = " << (cells ? std::to_string(*cells) : std::string(">2^64")) << " > K = "
        << class_count;
    advisory.message = msg.str();
    return advisory;
  }
  std::ostringstream msg;
  msg << "warning: L^Q = " << *cells << " does not exceed K = " << class_count
      << "; a perfect classification could occupy every cell and hide all errors "
         "(use L > K^(1/Q))";
  advisory.ok = false;
  advisory.message = msg.str();
  return advisory;
}

std::uint64_t InstanceSpec::reduced_total() const {
  return std::accumulate(reduced_cell_sizes.begin(), reduced_cell_sizes.end(), std::uint64_t{0});
}

std::uint64_t InstanceSpec::largest_cell() const {
  if (reduced_cell_sizes.empty()) return 0;
  return *std::max_element(reduced_cell_sizes.begin(), reduced_cell_sizes.end());
}

std::vector<std::uint64_t> InstanceSpec::row_sizes() const {
  if (!class_sizes.empty()) return class_sizes;
  return std::vector<std::uint64_t>(reduced_class_count, class_size);
}

InstanceSpec make_instance(std::vector<std::uint64_t> cell_sizes, std::uint64_t class_count,
                           std::uint64_t class_size) {
  if (class_size == 0) throw ValidationError("class size must be positive");
  if (std::find(cell_sizes.begin(), cell_sizes.end(), 0) != cell_sizes.end()) {
    throw ValidationError("cell sizes must be positive");
  }
  InstanceSpec spec;
  spec.class_count = class_count;
  spec.class_size = class_size;
  spec.reduced_class_count = class_count;
  spec.reduced_cell_sizes = std::move(cell_sizes);
  if (spec.reduced_total() != class_count * class_size) {
    std::ostringstream msg;
    msg << "infeasible instance: cells hold N = " << spec.reduced_total()
        << " samples but K * S = " << class_count << " * " << class_size << " = "
        << class_count * class_size;
    throw ValidationError(msg.str());
  }
  return spec;
}

InstanceSpec make_instance(const OccupancyTable& table, std::uint64_t class_count,
                           std::uint64_t class_size) {
  if (class_size == 0) throw ValidationError("class size must be positive");
  if (table.total() != class_count * class_size) {
    std::ostringstream msg;
    msg << "N = " << table.total() << " does not equal K * S = " << class_count << " * "
        << class_size << " = " << class_count * class_size
        << "; pass an effective K = round(N / S)";
    throw ValidationError(msg.str());
  }
  std::vector<std::uint64_t> sizes;
  sizes.reserve(table.size());
  for (const auto& cell : table.cells()) sizes.push_back(cell.count);
  InstanceSpec spec = make_instance(std::move(sizes), class_count, class_size);
  spec.reduced_cell_origin.resize(table.size());
  std::iota(spec.reduced_cell_origin.begin(), spec.reduced_cell_origin.end(), std::size_t{0});
  return spec;
}

InstanceSpec make_unequal_instance(std::vector<std::uint64_t> cell_sizes,
                                   std::vector<std::uint64_t> class_sizes) {
  if (std::find(class_sizes.begin(), class_sizes.end(), 0) != class_sizes.end()) {
    throw ValidationError("class sizes must be positive");
  }
  std::uint64_t n_classes = std::accumulate(class_sizes.begin(), class_sizes.end(),
                                            std::uint64_t{0});
  std::uint64_t n_cells = std::accumulate(cell_sizes.begin(), cell_sizes.end(), std::uint64_t{0});
  if (n_classes != n_cells) {
    std::ostringstream msg;
    msg << "infeasible instance: cells hold " << n_cells << " samples, classes hold "
        << n_classes;
    throw ValidationError(msg.str());
  }
  InstanceSpec spec;
  spec.class_count = class_sizes.size();
  spec.class_size = class_sizes.empty() ? 0 : class_sizes.front();
  spec.reduced_class_count = class_sizes.size();
  spec.reduced_cell_sizes = std::move(cell_sizes);
  spec.class_sizes = std::move(class_sizes);
  return spec;
}

InstanceSpec reduce(const InstanceSpec& spec) {
  if (!spec.class_sizes.empty()) {
    throw ValidationError("reduction needs a uniform class size");
  }
  InstanceSpec out = spec;
  out.reduced_cell_sizes.clear();
  out.reduced_cell_origin.clear();
  const bool has_origin = !spec.reduced_cell_origin.empty();
  std::uint64_t classes_left = spec.reduced_class_count;
  for (std::size_t i = 0; i < spec.reduced_cell_sizes.size(); ++i) {
    std::uint64_t size = spec.reduced_cell_sizes[i];
    std::size_t origin = has_origin ? spec.reduced_cell_origin[i] : i;
    if (size == spec.class_size && classes_left > 0) {
      --classes_left;
      ++out.removed_pairs;
      out.removed_cell_origin.push_back(origin);
    } else {
      out.reduced_cell_sizes.push_back(size);
      if (has_origin) out.reduced_cell_origin.push_back(origin);
    }
  }
  out.reduced_class_count = classes_left;
  return out;
}

InstanceSpec reduce_instance(const OccupancyTable& table, std::uint64_t class_count,
                             std::uint64_t class_size) {
  return reduce(make_instance(table, class_count, class_size));
}

double diagonal_mass(const OccupancyTable& table) {
  if (table.arity() != 2) throw ValidationError("diagonal mass needs exactly two classifiers");
  if (table.total() == 0) return 0.0;
  std::uint64_t diagonal = 0;
  for (const auto& cell : table.cells()) {
    if (cell.coords[0] == cell.coords[1]) diagonal += cell.count;
  }
  return static_cast<double>(diagonal) / static_cast<double>(table.total());
}

}  // namespace cbound
