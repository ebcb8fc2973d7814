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

#include <cbound/error.hpp>
#include <cbound/io.hpp>

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace cbound;

namespace {

const std::filesystem::path kFixtures = CBOUND_FIXTURE_DIR;

}  // namespace

TEST_CASE("read_predictions parses the four-record fixture") {
  auto file = io::read_predictions(kFixtures / "four_records.csv");
  CHECK(file.arity == 2);
  REQUIRE(file.records.size() == 4);
  CHECK(file.records[2].sample_id == "c");
  CHECK(file.records[2].outputs == std::vector<Label>{1, 2});
  CHECK(file.records[2].true_label == 1u);
  CHECK_FALSE(file.records[3].true_label.has_value());
  CHECK(file.inferred_label_count() == 3);
}

TEST_CASE("occupancy JSON is stable") {
  auto file = io::read_predictions(kFixtures / "four_records.csv");
  auto table = build_occupancy(file.records, file.arity, file.inferred_label_count());
  const std::string expected =
      R"({"arity":2,"label_count":3,"total":4,"cells":[{"coords":[0,0],"count":3},)"
      R"({"coords":[1,2],"count":1}]})"
      "\n";
  CHECK(io::occupancy_to_json(table) == expected);
  CHECK(io::occupancy_from_json(expected) == table);

  auto empty = io::read_predictions(kFixtures / "header_only.csv");
  CHECK(empty.records.empty());
  auto empty_table = build_occupancy(empty.records, empty.arity, 1);
  CHECK(io::occupancy_to_json(empty_table).find(R"("total":0)") != std::string::npos);
  CHECK(io::occupancy_from_json(io::occupancy_to_json(empty_table)) == empty_table);
}

TEST_CASE("malformed predictions report the line") {
  try {
    io::read_predictions(kFixtures / "malformed.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream bad_header("id,label,f_1\n");
  CHECK_THROWS_AS(io::read_predictions(bad_header), ParseError);
  std::istringstream short_row("sample_id,label,f_1,f_2\na,0,1\n");
  CHECK_THROWS_AS(io::read_predictions(short_row), ParseError);
  CHECK_THROWS_AS(io::read_predictions(kFixtures / "missing.csv"), ParseError);
}

TEST_CASE("predictions round trip, with CRLF input") {
  std::istringstream crlf("sample_id,label,f_1\r\na,2,5\r\nb,,1\r\n");
  auto file = io::read_predictions(crlf);
  std::ostringstream out;
  io::write_predictions(out, file.records, file.arity);
  CHECK(out.str() == "sample_id,label,f_1\na,2,5\nb,,1\n");
  std::istringstream again(out.str());
  auto reread = io::read_predictions(again);
  CHECK(reread.records.size() == 2);
  CHECK(reread.records[0].outputs == file.records[0].outputs);
}

TEST_CASE("occupancy_from_json validates") {
  CHECK_THROWS_AS(io::occupancy_from_json("{"), ParseError);
  CHECK_THROWS_AS(io::occupancy_from_json(R"({"arity":1,"label_count":2,"total":3,)"
                                          R"("cells":[{"coords":[0],"count":2}]})"),
                  ParseError);
}

TEST_CASE("bound result JSON") {
  auto table = OccupancyTable::from_cells(2, 3, {{{0, 0}, 3}, {{1, 2}, 1}});
  auto result = bound_pipeline(table, 2, 2, Strategy::bruteforce);
  auto json = io::bound_result_to_json(result);
  CHECK(json["mistake_bound"] == 1);
  CHECK(json["coherence"] == 6);
  CHECK(json["solver"] == "bruteforce");
  CHECK(json["exact"] == true);
  CHECK(json["oracle_min_mistakes"] == 1);
  CHECK(json["phi_star"][0]["cell"] == io::Json::array({0, 0}));
  CHECK(json["witness"].size() == 3);
}

TEST_CASE("embeddings round trip in both formats") {
  EmbeddingSet set(3);
  std::vector<double> a{0.1, -2.5, 1e-300}, b{3.0, 0.0, -0.0};
  set.add("first", a, 4);
  set.add("second,odd", b);

  std::ostringstream rejected;
  CHECK_THROWS_AS(io::write_embeddings_csv(rejected, set), ValidationError);
  EmbeddingSet plain(3);
  plain.add("first", a, 4);
  plain.add("second", b);
  std::ostringstream csv;
  io::write_embeddings_csv(csv, plain);
  std::istringstream csv_in(csv.str());
  auto from_csv = io::read_embeddings_csv(csv_in);
  REQUIRE(from_csv.size() == 2);
  CHECK(from_csv.row(0)[2] == 1e-300);
  CHECK(from_csv.label(0) == 4u);
  CHECK_FALSE(from_csv.label(1).has_value());

  std::ostringstream bin(std::ios::binary);
  io::write_embeddings_binary(bin, set);
  std::string bytes = bin.str();
  CHECK(bytes.substr(0, 8) == "CBEMB001");
  CHECK(bytes.size() == 8 + 4 + 8 + 2 * (4 + 8 + 3 * 8) + 5 + 10);
  std::istringstream bin_in(bytes, std::ios::binary);
  auto from_bin = io::read_embeddings_binary(bin_in);
  CHECK(from_bin.id(1) == "second,odd");
  CHECK(from_bin.row(0)[0] == 0.1);
  CHECK(from_bin.label(0) == 4u);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3), std::ios::binary);
  CHECK_THROWS_AS(io::read_embeddings_binary(truncated), ParseError);
}

TEST_CASE("learner specs") {
  auto specs = io::read_learner_specs(kFixtures / "two_learners.json");
  REQUIRE(specs.size() == 2);
  CHECK(specs[1].kind == LearnerKind::pair_projection);
  CHECK(specs[1].dims == 3);
  CHECK(specs[0].reps_per_class == 1);
  CHECK_THROWS_AS(io::learner_specs_from_json(R"([{"kind":"pair_projection"}])"), ParseError);
  CHECK_THROWS_AS(io::learner_specs_from_json(R"([{"kind":"spiral","dims":2}])"), ParseError);
}

TEST_CASE("experiment CSV") {
  ExperimentRow row;
  row.mistakes = 15;
  row.mean_bound = 2.5;
  row.std_bound = 0.1;
  row.mean_actual = 15;
  row.mean_coherence = 100.25;
  row.trials = 3;
  row.seed = 42;
  std::ostringstream out;
  io::write_experiment_csv(out, std::span(&row, 1));
  CHECK(out.str() ==
        "m,mean_bound,std_bound,mean_actual,trials,seed,mean_coherence\n15,2.5,0.1,15,3,42,100.25\n");
}

TEST_CASE("format_double") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
