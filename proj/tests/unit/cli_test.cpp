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

#include "cli.hpp"

#include <cbound/io.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

const std::filesystem::path kFixtures = CBOUND_FIXTURE_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "cbound");
  std::ostringstream out, err;
  int code = cbound::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return (kFixtures / name).string(); }

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "cbound_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("bound on fixtures") {
  auto perfect = run({"bound", "--predictions", fixture("perfect.csv"), "--class-size", "2"});
  REQUIRE(perfect.code == 0);
  auto doc = cbound::io::Json::parse(perfect.out);
  CHECK(doc["mistake_bound"] == 0);
  CHECK(doc["config"]["classes"] == 3);

  auto three_one = run({"bound", "--predictions", fixture("three_one.csv"), "--classes", "2",
                        "--class-size", "2", "--solver", "bruteforce"});
  REQUIRE(three_one.code == 0);
  CHECK(cbound::io::Json::parse(three_one.out)["mistake_bound"] == 1);
  CHECK(three_one.out.find("\"mistake_bound\":1") != std::string::npos);
}

TEST_CASE("bound exit codes") {
  CHECK(run({"bound", "--predictions", fixture("missing.csv"), "--class-size", "2"}).code == 2);
  auto malformed = run({"bound", "--predictions", fixture("malformed.csv"), "--class-size", "1"});
  CHECK(malformed.code == 2);
  CHECK(malformed.err.find("line 3") != std::string::npos);
  CHECK(run({"bound", "--predictions", fixture("uneven.csv"), "--classes", "2", "--class-size",
             "2"})
            .code == 3);
  CHECK(run({"bound", "--predictions", fixture("perfect.csv"), "--class-size", "2", "--solver",
             "magic"})
            .code == 2);
  CHECK(run({"bound", "--class-size", "2"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("resource refusal exits 4") {
  auto path = scratch("wide.csv");
  {
    std::ofstream out(path);
    out << "sample_id,label,f_1\n";
    for (int i = 0; i < 60; ++i) out << "s" << i << ",," << i << '\n';
  }
  auto refused = run({"bound", "--predictions", path.string(), "--classes", "6", "--class-size",
                      "10", "--solver", "bruteforce"});
  CHECK(refused.code == 4);
  CHECK(refused.err.find("estimated") != std::string::npos);
  CHECK(run({"bound", "--predictions", path.string(), "--classes", "6", "--class-size", "10",
             "--solver", "dp", "--memory-budget", "10"})
            .code == 4);
}

TEST_CASE("resolution warning goes to stderr") {
  auto r = run({"bound", "--predictions", fixture("perfect.csv"), "--class-size", "2", "--labels",
                "1"});
  CHECK(r.code == 3);  // labels out of range
  auto path = scratch("coarse.csv");
  {
    std::ofstream out(path);
    out << "sample_id,label,f_1\na,,0\nb,,1\n";
  }
  auto coarse = run({"bound", "--predictions", path.string(), "--class-size", "1"});
  CHECK(coarse.code == 0);
  CHECK(coarse.err.find("warning") != std::string::npos);
  CHECK(coarse.out.find("warning") == std::string::npos);
}

TEST_CASE("occupancy subcommand") {
  auto r = run({"occupancy", "--predictions", fixture("four_records.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out ==
        R"({"arity":2,"label_count":3,"total":4,"cells":[{"coords":[0,0],"count":3},)"
        R"({"coords":[1,2],"count":1}]})"
        "\n");
  auto empty = run({"occupancy", "--predictions", fixture("header_only.csv")});
  CHECK(empty.out.find(R"("total":0)") != std::string::npos);

  auto path = scratch("occ.json");
  CHECK(run({"occupancy", "--predictions", fixture("four_records.csv"), "--out", path.string()})
            .code == 0);
  CHECK(slurp(path) == r.out);
  CHECK(std::filesystem::exists(path.string() + ".config.json"));
}

TEST_CASE("simulate is replayable") {
  auto a = scratch("sim_a.csv");
  auto b = scratch("sim_b.csv");
  std::vector<std::string> args{"simulate",    "--classes", "6",  "--class-size", "4",
                                "--labels",    "3",         "--mistakes", "0,4,8",
                                "--trials",    "3",         "--seed", "11", "--out"};
  auto first = args, second = args;
  first.push_back(a.string());
  second.push_back(b.string());
  REQUIRE(run(first).code == 0);
  REQUIRE(run(second).code == 0);
  CHECK(slurp(a) == slurp(b));
  auto csv = slurp(a);
  CHECK(csv.rfind("m,mean_bound,std_bound,mean_actual,trials,seed", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  auto config = cbound::io::Json::parse(slurp(a.string() + ".config.json"));
  CHECK(config["seed"] == 11);

  auto single = run({"simulate", "--classes", "6", "--class-size", "4", "--labels", "3",
                     "--mistakes", "0", "--trials", "1", "--seed", "1"});
  REQUIRE(single.code == 0);
  CHECK(single.out.find("\n0,0,0,0,1,") != std::string::npos);
  CHECK(single.err.find("config") != std::string::npos);

  CHECK(run({"simulate", "--classes", "10", "--class-size", "4", "--labels", "3", "--seed", "1"})
            .code == 3);
  CHECK(run({"simulate", "--classes", "6", "--class-size", "4", "--labels", "3", "--mistakes",
             "25", "--seed", "1"})
            .code == 3);
}

TEST_CASE("seed falls back to the environment") {
  setenv("CB_ENSEMBLE_SEED", "11", 1);
  auto env = run({"simulate", "--classes", "6", "--class-size", "4", "--labels", "3",
                  "--mistakes", "0,4,8", "--trials", "3"});
  unsetenv("CB_ENSEMBLE_SEED");
  auto flag = run({"simulate", "--classes", "6", "--class-size", "4", "--labels", "3",
                   "--mistakes", "0,4,8", "--trials", "3", "--seed", "11"});
  CHECK(env.out == flag.out);
  CHECK(env.err.find("\"seed_source\":\"env\"") != std::string::npos);

  auto generated = run({"simulate", "--classes", "6", "--class-size", "4", "--labels", "3",
                        "--trials", "1"});
  CHECK(generated.code == 0);
  CHECK(generated.err.find("generated seed") != std::string::npos);
}

TEST_CASE("study and gen-embeddings") {
  auto emb = scratch("emb.bin");
  REQUIRE(run({"gen-embeddings", "--classes", "12", "--class-size", "5", "--seed", "3",
               "--binary", "--out", emb.string()})
              .code == 0);
  auto out = scratch("study.csv");
  auto r = run({"study", "--embeddings", emb.string(), "--learners",
                fixture("twin_learners.json"), "--labels", "6", "--seed", "2", "--out",
                out.string()});
  REQUIRE(r.code == 0);
  auto csv = slurp(out);
  CHECK(csv.rfind("pair,learner_a,learner_b,mistake_bound,coherence,false_same,acc_a,acc_b", 0) ==
        0);
  CHECK(csv.find(",1\n") != std::string::npos);  // diagonal_mass 1
  auto summary = cbound::io::Json::parse(slurp(out.string() + ".summary.json"));
  CHECK(summary["regression"].contains("pearson_r"));

  auto unlabeled = scratch("unlabeled.csv");
  {
    std::ofstream f(unlabeled);
    f << "sample_id,label,v_0\na,,0.5\nb,,1.5\n";
  }
  CHECK(run({"study", "--embeddings", unlabeled.string(), "--learners",
             fixture("two_learners.json"), "--labels", "1", "--seed", "2"})
            .code == 3);
}
