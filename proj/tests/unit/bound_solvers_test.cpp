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

#include <cbound/bound_solvers.hpp>
#include <cbound/error.hpp>
#include <cbound/rng.hpp>

#include <doctest.h>

#include "oracles.hpp"

using namespace cbound;
using cbound::testing::naive_bound;

namespace {

OccupancyTable table_of(std::vector<std::uint64_t> sizes) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    cells.push_back({{static_cast<Label>(i)}, sizes[i]});
  }
  return OccupancyTable::from_cells(1, static_cast<Label>(sizes.size()), std::move(cells));
}

BoundResult solve(SolverKind kind, const InstanceSpec& spec) {
  switch (kind) {
    case SolverKind::bruteforce: return solve_bruteforce(spec);
    case SolverKind::exact_dp: return solve_exact_dp(spec);
    case SolverKind::greedy: return solve_greedy(spec);
  }
  return {};
}

}  // namespace

TEST_CASE("coherence_of sums squared entries") {
  auto a = AssignmentMatrix::from_dense({{2, 0}, {1, 1}}, {3, 1});
  CHECK(coherence_of(a) == 6);
  auto b = AssignmentMatrix::from_dense({{2, 0}, {0, 2}}, {2, 2});
  CHECK(coherence_of(b) == 8);
  auto bad = AssignmentMatrix::from_dense({{2, 0}, {0, 1}}, {2, 2});
  CHECK_THROWS_AS(coherence_of(bad), ValidationError);
}

TEST_CASE("validate names the violated marginal") {
  auto bad_row = AssignmentMatrix::from_dense({{2, 1}, {1, 0}}, {3, 1});
  bad_row.class_sizes = {2, 2};
  try {
    bad_row.validate();
    FAIL("expected a rejection");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("class 0") != std::string::npos);
  }
  auto bad_col = AssignmentMatrix::from_dense({{2, 0}, {2, 0}}, {3, 1});
  try {
    bad_col.validate();
    FAIL("expected a rejection");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("cell 0") != std::string::npos);
  }
}

TEST_CASE("phi_star breaks ties toward the earliest cell") {
  auto a = AssignmentMatrix::from_dense({{1, 1}, {0, 2}}, {1, 3});
  CHECK(phi_star_of(a) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("known instances") {
  struct Known {
    std::vector<std::uint64_t> cells;
    std::uint64_t k, s, coherence, bound;
  };
  const std::vector<Known> known = {
      {{3, 1}, 2, 2, 6, 1},       {{2, 2}, 2, 2, 8, 0},        {{4}, 2, 2, 8, 0},
      {{3, 3, 2}, 2, 4, 20, 2},   {{4, 3, 3, 2}, 3, 4, 36, 2}, {{4, 4, 4, 2, 2}, 4, 4, 56, 2},
      {{2, 2, 2}, 1, 6, 12, 4},   {{3, 3, 1, 1}, 2, 4, 20, 2},
  };
  for (const auto& item : known) {
    CAPTURE(item.cells);
    for (auto strategy : {Strategy::bruteforce, Strategy::exact_dp}) {
      auto r = bound_pipeline(table_of(item.cells), item.k, item.s, strategy);
      CHECK(r.coherence == item.coherence);
      CHECK(r.mistake_bound == item.bound);
      CHECK(r.exact);
    }
  }
}

TEST_CASE("the {3,1} witness") {
  auto r = bound_pipeline(table_of({3, 1}), 2, 2, Strategy::bruteforce);
  CHECK(r.witness.dense() == std::vector<std::vector<std::uint64_t>>{{2, 0}, {1, 1}});
  CHECK(r.phi_star == std::vector<std::size_t>{0, 0});
  REQUIRE(r.oracle_min_mistakes.has_value());
  CHECK(*r.oracle_min_mistakes == 1);
}

TEST_CASE("perfect partition is all removed") {
  auto r = bound_pipeline(table_of({2, 2}), 2, 2, Strategy::greedy);
  CHECK(r.coherence == 8);
  CHECK(r.mistake_bound == 0);
  CHECK(r.exact);
}

TEST_CASE("five full cells and one split cell") {
  auto r = bound_pipeline(table_of({4, 4, 4, 4, 4, 2, 2}), 6, 4, Strategy::automatic);
  CHECK(r.mistake_bound == 2);
  CHECK(r.coherence == 5 * 16 + 8);
}

TEST_CASE("scale doubling keeps the bound") {
  auto single = bound_pipeline(table_of({3, 1}), 2, 2, Strategy::bruteforce);
  auto doubled = bound_pipeline(table_of({3, 3, 1, 1}), 4, 2, Strategy::bruteforce);
  CHECK(doubled.mistake_bound == 2 * single.mistake_bound);
}

TEST_CASE("solvers agree with the naive oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    auto inst = cbound::testing::random_instance(rng, 4, 5, 16);
    CAPTURE(inst.cells);
    CAPTURE(inst.classes);
    CAPTURE(inst.class_size);
    auto oracle = naive_bound(inst.cells, inst.classes, inst.class_size);
    auto spec = make_instance(inst.cells, inst.classes, inst.class_size);

    auto brute = solve_bruteforce(spec);
    auto dp = solve_exact_dp(spec);
    auto greedy = solve_greedy(spec);
    CHECK(brute.coherence == oracle.coherence);
    CHECK(dp.coherence == oracle.coherence);
    CHECK(greedy.coherence <= oracle.coherence);
    REQUIRE(brute.oracle_min_mistakes.has_value());
    CHECK(*brute.oracle_min_mistakes == oracle.min_mistakes);
    CHECK(brute.mistake_bound == oracle.mistakes_at_optimum);

    for (const auto* r : {&brute, &dp, &greedy}) {
      CHECK_NOTHROW(r->witness.validate());
      CHECK(coherence_of(r->witness) == r->coherence);
      CHECK(mistake_bound_of(*r, spec) == r->mistake_bound);
      CHECK(r->mistake_bound <= inst.classes * inst.class_size);
    }

    // Two disjoint copies can do at least twice as well.
    auto twice = inst.cells;
    twice.insert(twice.end(), inst.cells.begin(), inst.cells.end());
    if (inst.classes <= 2) {
      auto doubled = solve_exact_dp(make_instance(twice, 2 * inst.classes, inst.class_size));
      CHECK(doubled.coherence >= 2 * dp.coherence);
    }
  }
}

TEST_CASE("reduction preserves the optimum") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = cbound::testing::random_instance(rng, 3, 4, 10);
    inst.cells.push_back(inst.class_size);
    ++inst.classes;
    auto oracle = naive_bound(inst.cells, inst.classes, inst.class_size);
    auto r = bound_pipeline(table_of(inst.cells), inst.classes, inst.class_size,
                            Strategy::exact_dp);
    CHECK(r.coherence == oracle.coherence);
    CHECK(r.witness.class_count() == inst.classes);
    CHECK_NOTHROW(r.witness.validate());
  }
}

TEST_CASE("greedy orderings agree") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = cbound::testing::random_instance(rng, 20, 30, 400);
    auto spec = reduce(make_instance(inst.cells, inst.classes, inst.class_size));
    auto a = solve_greedy(spec, SizeOrdering::counting_sort);
    auto b = solve_greedy(spec, SizeOrdering::comparison_sort);
    CHECK(a.witness.entries == b.witness.entries);
    CHECK(a.coherence == b.coherence);
  }
}

TEST_CASE("exact_dp refuses a too-small budget") {
  auto spec = reduce(make_instance(std::vector<std::uint64_t>(40, 5), 20, 10));
  auto estimate = estimate_dp_memory(spec);
  CHECK(estimate > 0);
  try {
    solve_exact_dp(spec, 1024);
    FAIL("expected a refusal");
  } catch (const ResourceError& e) {
    CHECK(e.estimate() == estimate);
  }
}

TEST_CASE("bruteforce enforces its limits") {
  auto spec = reduce(make_instance(std::vector<std::uint64_t>(12, 1), 6, 2));
  CHECK_FALSE(within_limits(spec, {}));
  CHECK_THROWS_AS(solve_bruteforce(spec), ResourceError);
  CHECK_NOTHROW(solve_bruteforce(spec, {6, 8, 24}));
}

TEST_CASE("automatic strategy picks by size") {
  CHECK(bound_pipeline(table_of({3, 1}), 2, 2, Strategy::automatic).solver ==
        SolverKind::bruteforce);
  auto big = table_of(std::vector<std::uint64_t>(40, 1));
  auto r = bound_pipeline(big, 4, 10, Strategy::automatic);
  CHECK(r.solver == SolverKind::exact_dp);
  PipelineOptions tight;
  tight.memory_budget = 1;
  CHECK(bound_pipeline(big, 4, 10, Strategy::automatic, tight).solver == SolverKind::greedy);
}

TEST_CASE("unequal class sizes through bruteforce") {
  auto spec = make_unequal_instance({3, 1}, {1, 3});
  auto r = solve_bruteforce(spec);
  auto oracle = naive_bound({3, 1}, std::vector<std::uint64_t>{1, 3});
  CHECK(r.coherence == oracle.coherence);
  CHECK_THROWS_AS(solve_exact_dp(spec), ValidationError);
  CHECK_THROWS_AS(solve_greedy(spec), ValidationError);
}

TEST_CASE("parse_strategy") {
  CHECK(parse_strategy("auto") == Strategy::automatic);
  CHECK(parse_strategy("dp") == Strategy::exact_dp);
  CHECK(parse_strategy("exact_dp") == Strategy::exact_dp);
  CHECK(parse_strategy("greedy") == Strategy::greedy);
  CHECK_THROWS_AS(parse_strategy("fast"), ValidationError);
}

TEST_CASE("pipeline reports cell coordinates") {
  auto table = OccupancyTable::from_cells(2, 3, {{{0, 0}, 3}, {{1, 2}, 1}});
  auto r = bound_pipeline(table, 2, 2, Strategy::exact_dp);
  REQUIRE(r.has_coords());
  REQUIRE(r.cell_coords.size() == 4);
  auto second = r.coords_of(1);
  CHECK(CellIndex(second.begin(), second.end()) == CellIndex{1, 2});
  CHECK(r.mistake_bound == 1);
}
