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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <cbound/bound_solvers.hpp>
#include <cbound/metric_classifiers.hpp>
#include <cbound/mistakes_model.hpp>
#include <cbound/occupancy.hpp>
#include <cbound/parallel.hpp>
#include <cbound/rng.hpp>
#include <cbound/stats.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace cbound;

namespace {

constexpr std::uint64_t kMasterSeed = 20260101;

// Pinned thresholds.
constexpr double kOracleSeconds = 30.0;
constexpr double kGreedyRatioFloor = 0.70;
constexpr double kHeuristicViolationCeiling = 0.10;
constexpr double kSpearmanFloor = 0.9;
constexpr double kMonotonicitySeconds = 60.0;
constexpr double kDecompositionFloor = 0.90;
constexpr double kLinearR2Floor = 0.95;
constexpr double kStudyPearsonFloor = 0.6;
constexpr double kStudySeconds = 300.0;
constexpr double kScalingCeiling = 12.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::vector<testing::RandomInstance> oracle_instances() {
  Rng rng(derive_seed(kMasterSeed, 1));
  std::vector<testing::RandomInstance> out;
  while (out.size() < 200) {
    auto inst = testing::random_instance(rng, 4, 5, 20);
    if (inst.cells.size() < 2) continue;  // single-cell instances are trivial
    out.push_back(std::move(inst));
  }
  return out;
}

void criteria_1_and_2() {
  auto instances = oracle_instances();
  std::vector<std::uint64_t> exact(instances.size());
  std::size_t agree = 0;
  auto start = Clock::now();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto spec = make_instance(instances[i].cells, instances[i].classes, instances[i].class_size);
    auto dp = solve_exact_dp(spec);
    auto brute = solve_bruteforce(spec);
    exact[i] = brute.coherence;
    agree += dp.coherence == brute.coherence;
  }
  double elapsed = seconds_since(start);
  report(1, agree == instances.size() && elapsed < kOracleSeconds, "dp equals bruteforce",
         std::to_string(agree) + "/" + std::to_string(instances.size()) + " in " +
             fmt(elapsed) + " s (limit " + fmt(kOracleSeconds) + " s)");

  std::size_t dominated = 0;
  double min_ratio = 1.0, sum_ratio = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto spec = make_instance(instances[i].cells, instances[i].classes, instances[i].class_size);
    auto greedy = solve_greedy(spec);
    dominated += greedy.coherence <= exact[i];
    double ratio = static_cast<double>(greedy.coherence) / static_cast<double>(exact[i]);
    min_ratio = std::min(min_ratio, ratio);
    sum_ratio += ratio;
  }
  report(2, dominated == instances.size() && min_ratio >= kGreedyRatioFloor,
         "greedy below exact",
         std::to_string(dominated) + "/" + std::to_string(instances.size()) +
             " dominated; ratio min " + fmt(min_ratio) + " mean " +
             fmt(sum_ratio / instances.size()) + " (floor " + fmt(kGreedyRatioFloor) + ")");
}

void criterion_3() {
  Rng rng(derive_seed(kMasterSeed, 3));
  std::size_t agree = 0, total = 0;
  while (total < 200) {
    std::uint64_t k = 1 + rng.below(4);
    std::uint64_t s = 1 + rng.below(std::min<std::uint64_t>(8, 24 / (k + 1)));
    std::vector<std::uint64_t> cells{s};
    std::uint64_t left = k * s;
    while (left > 0) {
      std::uint64_t c = 1 + rng.below(std::min<std::uint64_t>(left, std::min<std::uint64_t>(s, 5)));
      cells.push_back(c);
      left -= c;
    }
    rng.shuffle(cells.begin(), cells.end());
    std::vector<Cell> table_cells;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      table_cells.push_back({{static_cast<Label>(i)}, cells[i]});
    }
    auto table =
        OccupancyTable::from_cells(1, static_cast<Label>(cells.size()), std::move(table_cells));
    auto reduced = bound_pipeline(table, k + 1, s, Strategy::exact_dp);
    auto unreduced = solve_bruteforce(make_instance(cells, k + 1, s));
    agree += reduced.coherence == unreduced.coherence;
    ++total;
  }
  report(3, agree == total, "reduction is safe",
         std::to_string(agree) + "/" + std::to_string(total) +
             " reduce-then-solve equal to unreduced bruteforce");
}

void criterion_4() {
  Rng rng(derive_seed(kMasterSeed, 4));
  std::size_t accepted = 0, skipped = 0, oracle_ok = 0, heuristic_violations = 0;
  std::uint64_t gap_sum = 0, gap_max = 0;
  std::uint64_t draw = 0;
  while (accepted < 500) {
    std::uint64_t seed = derive_seed(derive_seed(kMasterSeed, 40), draw++);
    Rng local(seed);
    std::uint64_t k = 2 + local.below(4);
    std::uint64_t s = 1 + local.below(4);
    Label l = k <= 4 ? 2 : 3;
    l += static_cast<Label>(local.below(2));
    std::uint64_t m = local.below(k * s + 1);
    auto truth = plant_truth(k, s, 2, l, derive_seed(seed, 0));
    auto sim = inject_mistakes(truth, m, derive_seed(seed, 1));
    auto table = build_occupancy(sim.records, 2, l);
    auto spec = make_instance(table, k, s);
    if (!within_limits(spec, {})) {
      ++skipped;
      continue;
    }
    ++accepted;
    auto oracle = solve_bruteforce(spec);
    oracle_ok += *oracle.oracle_min_mistakes <= sim.actual_mistakes;
    auto heuristic = bound_pipeline(table, k, s, Strategy::automatic);
    heuristic_violations += heuristic.mistake_bound > sim.actual_mistakes;
    std::uint64_t gap = heuristic.mistake_bound - *oracle.oracle_min_mistakes;
    gap_sum += gap;
    gap_max = std::max(gap_max, gap);
  }
  (void)rng;
  double rate = static_cast<double>(heuristic_violations) / accepted;
  report(4, oracle_ok == accepted && rate <= kHeuristicViolationCeiling, "lower bound holds",
         "oracle " + std::to_string(oracle_ok) + "/" + std::to_string(accepted) +
             "; heuristic violations " + std::to_string(heuristic_violations) + " (" +
             fmt(100 * rate) + "%, ceiling " + fmt(100 * kHeuristicViolationCeiling) +
             "%); bound minus oracle mean " + fmt(static_cast<double>(gap_sum) / accepted) +
             " max " + std::to_string(gap_max) + "; skipped " + std::to_string(skipped) +
             " outside the bruteforce guard");
}

void criterion_5() {
  MonotonicityConfig config;
  config.seed = derive_seed(kMasterSeed, 5);
  for (std::uint64_t m = 0; m <= 150; m += 15) config.mistakes.push_back(m);
  config.threads = default_thread_count();
  auto start = Clock::now();
  auto rows = monotonicity_experiment(config);
  double elapsed = seconds_since(start);
  std::vector<double> ms, bounds;
  for (const auto& r : rows) {
    ms.push_back(static_cast<double>(r.mistakes));
    bounds.push_back(r.mean_bound);
  }
  double rho = stats::spearman(ms, bounds);
  std::string series;
  for (double b : bounds) series += (series.empty() ? "" : " ") + fmt(b, 3);
  report(5, rho >= kSpearmanFloor && elapsed < kMonotonicitySeconds, "monotone in mistakes",
         "spearman " + fmt(rho) + " (floor " + fmt(kSpearmanFloor) + ") in " + fmt(elapsed) +
             " s; mean bounds " + series);
}

MistakesGraph graph_of(std::vector<std::pair<Label, Label>> arcs) {
  MistakesGraph g;
  std::set<CellIndex> nodes;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    CellIndex from{arcs[i].first}, to{arcs[i].second};
    nodes.insert(from);
    nodes.insert(to);
    g.arcs.push_back({from, to, "a" + std::to_string(i)});
  }
  g.nodes.assign(nodes.begin(), nodes.end());
  return g;
}

void criterion_6() {
  std::uint64_t greedy_hidden = 0, exact_hidden = 0;
  std::size_t graphs = 0, equal = 0, below_floor = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    std::uint64_t seed = derive_seed(derive_seed(kMasterSeed, 6), t);
    Rng local(seed);
    std::uint64_t k = 2 + local.below(5);
    std::uint64_t s = 1 + local.below(4);
    std::uint64_t m = local.below(std::min<std::uint64_t>(8, k * s) + 1);
    auto truth = plant_truth(k, s, 2, 3, derive_seed(seed, 0));
    auto sim = inject_mistakes(truth, m, derive_seed(seed, 1));
    auto graph = build_mistakes_graph(truth, sim.records);
    if (graph.arcs.size() > kExhaustiveArcLimit) continue;
    ++graphs;
    auto g = decompose_greedy(graph);
    auto e = decompose_exhaustive(graph);
    greedy_hidden += g.hidden;
    exact_hidden += e.hidden;
    equal += g.hidden == e.hidden;
    below_floor += static_cast<double>(g.hidden) < kDecompositionFloor * e.hidden;
  }
  struct Fixture {
    std::vector<std::pair<Label, Label>> arcs;
    std::uint64_t hidden;
  };
  const std::vector<Fixture> fixtures{{{{0, 1}}, 0}, {{{0, 1}, {1, 0}}, 2}, {{{0, 1}, {1, 2}}, 0}};
  std::size_t fixtures_ok = 0;
  for (const auto& f : fixtures) {
    auto g = graph_of(f.arcs);
    fixtures_ok += decompose_greedy(g).hidden == f.hidden && decompose_exhaustive(g).hidden == f.hidden;
  }
  double ratio = exact_hidden == 0 ? 1.0 : static_cast<double>(greedy_hidden) / exact_hidden;
  report(6, below_floor == 0 && fixtures_ok == fixtures.size(), "decomposition near exact",
         std::to_string(graphs) + " graphs, " + std::to_string(below_floor) +
             " below " + fmt(kDecompositionFloor) + " of exact, " + std::to_string(equal) +
             " equal, pooled hidden ratio " + fmt(ratio) + "; hand fixtures " +
             std::to_string(fixtures_ok) + "/" + std::to_string(fixtures.size()));
}

void criterion_7() {
  auto fit_of = [](Reroute reroute) {
    CorrelatedPairConfig config;
    config.seed = derive_seed(kMasterSeed, 7);
    config.reroute = reroute;
    for (std::uint64_t m = 0; m <= 250; m += 25) config.mistakes.push_back(m);
    config.threads = default_thread_count();
    auto rows = correlated_pair_experiment(config);
    std::vector<double> ms, bounds;
    for (const auto& r : rows) {
      ms.push_back(static_cast<double>(r.mistakes));
      bounds.push_back(r.mean_bound);
    }
    return std::pair{stats::linear_fit(ms, bounds), rows.front().mean_diagonal_mass};
  };
  auto [fit, diagonal] = fit_of(Reroute::other_class);
  auto [uniform, unused] = fit_of(Reroute::uniform_cell);
  (void)unused;
  report(7, fit.r_squared >= kLinearR2Floor && fit.slope > 0, "linear growth on the diagonal",
         "R^2 " + fmt(fit.r_squared) + " (floor " + fmt(kLinearR2Floor) + "), slope " +
             fmt(fit.slope) + ", diagonal mass at m=0 " + fmt(diagonal) +
             "; uniform-cell reroute R^2 " + fmt(uniform.r_squared) + ", slope " +
             fmt(uniform.slope));
}

void criterion_8() {
  auto start = Clock::now();
  GaussianClusterConfig config;
  config.dimension = 16;
  config.class_count = 100;
  config.class_size = 20;
  config.separation = 4.0;
  config.seed = derive_seed(kMasterSeed, 8);
  auto clusters = make_gaussian_clusters(config);

  std::vector<LearnerSpec> learners;
  const std::size_t projection_dims[] = {4, 6, 8, 10, 12};
  const std::size_t subset_dims[] = {4, 6, 8, 10, 12};
  for (std::size_t i = 0; i < 5; ++i) {
    LearnerSpec p;
    p.name = "proj" + std::to_string(projection_dims[i]);
    p.kind = LearnerKind::pair_projection;
    p.dims = projection_dims[i];
    p.seed = derive_seed(config.seed, 100 + i);
    learners.push_back(p);
    LearnerSpec c;
    c.name = "sub" + std::to_string(subset_dims[i]);
    c.kind = LearnerKind::coordinate_subset;
    c.dims = subset_dims[i];
    c.reps_per_class = i % 2 == 0 ? 1 : 3;
    c.seed = derive_seed(config.seed, 200 + i);
    learners.push_back(c);
  }
  auto study = pairwise_ensemble_study(clusters.embeddings, learners, 30, 20,
                                       derive_seed(config.seed, 1), default_thread_count());
  double elapsed = seconds_since(start);
  auto at_class_count = pairwise_ensemble_study(clusters.embeddings, learners, 100, 20,
                                                derive_seed(config.seed, 1),
                                                default_thread_count());
  double lo = 1.0, hi = 0.0;
  for (double a : study.accuracies) {
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  report(8,
         study.rows.size() == 45 && study.pearson_r >= kStudyPearsonFloor && study.slope > 0 &&
             elapsed < kStudySeconds,
         "bound tracks false-same",
         std::to_string(study.rows.size()) + " pairs, pearson " + fmt(study.pearson_r) +
             " (floor " + fmt(kStudyPearsonFloor) + "), slope " + fmt(study.slope) +
             ", accuracy range " + fmt(lo, 3) + ".." + fmt(hi, 3) + ", " + fmt(elapsed) +
             " s; with L = K = 100, pearson " + fmt(at_class_count.pearson_r));
}

double median_of(std::vector<double> times) {
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

void criterion_9() {
  constexpr std::uint64_t kS = 10;
  constexpr Label kL = 400;
  constexpr int kRuns = 5;
  struct Case {
    std::uint64_t n;
    std::vector<Label> outputs;
    std::vector<double> times;
    std::uint64_t bound = 0;
  };
  std::vector<Case> cases;
  for (std::uint64_t n : {100'000ull, 1'000'000ull}) {
    auto truth = plant_truth(n / kS, kS, 2, kL, derive_seed(kMasterSeed, 90 + n));
    auto sim = inject_mistakes(truth, n / 10, derive_seed(kMasterSeed, 91 + n));
    Case c{n, {}, {}, 0};
    c.outputs.reserve(2 * n);
    for (const auto& r : sim.records) c.outputs.insert(c.outputs.end(), r.outputs.begin(), r.outputs.end());
    cases.push_back(std::move(c));
  }
  auto run = [&](Case& c) {
    auto start = Clock::now();
    auto table = build_occupancy(std::span<const Label>(c.outputs), 2, kL);
    auto result = solve_greedy(reduce_instance(table, c.n / kS, kS));
    double t = seconds_since(start);
    c.bound = result.mistake_bound;
    return t;
  };
  // One untimed pass each, then interleaved runs so load spikes hit both sizes.
  for (auto& c : cases) run(c);
  for (int r = 0; r < kRuns; ++r) {
    for (auto& c : cases) c.times.push_back(run(c));
  }
  double small = median_of(cases[0].times), large = median_of(cases[1].times);
  double ratio = large / small;
  report(9, ratio <= kScalingCeiling && cases[0].bound > 0 && cases[1].bound > 0,
         "near-linear time",
         "N=1e5 " + fmt(small * 1e3) + " ms, N=1e6 " + fmt(large * 1e3) + " ms, ratio " +
             fmt(ratio) + " (ceiling " + fmt(kScalingCeiling) + ", median of " +
             std::to_string(kRuns) + ")");
}

void criterion_10() {
  Rng rng(derive_seed(kMasterSeed, 10));
  std::size_t agree = 0;
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 2 + rng.below(199);
    Label la = 1 + static_cast<Label>(rng.below(6));
    Label lb = 1 + static_cast<Label>(rng.below(6));
    std::uint32_t classes = 1 + static_cast<std::uint32_t>(rng.below(8));
    std::vector<Label> a(n), b(n);
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<Label>(rng.below(la));
      b[i] = static_cast<Label>(rng.below(lb));
      labels[i] = static_cast<std::uint32_t>(rng.below(classes));
    }
    agree += false_same_count(a, b, labels) == testing::brute_false_same(a, b, labels);
  }
  report(10, agree == 50, "false-same matches pair enumeration", std::to_string(agree) + "/50");
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void()>>> criteria{
      {1, criteria_1_and_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
      {6, criterion_6},      {7, criterion_7}, {8, criterion_8}, {9, criterion_9},
      {10, criterion_10}};
  for (const auto& [id, body] : criteria) {
    try {
      body();
    } catch (const std::exception& e) {
      report(id, false, "criterion threw", e.what());
    }
  }
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
