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

#include <cbound/mistakes_model.hpp>

#include <cbound/error.hpp>
#include <cbound/parallel.hpp>
#include <cbound/rng.hpp>
#include <cbound/stats.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace cbound {

namespace {

std::optional<std::uint64_t> cell_space(Label label_count, std::size_t arity) {
  std::uint64_t result = 1;
  for (std::size_t q = 0; q < arity; ++q) {
    if (result > std::numeric_limits<std::uint64_t>::max() / label_count) return std::nullopt;
    result *= label_count;
  }
  return result;
}

CellIndex decode(std::uint64_t code, std::size_t arity, Label label_count) {
  CellIndex cell(arity);
  for (std::size_t q = arity; q-- > 0;) {
    cell[q] = static_cast<Label>(code % label_count);
    code /= label_count;
  }
  return cell;
}

CellIndex random_cell(Rng& rng, std::size_t arity, Label label_count) {
  CellIndex cell(arity);
  for (auto& label : cell) label = static_cast<Label>(rng.below(label_count));
  return cell;
}

void check_dimensions(std::uint64_t class_count, std::uint64_t class_size, std::size_t arity,
                      Label label_count) {
  if (class_count == 0 || class_size == 0 || arity == 0 || label_count == 0) {
    throw ValidationError("K, S, Q and L must all be positive");
  }
}

}  // namespace

PlantedTruth plant_truth(std::uint64_t class_count, std::uint64_t class_size, std::size_t arity,
                         Label label_count, std::uint64_t seed, Placement placement) {
  check_dimensions(class_count, class_size, arity, label_count);
  PlantedTruth truth{class_count, class_size, arity, label_count, {}, seed};
  truth.class_cells.reserve(class_count);
  Rng rng(seed);

  if (placement == Placement::independent) {
    for (std::uint64_t k = 0; k < class_count; ++k) {
      truth.class_cells.push_back(random_cell(rng, arity, label_count));
    }
    return truth;
  }

  auto space = cell_space(label_count, arity);
  if (space && *space < class_count) {
    std::ostringstream msg;
    msg << "injective placement needs L^Q >= K, got L^Q = " << *space << " < K = "
        << class_count;
    throw ValidationError(msg.str());
  }
  if (space && *space <= (std::uint64_t{1} << 22)) {
    // Partial Fisher-Yates over every code.
    std::vector<std::uint64_t> codes(*space);
    std::iota(codes.begin(), codes.end(), std::uint64_t{0});
    for (std::uint64_t k = 0; k < class_count; ++k) {
      std::swap(codes[k], codes[k + rng.below(*space - k)]);
      truth.class_cells.push_back(decode(codes[k], arity, label_count));
    }
    return truth;
  }
  std::set<CellIndex> taken;
  while (truth.class_cells.size() < class_count) {
    CellIndex cell = random_cell(rng, arity, label_count);
    if (taken.insert(cell).second) truth.class_cells.push_back(std::move(cell));
  }
  return truth;
}

PlantedTruth plant_correlated_pair(std::uint64_t class_count, std::uint64_t class_size,
                                   Label label_count, double agreement, std::uint64_t seed) {
  check_dimensions(class_count, class_size, 2, label_count);
  if (!(agreement >= 0.0 && agreement <= 1.0)) {
    throw ValidationError("agreement must lie in [0, 1]");
  }
  PlantedTruth truth{class_count, class_size, 2, label_count, {}, seed};
  Rng rng(seed);
  std::vector<Label> first(class_count);
  if (label_count >= class_count) {
    std::vector<Label> labels(label_count);
    std::iota(labels.begin(), labels.end(), Label{0});
    for (std::uint64_t k = 0; k < class_count; ++k) {
      std::swap(labels[k], labels[k + rng.below(label_count - k)]);
      first[k] = labels[k];
    }
  } else {
    for (auto& label : first) label = static_cast<Label>(rng.below(label_count));
  }
  truth.class_cells.reserve(class_count);
  for (std::uint64_t k = 0; k < class_count; ++k) {
    Label second = rng.bernoulli(agreement) ? first[k] : static_cast<Label>(rng.below(label_count));
    truth.class_cells.push_back({first[k], second});
  }
  return truth;
}

Simulation inject_mistakes(const PlantedTruth& truth, std::uint64_t mistakes, std::uint64_t seed,
                           Reroute reroute) {
  const std::uint64_t n = truth.class_count * truth.class_size;
  if (mistakes > n) {
    std::ostringstream msg;
    msg << "mistake count " << mistakes << " exceeds K * S = " << n;
    throw ValidationError(msg.str());
  }
  if (reroute == Reroute::other_class && truth.class_count < 2 && mistakes > 0) {
    throw ValidationError("rerouting to another class needs at least two classes");
  }
  Rng rng(seed);

  std::vector<std::uint64_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::uint64_t{0});
  std::vector<bool> rerouted(n, false);
  for (std::uint64_t i = 0; i < mistakes; ++i) {
    std::swap(indices[i], indices[i + rng.below(n - i)]);
    rerouted[indices[i]] = true;
  }

  Simulation sim;
  sim.records.reserve(n);
  sim.rerouted = mistakes;
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    const auto cls = static_cast<std::uint32_t>(idx / truth.class_size);
    PredictionRecord record{"s" + std::to_string(idx), truth.class_cells[cls], cls};
    if (rerouted[idx]) {
      if (reroute == Reroute::other_class) {
        std::uint64_t target = rng.below(truth.class_count - 1);
        if (target >= cls) ++target;
        record.outputs = truth.class_cells[target];
      } else {
        record.outputs = random_cell(rng, truth.arity, truth.label_count);
      }
      if (record.outputs != truth.class_cells[cls]) ++sim.actual_mistakes;
    }
    sim.records.push_back(std::move(record));
  }
  return sim;
}

MistakesGraph build_mistakes_graph(const PlantedTruth& truth,
                                   std::span<const PredictionRecord> records) {
  MistakesGraph graph;
  std::set<CellIndex> nodes;
  for (const auto& record : records) {
    if (!record.true_label) {
      throw ValidationError("sample '" + record.sample_id + "' has no true label");
    }
    if (*record.true_label >= truth.class_count) {
      throw ValidationError("sample '" + record.sample_id + "' has a class outside [0, K)");
    }
    if (record.outputs.size() != truth.arity) {
      throw ValidationError("sample '" + record.sample_id + "' has the wrong number of outputs");
    }
    const CellIndex& home = truth.class_cells[*record.true_label];
    if (record.outputs == home) continue;
    nodes.insert(home);
    nodes.insert(record.outputs);
    graph.arcs.push_back({home, record.outputs, record.sample_id});
  }
  graph.nodes.assign(nodes.begin(), nodes.end());
  return graph;
}

namespace {

// Arcs as (tail, head) node indices into graph.nodes.
struct IndexedArcs {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
};

IndexedArcs index_arcs(const MistakesGraph& graph) {
  IndexedArcs out;
  std::vector<CellIndex> nodes = graph.nodes;
  for (const auto& arc : graph.arcs) {
    nodes.push_back(arc.from);
    nodes.push_back(arc.to);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto index_of = [&](const CellIndex& cell) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), cell) -
                                    nodes.begin());
  };
  out.node_count = nodes.size();
  for (const auto& arc : graph.arcs) {
    if (arc.from == arc.to) throw ValidationError("mistakes graph contains a self-loop");
    out.arcs.emplace_back(index_of(arc.from), index_of(arc.to));
  }
  return out;
}

std::uint64_t visible_cost(std::uint64_t path_length) { return std::min<std::uint64_t>(path_length, 2); }

}  // namespace

MistakeDecomposition decompose_greedy(const MistakesGraph& graph) {
  const IndexedArcs indexed = index_arcs(graph);
  const auto& arcs = indexed.arcs;
  const std::size_t n = indexed.node_count;

  // Out-arcs of each node ordered by head, then by input position.
  std::vector<std::vector<std::size_t>> out(n);
  {
    std::vector<std::size_t> order(arcs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return arcs[a] < arcs[b]; });
    for (std::size_t a : order) out[arcs[a].first].push_back(a);
  }

  MistakeDecomposition result;
  std::vector<bool> used(arcs.size(), false);
  std::vector<bool> discarded(arcs.size(), false);
  std::vector<std::size_t> cursor(n, 0);
  auto next_arc = [&](std::size_t v) -> std::optional<std::size_t> {
    auto& c = cursor[v];
    while (c < out[v].size() && (used[out[v][c]] || discarded[out[v][c]])) ++c;
    if (c == out[v].size()) return std::nullopt;
    return out[v][c];
  };

  // Cycle phase. An arc into a node with no usable out-arc cannot lie on a
  // cycle, so it is set aside; what remains when no start exists is acyclic.
  std::vector<std::ptrdiff_t> on_walk(n, -1);
  for (;;) {
    std::size_t start = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (next_arc(v)) {
        start = v;
        break;
      }
    }
    if (start == n) break;

    std::vector<std::size_t> walk_nodes{start};
    std::vector<std::size_t> walk_arcs;
    on_walk[start] = 0;
    std::size_t current = start;
    for (;;) {
      auto arc = next_arc(current);
      if (!arc) {
        if (walk_arcs.empty()) break;
        discarded[walk_arcs.back()] = true;
        walk_arcs.pop_back();
        on_walk[current] = -1;
        walk_nodes.pop_back();
        current = walk_nodes.back();
        continue;
      }
      std::size_t head = arcs[*arc].second;
      walk_arcs.push_back(*arc);
      if (on_walk[head] >= 0) {
        auto first = static_cast<std::size_t>(on_walk[head]);
        for (std::size_t j = first; j < walk_arcs.size(); ++j) used[walk_arcs[j]] = true;
        result.hidden += walk_arcs.size() - first;
        ++result.cycles_used;
        break;
      }
      on_walk[head] = static_cast<std::ptrdiff_t>(walk_nodes.size());
      walk_nodes.push_back(head);
      current = head;
    }
    for (std::size_t v : walk_nodes) on_walk[v] = -1;
  }

  // Path phase over the acyclic remainder. Longest paths go first while they
  // still have interior arcs; shorter ones start at the smallest source.
  std::fill(discarded.begin(), discarded.end(), false);
  std::fill(cursor.begin(), cursor.end(), 0);
  std::vector<std::size_t> topo;
  {
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (!used[a]) ++indeg[arcs[a].second];
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (indeg[v] == 0) topo.push_back(v);
    }
    for (std::size_t i = 0; i < topo.size(); ++i) {
      for (std::size_t a : out[topo[i]]) {
        if (!used[a] && --indeg[arcs[a].second] == 0) topo.push_back(arcs[a].second);
      }
    }
  }
  std::vector<std::uint64_t> longest(n);
  std::vector<std::size_t> best_arc(n);
  while (!topo.empty()) {
    for (std::size_t i = topo.size(); i-- > 0;) {
      std::size_t v = topo[i];
      longest[v] = 0;
      for (std::size_t a : out[v]) {
        if (used[a]) continue;
        std::uint64_t via = longest[arcs[a].second] + 1;
        if (via > longest[v]) {
          longest[v] = via;
          best_arc[v] = a;
        }
      }
    }
    std::size_t start = 0;
    for (std::size_t v = 1; v < n; ++v) {
      if (longest[v] > longest[start]) start = v;
    }
    const std::uint64_t length = longest[start];
    if (length < 3) break;
    for (std::size_t v = start; longest[v] > 0;) {
      std::size_t a = best_arc[v];
      used[a] = true;
      v = arcs[a].second;
    }
    ++result.paths_used;
    result.visible += visible_cost(length);
    result.hidden += length - visible_cost(length);
  }
  std::vector<std::size_t> in_degree(n, 0);
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    if (!used[a]) ++in_degree[arcs[a].second];
  }
  for (;;) {
    std::size_t start = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_degree[v] == 0 && next_arc(v)) {
        start = v;
        break;
      }
    }
    if (start == n) break;
    std::uint64_t length = 0;
    std::size_t current = start;
    while (auto arc = next_arc(current)) {
      used[*arc] = true;
      --in_degree[arcs[*arc].second];
      current = arcs[*arc].second;
      ++length;
    }
    ++result.paths_used;
    result.visible += visible_cost(length);
    result.hidden += length - visible_cost(length);
  }
  if (result.hidden + result.visible != arcs.size()) {
    throw std::logic_error("greedy decomposition left arcs uncovered");
  }
  return result;
}

MistakeDecomposition decompose_exhaustive(const MistakesGraph& graph) {
  constexpr std::size_t kLimit = 12;
  const IndexedArcs indexed = index_arcs(graph);
  const auto& arcs = indexed.arcs;
  const std::size_t m = arcs.size();
  if (m > kLimit) {
    throw ResourceError("exhaustive cover search is limited to 12 arcs", m);
  }

  // A split into trails is a partial injection succ: arc -> arc with
  // head(a) == tail(succ(a)). Chains are open trails, loops closed ones.
  std::vector<std::vector<std::size_t>> followers(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a != b && arcs[a].second == arcs[b].first) followers[a].push_back(b);
    }
  }
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> succ(m, kNone);
  std::vector<bool> taken(m, false);
  MistakeDecomposition best;
  bool have_best = false;

  auto evaluate = [&] {
    MistakeDecomposition d;
    std::vector<bool> visited(m, false);
    for (std::size_t a = 0; a < m; ++a) {
      if (taken[a]) continue;  // has a predecessor
      std::uint64_t length = 0;
      for (std::size_t x = a; x != kNone; x = succ[x]) {
        visited[x] = true;
        ++length;
      }
      ++d.paths_used;
      d.visible += visible_cost(length);
      d.hidden += length - visible_cost(length);
    }
    for (std::size_t a = 0; a < m; ++a) {
      if (visited[a]) continue;
      std::size_t x = a;
      do {
        visited[x] = true;
        ++d.hidden;
        x = succ[x];
      } while (x != a);
      ++d.cycles_used;
    }
    // Among equal covers, the one with the fewest trails.
    auto trails = [](const MistakeDecomposition& x) { return x.paths_used + x.cycles_used; };
    if (!have_best || d.hidden > best.hidden ||
        (d.hidden == best.hidden && trails(d) < trails(best))) {
      best = d;
      have_best = true;
    }
  };

  auto assign = [&](auto&& self, std::size_t a) -> void {
    if (a == m) {
      evaluate();
      return;
    }
    succ[a] = kNone;
    self(self, a + 1);
    for (std::size_t b : followers[a]) {
      if (taken[b]) continue;
      taken[b] = true;
      succ[a] = b;
      self(self, a + 1);
      taken[b] = false;
    }
    succ[a] = kNone;
  };
  assign(assign, 0);
  return best;
}

MistakeDecomposition decompose_mistakes(const MistakesGraph& graph) {
  if (graph.arcs.size() <= kExhaustiveArcLimit) return decompose_exhaustive(graph);
  return decompose_greedy(graph);
}

namespace {

struct TrialOutcome {
  double bound = 0.0;
  double actual = 0.0;
  double coherence = 0.0;
  double diagonal = 0.0;
};

template <typename Row>
void summarize(Row& row, const std::vector<TrialOutcome>& outcomes) {
  std::vector<double> bounds, actual, coherence;
  for (const auto& o : outcomes) {
    bounds.push_back(o.bound);
    actual.push_back(o.actual);
    coherence.push_back(o.coherence);
  }
  row.mean_bound = stats::mean(bounds);
  row.std_bound = stats::sample_std(bounds);
  row.mean_actual = stats::mean(actual);
  row.mean_coherence = stats::mean(coherence);
  row.trials = outcomes.size();
}

}  // namespace

std::vector<ExperimentRow> monotonicity_experiment(const MonotonicityConfig& config) {
  if (config.trials == 0) throw ValidationError("trials must be at least 1");
  check_dimensions(config.class_count, config.class_size, config.arity, config.label_count);
  for (std::uint64_t m : config.mistakes) {
    if (m > config.class_count * config.class_size) {
      throw ValidationError("mistake count " + std::to_string(m) + " exceeds K * S");
    }
  }

  std::vector<ExperimentRow> rows;
  rows.reserve(config.mistakes.size());
  for (std::size_t r = 0; r < config.mistakes.size(); ++r) {
    ExperimentRow row;
    row.mistakes = config.mistakes[r];
    row.seed = derive_seed(config.seed, r);
    std::vector<TrialOutcome> outcomes(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      std::uint64_t trial_seed = derive_seed(row.seed, t);
      PlantedTruth truth = plant_truth(config.class_count, config.class_size, config.arity,
                                       config.label_count, derive_seed(trial_seed, 0),
                                       config.placement);
      Simulation sim = inject_mistakes(truth, row.mistakes, derive_seed(trial_seed, 1),
                                       config.reroute);
      OccupancyTable table = build_occupancy(sim.records, config.arity, config.label_count);
      BoundResult bound = bound_pipeline(table, config.class_count, config.class_size,
                                         config.strategy, config.pipeline);
      outcomes[t] = {static_cast<double>(bound.mistake_bound),
                     static_cast<double>(sim.actual_mistakes),
                     static_cast<double>(bound.coherence), 0.0};
    });
    summarize(row, outcomes);
    rows.push_back(row);
  }
  return rows;
}

std::vector<CorrelatedRow> correlated_pair_experiment(const CorrelatedPairConfig& config) {
  if (config.trials == 0) throw ValidationError("trials must be at least 1");
  check_dimensions(config.class_count, config.class_size, 2, config.label_count);
  std::vector<CorrelatedRow> rows;
  rows.reserve(config.mistakes.size());
  for (std::size_t r = 0; r < config.mistakes.size(); ++r) {
    CorrelatedRow row;
    row.mistakes = config.mistakes[r];
    row.seed = derive_seed(config.seed, r);
    std::vector<TrialOutcome> outcomes(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      std::uint64_t trial_seed = derive_seed(row.seed, t);
      PlantedTruth truth = plant_correlated_pair(config.class_count, config.class_size,
                                                 config.label_count, config.agreement,
                                                 derive_seed(trial_seed, 0));
      Simulation sim =
          inject_mistakes(truth, row.mistakes, derive_seed(trial_seed, 1), config.reroute);
      OccupancyTable table = build_occupancy(sim.records, 2, config.label_count);
      BoundResult bound = bound_pipeline(table, config.class_count, config.class_size,
                                         config.strategy, config.pipeline);
      outcomes[t] = {static_cast<double>(bound.mistake_bound),
                     static_cast<double>(sim.actual_mistakes),
                     static_cast<double>(bound.coherence), diagonal_mass(table)};
    });
    summarize(row, outcomes);
    std::vector<double> diagonal;
    for (const auto& o : outcomes) diagonal.push_back(o.diagonal);
    row.mean_diagonal_mass = stats::mean(diagonal);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cbound
