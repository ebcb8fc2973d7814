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

#pragma once

#include <cbound/bound_solvers.hpp>
#include <cbound/occupancy.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cbound {

enum class Placement { independent, injective };

// other_class follows the uniform-target mistake model. uniform_cell sends
// the sample to a uniformly random cell of [L]^Q instead and exists only for
// sensitivity analysis.
enum class Reroute { other_class, uniform_cell };

struct PlantedTruth {
  std::uint64_t class_count = 0;
  std::uint64_t class_size = 0;
  std::size_t arity = 0;
  Label label_count = 0;
  std::vector<CellIndex> class_cells;  // true cell of each class
  std::uint64_t seed = 0;

  friend bool operator==(const PlantedTruth&, const PlantedTruth&) = default;
};

PlantedTruth plant_truth(std::uint64_t class_count, std::uint64_t class_size, std::size_t arity,
                         Label label_count, std::uint64_t seed,
                         Placement placement = Placement::injective);

// Two classifiers. The first gives classes distinct labels when L >= K
// (uniform labels otherwise); the second copies the first with probability
// `agreement` and draws a uniform label otherwise.
PlantedTruth plant_correlated_pair(std::uint64_t class_count, std::uint64_t class_size,
                                   Label label_count, double agreement, std::uint64_t seed);

struct Simulation {
  // Sample j of class k sits at index k * S + j and is named "s<index>".
  std::vector<PredictionRecord> records;
  // Rerouted samples whose observed cell differs from their true cell.
  std::uint64_t actual_mistakes = 0;
  std::uint64_t rerouted = 0;
};

// Reroutes exactly `mistakes` samples chosen without replacement.
Simulation inject_mistakes(const PlantedTruth& truth, std::uint64_t mistakes, std::uint64_t seed,
                           Reroute reroute = Reroute::other_class);

struct MistakeArc {
  CellIndex from;
  CellIndex to;
  std::string sample_id;
};

struct MistakesGraph {
  std::vector<CellIndex> nodes;  // sorted, unique
  std::vector<MistakeArc> arcs;  // never from == to
};

MistakesGraph build_mistakes_graph(const PlantedTruth& truth,
                                   std::span<const PredictionRecord> records);

struct MistakeDecomposition {
  std::uint64_t hidden = 0;
  std::uint64_t visible = 0;
  std::uint64_t cycles_used = 0;
  std::uint64_t paths_used = 0;

  friend bool operator==(const MistakeDecomposition&, const MistakeDecomposition&) = default;
};

inline constexpr std::size_t kExhaustiveArcLimit = 8;

// Cycles first (walk until a node repeats, starting from the smallest node
// with outgoing arcs), then maximal paths over the acyclic remainder,
// longest first while a path still has interior arcs.
MistakeDecomposition decompose_greedy(const MistakesGraph& graph);

// Exact maximum of hidden arcs over every split of the arcs into
// edge-disjoint trails and closed trails, fewest trails on ties. Refuses
// graphs above 12 arcs.
MistakeDecomposition decompose_exhaustive(const MistakesGraph& graph);

// Exhaustive up to kExhaustiveArcLimit arcs, greedy beyond.
MistakeDecomposition decompose_mistakes(const MistakesGraph& graph);

struct MonotonicityConfig {
  std::uint64_t class_count = 30;
  std::uint64_t class_size = 10;
  std::size_t arity = 2;
  Label label_count = 8;
  std::vector<std::uint64_t> mistakes;
  std::uint64_t trials = 50;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::greedy;
  Placement placement = Placement::injective;
  Reroute reroute = Reroute::other_class;
  PipelineOptions pipeline{};
  std::size_t threads = 1;
};

struct ExperimentRow {
  std::uint64_t mistakes = 0;
  double mean_bound = 0.0;
  double std_bound = 0.0;
  double mean_actual = 0.0;
  double mean_coherence = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;  // trial t of this row uses derive_seed(seed, t)

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

std::vector<ExperimentRow> monotonicity_experiment(const MonotonicityConfig& config);

struct CorrelatedPairConfig {
  std::uint64_t class_count = 50;
  std::uint64_t class_size = 10;
  Label label_count = 60;
  double agreement = 1.0;
  std::vector<std::uint64_t> mistakes;
  std::uint64_t trials = 30;
  Reroute reroute = Reroute::other_class;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::greedy;
  PipelineOptions pipeline{};
  std::size_t threads = 1;
};

struct CorrelatedRow {
  std::uint64_t mistakes = 0;
  double mean_diagonal_mass = 0.0;
  double mean_bound = 0.0;
  double std_bound = 0.0;
  double mean_actual = 0.0;
  double mean_coherence = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

std::vector<CorrelatedRow> correlated_pair_experiment(const CorrelatedPairConfig& config);

}  // namespace cbound
