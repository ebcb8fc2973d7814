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

#include <cbound/occupancy.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cbound {

enum class SolverKind { bruteforce, exact_dp, greedy };
enum class Strategy { automatic, bruteforce, exact_dp, greedy };

std::string_view to_string(SolverKind kind);
std::string_view to_string(Strategy strategy);
// Accepts "auto", "bruteforce", "dp"/"exact_dp", "greedy".
Strategy parse_strategy(std::string_view text);

struct AssignmentEntry {
  std::uint64_t cls = 0;
  std::size_t cell = 0;  // position in cell_sizes
  std::uint64_t count = 0;

  friend bool operator==(const AssignmentEntry&, const AssignmentEntry&) = default;
};

// Integer classes x cells matrix with prescribed row and column sums, kept
// sparse and sorted by (class, cell).
struct AssignmentMatrix {
  std::vector<std::uint64_t> class_sizes;
  std::vector<std::uint64_t> cell_sizes;
  std::vector<AssignmentEntry> entries;

  std::uint64_t class_count() const noexcept { return class_sizes.size(); }

  // Sorts entries, merges duplicates and drops zeros.
  void normalize();

  // Throws ValidationError naming the first violated class or cell.
  void validate() const;

  // Dense class-major copy, for tests and small instances.
  std::vector<std::vector<std::uint64_t>> dense() const;

  static AssignmentMatrix from_dense(const std::vector<std::vector<std::uint64_t>>& rows,
                                     std::vector<std::uint64_t> cell_sizes);
};

// Sum of squared entries. Validates the marginals first.
std::uint64_t coherence_of(const AssignmentMatrix& assignment);

// Per class, the cell holding the most of its samples; ties go to the lowest
// cell position (cells are kept in lexicographic order, so this is the
// lexicographically earliest cell).
std::vector<std::size_t> phi_star_of(const AssignmentMatrix& assignment);

struct BoundResult {
  std::uint64_t coherence = 0;
  std::uint64_t mistake_bound = 0;
  std::vector<std::size_t> phi_star;  // class -> cell position
  AssignmentMatrix witness;
  SolverKind solver = SolverKind::greedy;
  bool exact = false;
  // Minimum implied mistakes over every feasible matrix; bruteforce only.
  std::optional<std::uint64_t> oracle_min_mistakes;
  // Coordinates of each witness cell position, flattened with cell_arity
  // labels per cell; set by bound_pipeline.
  std::vector<Label> cell_coords;
  std::size_t cell_arity = 0;

  bool has_coords() const noexcept { return cell_arity != 0; }
  std::span<const Label> coords_of(std::size_t cell) const {
    return std::span<const Label>(cell_coords).subspan(cell * cell_arity, cell_arity);
  }
};

struct BruteforceLimits {
  std::uint64_t max_classes = 5;
  std::uint64_t max_cell = 8;
  std::uint64_t max_total = 24;
};

bool within_limits(const InstanceSpec& spec, const BruteforceLimits& limits);

// Upper bound on the number of leaves the exhaustive enumeration visits.
std::uint64_t estimate_enumeration(const InstanceSpec& spec);

// Exhaustive search over every matrix meeting both marginals. Among
// coherence optima the one with the largest sum of row maxima wins, then the
// first in enumeration order.
BoundResult solve_bruteforce(const InstanceSpec& spec, const BruteforceLimits& limits = {});

inline constexpr std::uint64_t kDefaultMemoryBudget = 256ull << 20;

// Up-front upper bound, in bytes, for the memo table of solve_exact_dp.
std::uint64_t estimate_dp_memory(const InstanceSpec& spec);

// Memoized search over cells in order; the state is the sorted vector of
// remaining class capacities with the last one implied by the remaining
// cell mass. Cells may be split between classes.
BoundResult solve_exact_dp(const InstanceSpec& spec,
                           std::uint64_t memory_budget = kDefaultMemoryBudget);

enum class SizeOrdering { counting_sort, comparison_sort };

// Largest cell first into the class with the most remaining capacity,
// spilling the remainder into the next class when the cell does not fit.
BoundResult solve_greedy(const InstanceSpec& spec,
                         SizeOrdering ordering = SizeOrdering::counting_sort);

// K_r * S minus the samples the witness places in each class's phi* cell.
// Validates the witness against spec.
std::uint64_t mistake_bound_of(const BoundResult& result, const InstanceSpec& spec);

struct PipelineOptions {
  BruteforceLimits limits{};
  std::uint64_t memory_budget = kDefaultMemoryBudget;
};

// reduce_instance, solve, then lift the result back onto the table: removed
// (cell, class) pairs are appended as classes K_r..K-1 so the reported
// coherence, witness and phi* cover the whole table.
BoundResult bound_pipeline(const OccupancyTable& table, std::uint64_t class_count,
                           std::uint64_t class_size, Strategy strategy,
                           const PipelineOptions& options = {});

}  // namespace cbound
