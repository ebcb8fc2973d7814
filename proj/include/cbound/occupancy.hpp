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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cbound {

using Label = std::uint32_t;

// Joint output of Q classifiers on one sample. Ordered lexicographically
// (std::vector's operator<), which fixes every iteration order below.
using CellIndex = std::vector<Label>;

struct PredictionRecord {
  std::string sample_id;
  std::vector<Label> outputs;
  // Validation only. Nothing on the bound path reads this.
  std::optional<std::uint32_t> true_label;
};

struct Cell {
  CellIndex coords;
  std::uint64_t count = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Sparse count of samples per joint cell. Immutable once built; cells are
// stored sorted by coords and every stored count is positive.
class OccupancyTable {
 public:
  OccupancyTable(std::size_t arity, Label label_count);

  // Validates and sorts; rejects zero counts, duplicates and out-of-range
  // coordinates.
  static OccupancyTable from_cells(std::size_t arity, Label label_count,
                                   std::vector<Cell> cells);

  std::size_t arity() const noexcept { return arity_; }
  Label label_count() const noexcept { return label_count_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }
  std::span<const Cell> cells() const noexcept { return cells_; }

  // 0 for unoccupied cells.
  std::uint64_t count_of(std::span<const Label> coords) const;

  // Position of `coords` in cells(), if occupied.
  std::optional<std::size_t> position_of(std::span<const Label> coords) const;

  // Per-label histogram of classifier `axis` (sum over the other axes).
  std::vector<std::uint64_t> marginal(std::size_t axis) const;

  friend bool operator==(const OccupancyTable&, const OccupancyTable&) = default;

 private:
  friend class OccupancyBuilder;

  std::size_t arity_;
  Label label_count_;
  std::uint64_t total_ = 0;
  std::vector<Cell> cells_;
};

// Single-pass counter. When L^Q fits in 64 bits cells are keyed by their
// mixed-radix code (which preserves lexicographic order); otherwise by the
// coordinate vector. Small code spaces, relative to `expected_records`, are
// counted in a flat array.
class OccupancyBuilder {
 public:
  static constexpr std::uint64_t kDenseFloor = 1u << 16;
  static constexpr std::uint64_t kDenseCellLimit = 1u << 24;

  OccupancyBuilder(std::size_t arity, Label label_count, std::uint64_t expected_records = 0);

  void add(std::span<const Label> outputs, std::string_view sample_id = {});
  void add(const PredictionRecord& record) { add(record.outputs, record.sample_id); }
  // Row-major block of rows; errors name the row offset within the block.
  void add_rows(std::span<const Label> outputs);

  OccupancyTable finish() const;

 private:
  std::size_t arity_;
  Label label_count_;
  bool packed_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> dense_counts_;
  std::unordered_map<std::uint64_t, std::uint64_t> packed_counts_;
  std::map<CellIndex, std::uint64_t> wide_counts_;
};

OccupancyTable build_occupancy(std::span<const PredictionRecord> records,
                               std::size_t arity, Label label_count);

// Row-major N x Q label matrix; errors name the offending row.
OccupancyTable build_occupancy(std::span<const Label> outputs, std::size_t arity,
                               Label label_count);

// Counts add. Associative and commutative; arity and label count must match.
OccupancyTable merge(const OccupancyTable& a, const OccupancyTable& b);

struct ResolutionAdvisory {
  bool ok = true;
  std::string message;
};

// OK iff L^Q > K strictly; otherwise a perfect classifier pair could fill
// every cell and hide every error.
ResolutionAdvisory check_resolution(std::uint64_t class_count, std::uint64_t arity,
                                    std::uint64_t label_count);

// Solver input: the cell-size multiset left after pairing every size-S cell
// with a class.
struct InstanceSpec {
  std::uint64_t class_count = 0;          // K
  std::uint64_t class_size = 0;           // S
  std::vector<std::uint64_t> reduced_cell_sizes;
  std::uint64_t reduced_class_count = 0;  // K_r
  std::uint64_t removed_pairs = 0;

  // Position in the source table of each reduced cell and of each removed
  // cell. Empty when the instance was built from bare sizes.
  std::vector<std::size_t> reduced_cell_origin;
  std::vector<std::size_t> removed_cell_origin;

  // Experimental per-class sizes (length K_r). Empty means every class has
  // size S. Only solve_bruteforce accepts a non-empty value.
  std::vector<std::uint64_t> class_sizes;

  std::uint64_t reduced_total() const;
  std::uint64_t largest_cell() const;  // C_m
  // Row marginals: class_sizes, or S repeated K_r times.
  std::vector<std::uint64_t> row_sizes() const;
};

// Unreduced instance over bare cell sizes (K classes of size S).
InstanceSpec make_instance(std::vector<std::uint64_t> cell_sizes, std::uint64_t class_count,
                           std::uint64_t class_size);

// Unreduced instance over a table's cells; N must equal K * S.
InstanceSpec make_instance(const OccupancyTable& table, std::uint64_t class_count,
                           std::uint64_t class_size);

// Experimental unequal class sizes; for solve_bruteforce only.
InstanceSpec make_unequal_instance(std::vector<std::uint64_t> cell_sizes,
                                   std::vector<std::uint64_t> class_sizes);

// Removes every remaining cell of size exactly S together with one class.
// Idempotent.
InstanceSpec reduce(const InstanceSpec& spec);

// make_instance + reduce. Throws ValidationError when N != K * S.
InstanceSpec reduce_instance(const OccupancyTable& table, std::uint64_t class_count,
                             std::uint64_t class_size);

// Fraction of samples on the diagonal of a two-classifier table.
double diagonal_mass(const OccupancyTable& table);

}  // namespace cbound
