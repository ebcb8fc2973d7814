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

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace cbound {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

// C(n, k), saturating.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // result * (n - k + i) is always divisible by i; saturate on overflow.
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (result > kSaturated / (n - k + i)) return kSaturated;
    result = result * (n - k + i) / i;
  }
  return result;
}

std::uint64_t sum_of_squares(const AssignmentMatrix& m) {
  std::uint64_t total = 0;
  for (const auto& e : m.entries) total += e.count * e.count;
  return total;
}

std::uint64_t sum_of_row_maxima(const AssignmentMatrix& m, std::span<const std::size_t> phi) {
  std::uint64_t total = 0;
  std::size_t e = 0;
  for (std::uint64_t k = 0; k < m.class_count(); ++k) {
    while (e < m.entries.size() && m.entries[e].cls == k) {
      if (m.entries[e].cell == phi[k]) total += m.entries[e].count;
      ++e;
    }
  }
  return total;
}

void require_uniform(const InstanceSpec& spec, std::string_view solver) {
  if (!spec.class_sizes.empty()) {
    throw ValidationError(std::string(solver) +
                          " supports only a uniform class size; use bruteforce");
  }
}

void require_feasible(const InstanceSpec& spec) {
  auto rows = spec.row_sizes();
  std::uint64_t row_total = std::accumulate(rows.begin(), rows.end(), std::uint64_t{0});
  if (row_total != spec.reduced_total()) {
    std::ostringstream msg;
    msg << "infeasible instance: cells hold " << spec.reduced_total()
        << " samples but classes hold " << row_total;
    throw ValidationError(msg.str());
  }
}

BoundResult finish(AssignmentMatrix witness, SolverKind solver, bool exact) {
  witness.normalize();
  BoundResult result;
  result.coherence = sum_of_squares(witness);
  result.phi_star = phi_star_of(witness);
  std::uint64_t total = std::accumulate(witness.class_sizes.begin(), witness.class_sizes.end(),
                                        std::uint64_t{0});
  result.mistake_bound = total - sum_of_row_maxima(witness, result.phi_star);
  result.witness = std::move(witness);
  result.solver = solver;
  result.exact = exact;
  return result;
}

AssignmentMatrix empty_witness(const InstanceSpec& spec) {
  AssignmentMatrix m;
  m.class_sizes = spec.row_sizes();
  m.cell_sizes = spec.reduced_cell_sizes;
  return m;
}

}  // namespace

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::bruteforce: return "bruteforce";
    case SolverKind::exact_dp: return "exact_dp";
    case SolverKind::greedy: return "greedy";
  }
  return "unknown";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::automatic: return "auto";
    case Strategy::bruteforce: return "bruteforce";
    case Strategy::exact_dp: return "dp";
    case Strategy::greedy: return "greedy";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "auto") return Strategy::automatic;
  if (text == "bruteforce") return Strategy::bruteforce;
  if (text == "dp" || text == "exact_dp") return Strategy::exact_dp;
  if (text == "greedy") return Strategy::greedy;
  throw ValidationError("unknown solver '" + std::string(text) +
                        "' (expected auto, bruteforce, dp or greedy)");
}

void AssignmentMatrix::normalize() {
  auto strictly_before = [](const AssignmentEntry& a, const AssignmentEntry& b) {
    return std::tie(a.cls, a.cell) < std::tie(b.cls, b.cell);
  };
  bool already = std::all_of(entries.begin(), entries.end(),
                             [](const AssignmentEntry& e) { return e.count != 0; });
  for (std::size_t i = 1; already && i < entries.size(); ++i) {
    already = strictly_before(entries[i - 1], entries[i]);
  }
  if (already) return;

  const bool in_range = std::all_of(entries.begin(), entries.end(), [&](const AssignmentEntry& e) {
    return e.cls < class_sizes.size() && e.cell < cell_sizes.size();
  });
  if (in_range) {
    // Bucket by class, then order each (short) class run by cell.
    std::vector<std::size_t> starts(class_sizes.size() + 1, 0);
    for (const auto& e : entries) ++starts[e.cls + 1];
    for (std::size_t k = 1; k < starts.size(); ++k) starts[k] += starts[k - 1];
    std::vector<AssignmentEntry> sorted(entries.size());
    std::vector<std::size_t> next(starts.begin(), starts.end() - 1);
    for (const auto& e : entries) sorted[next[e.cls]++] = e;
    for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
      for (std::size_t i = starts[k] + 1; i < starts[k + 1]; ++i) {
        AssignmentEntry e = sorted[i];
        std::size_t j = i;
        for (; j > starts[k] && e.cell < sorted[j - 1].cell; --j) sorted[j] = sorted[j - 1];
        sorted[j] = e;
      }
    }
    entries = std::move(sorted);
  } else {
    std::sort(entries.begin(), entries.end(), strictly_before);
  }
  std::size_t kept = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const AssignmentEntry e = entries[i];
    if (e.count == 0) continue;
    if (kept > 0 && entries[kept - 1].cls == e.cls && entries[kept - 1].cell == e.cell) {
      entries[kept - 1].count += e.count;
    } else {
      entries[kept++] = e;
    }
  }
  entries.resize(kept);
}

void AssignmentMatrix::validate() const {
  std::vector<std::uint64_t> rows(class_sizes.size(), 0);
  std::vector<std::uint64_t> cols(cell_sizes.size(), 0);
  for (const auto& e : entries) {
    if (e.cls >= rows.size() || e.cell >= cols.size()) {
      std::ostringstream msg;
      msg << "assignment entry (class " << e.cls << ", cell " << e.cell << ") is out of range";
      throw ValidationError(msg.str());
    }
    if (e.count == 0) throw ValidationError("assignment entries must be positive");
    rows[e.cls] += e.count;
    cols[e.cell] += e.count;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] != class_sizes[k]) {
      std::ostringstream msg;
      msg << "row marginal violated: class " << k << " holds " << rows[k] << ", expected "
          << class_sizes[k];
      throw ValidationError(msg.str());
    }
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] != cell_sizes[i]) {
      std::ostringstream msg;
      msg << "column marginal violated: cell " << i << " holds " << cols[i] << ", expected "
          << cell_sizes[i];
      throw ValidationError(msg.str());
    }
  }
}

std::vector<std::vector<std::uint64_t>> AssignmentMatrix::dense() const {
  std::vector<std::vector<std::uint64_t>> rows(class_sizes.size(),
                                               std::vector<std::uint64_t>(cell_sizes.size(), 0));
  for (const auto& e : entries) rows.at(e.cls).at(e.cell) += e.count;
  return rows;
}

AssignmentMatrix AssignmentMatrix::from_dense(const std::vector<std::vector<std::uint64_t>>& rows,
                                              std::vector<std::uint64_t> cell_sizes) {
  AssignmentMatrix m;
  m.cell_sizes = std::move(cell_sizes);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != m.cell_sizes.size()) {
      throw ValidationError("dense assignment row has the wrong number of cells");
    }
    m.class_sizes.push_back(std::accumulate(rows[k].begin(), rows[k].end(), std::uint64_t{0}));
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      if (rows[k][i] > 0) m.entries.push_back({k, i, rows[k][i]});
    }
  }
  return m;
}

std::uint64_t coherence_of(const AssignmentMatrix& assignment) {
  assignment.validate();
  return sum_of_squares(assignment);
}

std::vector<std::size_t> phi_star_of(const AssignmentMatrix& assignment) {
  std::vector<std::size_t> phi(assignment.class_count(), 0);
  std::vector<std::uint64_t> best(assignment.class_count(), 0);
  for (const auto& e : assignment.entries) {
    // Entries are sorted by cell within a class, so strict > keeps the
    // earliest argmax.
    if (e.count > best.at(e.cls)) {
      best[e.cls] = e.count;
      phi[e.cls] = e.cell;
    }
  }
  return phi;
}

bool within_limits(const InstanceSpec& spec, const BruteforceLimits& limits) {
  return spec.reduced_class_count <= limits.max_classes && spec.largest_cell() <= limits.max_cell &&
         spec.reduced_total() <= limits.max_total;
}

std::uint64_t estimate_enumeration(const InstanceSpec& spec) {
  if (spec.reduced_class_count == 0) return 1;
  std::uint64_t leaves = 1;
  for (std::uint64_t c : spec.reduced_cell_sizes) {
    leaves = saturating_mul(leaves, binomial(c + spec.reduced_class_count - 1,
                                             spec.reduced_class_count - 1));
  }
  return leaves;
}

namespace {

// Depth-first enumeration, one cell at a time, of every way to split the
// cell among the classes that still have room.
class Enumerator {
 public:
  explicit Enumerator(const InstanceSpec& spec)
      : cells_(spec.reduced_cell_sizes),
        caps_(spec.row_sizes()),
        classes_(caps_.size()),
        total_(spec.reduced_total()),
        current_(classes_ * cells_.size(), 0),
        row_max_(classes_, 0) {}

  void run() { visit_cell(0, 0); }

  std::uint64_t best_coherence = 0;
  std::uint64_t best_row_max_sum = 0;
  std::uint64_t min_mistakes = kSaturated;
  std::vector<std::uint64_t> best;  // class-major dense matrix
  bool found = false;

 private:
  void visit_cell(std::size_t cell, std::uint64_t coherence) {
    if (cell == cells_.size()) {
      std::uint64_t row_max_sum = std::accumulate(row_max_.begin(), row_max_.end(),
                                                  std::uint64_t{0});
      min_mistakes = std::min(min_mistakes, total_ - row_max_sum);
      if (!found || coherence > best_coherence ||
          (coherence == best_coherence && row_max_sum > best_row_max_sum)) {
        found = true;
        best_coherence = coherence;
        best_row_max_sum = row_max_sum;
        best = current_;
      }
      return;
    }
    // Classes k-1 and k in the same state (capacity and running row max)
    // have interchangeable futures, so only non-increasing shares between
    // them are explored.
    std::vector<bool> tied(classes_, false);
    for (std::size_t k = 1; k < classes_; ++k) {
      tied[k] = caps_[k] == caps_[k - 1] && row_max_[k] == row_max_[k - 1];
    }
    std::vector<std::uint64_t> suffix(classes_ + 1, 0);
    for (std::size_t k = classes_; k-- > 0;) suffix[k] = suffix[k + 1] + caps_[k];
    split(cell, 0, cells_[cell], coherence, tied, suffix, kSaturated);
  }

  void split(std::size_t cell, std::size_t k, std::uint64_t remaining, std::uint64_t coherence,
             const std::vector<bool>& tied, const std::vector<std::uint64_t>& suffix,
             std::uint64_t previous_share) {
    if (k == classes_) {
      if (remaining == 0) visit_cell(cell + 1, coherence);
      return;
    }
    std::uint64_t hi = std::min(remaining, caps_[k]);
    if (tied[k]) hi = std::min(hi, previous_share);
    std::uint64_t rest = suffix[k + 1];
    std::uint64_t lo = remaining > rest ? remaining - rest : 0;
    if (k + 1 == classes_) lo = remaining;
    for (std::uint64_t h = hi + 1; h-- > lo;) {
      std::uint64_t saved_max = row_max_[k];
      caps_[k] -= h;
      row_max_[k] = std::max(row_max_[k], h);
      current_[k * cells_.size() + cell] = h;
      split(cell, k + 1, remaining - h, coherence + h * h, tied, suffix, h);
      current_[k * cells_.size() + cell] = 0;
      row_max_[k] = saved_max;
      caps_[k] += h;
    }
  }

  std::vector<std::uint64_t> cells_;
  std::vector<std::uint64_t> caps_;
  std::size_t classes_;
  std::uint64_t total_;
  std::vector<std::uint64_t> current_;
  std::vector<std::uint64_t> row_max_;
};

}  // namespace

BoundResult solve_bruteforce(const InstanceSpec& spec, const BruteforceLimits& limits) {
  require_feasible(spec);
  if (!within_limits(spec, limits)) {
    std::ostringstream msg;
    msg << "bruteforce guard exceeded (K_r = " << spec.reduced_class_count
        << ", C_m = " << spec.largest_cell() << ", K_r * S = " << spec.reduced_total()
        << "; limits " << limits.max_classes << ", " << limits.max_cell << ", "
        << limits.max_total << "); estimated enumeration size " << estimate_enumeration(spec);
    throw ResourceError(msg.str(), estimate_enumeration(spec));
  }
  AssignmentMatrix witness = empty_witness(spec);
  if (spec.reduced_class_count == 0) {
    BoundResult result = finish(std::move(witness), SolverKind::bruteforce, true);
    result.oracle_min_mistakes = 0;
    return result;
  }
  Enumerator search(spec);
  search.run();
  if (!search.found) throw ValidationError("instance admits no feasible assignment");
  const std::size_t n_cells = spec.reduced_cell_sizes.size();
  for (std::size_t k = 0; k < witness.class_sizes.size(); ++k) {
    for (std::size_t i = 0; i < n_cells; ++i) {
      if (auto h = search.best[k * n_cells + i]; h > 0) witness.entries.push_back({k, i, h});
    }
  }
  BoundResult result = finish(std::move(witness), SolverKind::bruteforce, true);
  result.oracle_min_mistakes = search.min_mistakes;
  return result;
}

namespace {

// Remaining capacities sorted in descending order; the smallest is implied
// by the remaining cell mass and is dropped from the key.
using DpKey = std::vector<std::uint64_t>;

struct DpNode {
  std::uint64_t value = 0;              // best coherence over cells [0, layer)
  const DpKey* parent = nullptr;        // key in the previous layer
  std::vector<std::uint64_t> split;     // parent's canonical order
};

std::uint64_t dp_record_bytes(std::uint64_t classes) {
  // map node overhead + key payload + node payload
  return 64 + 8 * (classes > 0 ? classes - 1 : 0) + sizeof(DpNode) + 8 * classes;
}

}  // namespace

std::uint64_t estimate_dp_memory(const InstanceSpec& spec) {
  const std::uint64_t classes = spec.reduced_class_count;
  if (classes == 0) return 0;
  // Multisets of K_r - 1 capacities drawn from [0, S].
  std::uint64_t states_per_layer = binomial(spec.class_size + classes - 1, classes - 1);
  std::uint64_t layers = spec.reduced_cell_sizes.size() + 1;
  return saturating_mul(saturating_mul(states_per_layer, layers), dp_record_bytes(classes));
}

BoundResult solve_exact_dp(const InstanceSpec& spec, std::uint64_t memory_budget) {
  require_uniform(spec, "exact_dp");
  require_feasible(spec);
  const std::size_t classes = spec.reduced_class_count;
  AssignmentMatrix witness = empty_witness(spec);
  if (classes == 0) return finish(std::move(witness), SolverKind::exact_dp, true);

  const std::uint64_t estimate = estimate_dp_memory(spec);
  if (estimate > memory_budget) {
    std::ostringstream msg;
    msg << "exact_dp memory estimate " << estimate << " bytes exceeds the budget of "
        << memory_budget << " bytes; use the greedy solver";
    throw ResourceError(msg.str(), estimate);
  }

  const auto& cells = spec.reduced_cell_sizes;
  const std::size_t n_cells = cells.size();
  std::vector<std::uint64_t> remaining_mass(n_cells + 1, 0);
  for (std::size_t i = n_cells; i-- > 0;) remaining_mass[i] = remaining_mass[i + 1] + cells[i];

  auto expand = [&](const DpKey& key, std::size_t layer) {
    DpKey caps = key;
    std::uint64_t known = std::accumulate(key.begin(), key.end(), std::uint64_t{0});
    caps.push_back(remaining_mass[layer] - known);
    return caps;
  };
  auto canonical = [](std::vector<std::uint64_t> caps) {
    std::sort(caps.begin(), caps.end(), std::greater<>());
    caps.pop_back();
    return caps;
  };

  std::vector<std::map<DpKey, DpNode>> layers(n_cells + 1);
  layers[0].emplace(DpKey(classes - 1, spec.class_size), DpNode{});
  std::uint64_t records = 1;
  const std::uint64_t record_bytes = dp_record_bytes(classes);

  std::vector<std::uint64_t> share(classes, 0);
  for (std::size_t layer = 0; layer < n_cells; ++layer) {
    auto& next = layers[layer + 1];
    for (const auto& [key, node] : layers[layer]) {
      const std::vector<std::uint64_t> caps = expand(key, layer);
      std::vector<std::uint64_t> suffix(classes + 1, 0);
      for (std::size_t k = classes; k-- > 0;) suffix[k] = suffix[k + 1] + caps[k];

      // Enumerate shares in canonical order; equal capacities are
      // interchangeable, so shares between them are non-increasing.
      auto recurse = [&](auto&& self, std::size_t k, std::uint64_t left,
                         std::uint64_t gain) -> void {
        if (k == classes) {
          if (left != 0) return;
          std::vector<std::uint64_t> after(classes);
          for (std::size_t j = 0; j < classes; ++j) after[j] = caps[j] - share[j];
          DpKey child = canonical(std::move(after));
          std::uint64_t value = node.value + gain;
          auto [it, inserted] = next.try_emplace(std::move(child));
          if (inserted) {
            if (++records * record_bytes > memory_budget) {
              throw ResourceError("exact_dp exceeded its memory budget while solving",
                                  records * record_bytes);
            }
          }
          if (inserted || value > it->second.value) {
            it->second.value = value;
            it->second.parent = &key;
            it->second.split = share;
          }
          return;
        }
        std::uint64_t hi = std::min(left, caps[k]);
        if (k > 0 && caps[k] == caps[k - 1]) hi = std::min(hi, share[k - 1]);
        std::uint64_t lo = left > suffix[k + 1] ? left - suffix[k + 1] : 0;
        for (std::uint64_t h = hi + 1; h-- > lo;) {
          share[k] = h;
          self(self, k + 1, left - h, gain + h * h);
        }
        share[k] = 0;
      };
      recurse(recurse, 0, cells[layer], 0);
    }
  }

  if (layers[n_cells].size() != 1) throw ValidationError("instance admits no feasible assignment");

  // Walk back to recover the canonical split of every cell, then replay it
  // forward on the real class order.
  std::vector<std::vector<std::uint64_t>> splits(n_cells);
  const DpNode* node = &layers[n_cells].begin()->second;
  for (std::size_t layer = n_cells; layer-- > 0;) {
    splits[layer] = node->split;
    node = &layers[layer].at(*node->parent);
  }
  std::vector<std::uint64_t> caps(classes, spec.class_size);
  std::vector<std::size_t> order(classes);
  for (std::size_t layer = 0; layer < n_cells; ++layer) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return caps[a] > caps[b]; });
    for (std::size_t j = 0; j < classes; ++j) {
      std::uint64_t h = splits[layer][j];
      if (h == 0) continue;
      caps[order[j]] -= h;
      witness.entries.push_back({order[j], layer, h});
    }
  }
  return finish(std::move(witness), SolverKind::exact_dp, true);
}

BoundResult solve_greedy(const InstanceSpec& spec, SizeOrdering ordering) {
  require_uniform(spec, "greedy");
  require_feasible(spec);
  const std::uint64_t classes = spec.reduced_class_count;
  const std::uint64_t class_size = spec.class_size;
  AssignmentMatrix witness = empty_witness(spec);
  if (classes * class_size == 0) return finish(std::move(witness), SolverKind::greedy, true);

  const auto& cells = spec.reduced_cell_sizes;
  std::vector<std::size_t> order;
  order.reserve(cells.size());
  if (ordering == SizeOrdering::counting_sort) {
    // Sizes are bounded by K_r * S, so bucketing is linear.
    const std::uint64_t largest = spec.largest_cell();
    std::vector<std::size_t> starts(largest + 2, 0);
    for (std::uint64_t c : cells) ++starts[largest - c + 1];
    for (std::size_t b = 1; b < starts.size(); ++b) starts[b] += starts[b - 1];
    order.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) order[starts[largest - cells[i]]++] = i;
  } else {
    order.resize(cells.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a] > cells[b]; });
  }

  // Bucket queue over remaining capacity. Capacities only shrink, so the
  // cursor to the fullest bucket only moves down.
  std::vector<std::vector<std::uint64_t>> buckets(class_size + 1);
  std::vector<std::size_t> heads(class_size + 1, 0);
  buckets[class_size].resize(classes);
  std::iota(buckets[class_size].begin(), buckets[class_size].end(), std::uint64_t{0});
  std::uint64_t fullest = class_size;
  witness.entries.reserve(cells.size() + classes);
  for (std::size_t i : order) {
    std::uint64_t left = cells[i];
    while (left > 0) {
      while (heads[fullest] == buckets[fullest].size()) --fullest;
      std::uint64_t k = buckets[fullest][heads[fullest]++];
      std::uint64_t take = std::min(left, fullest);
      witness.entries.push_back({k, i, take});
      left -= take;
      if (fullest - take > 0) buckets[fullest - take].push_back(k);
    }
  }
  return finish(std::move(witness), SolverKind::greedy, false);
}

std::uint64_t mistake_bound_of(const BoundResult& result, const InstanceSpec& spec) {
  const auto& witness = result.witness;
  witness.validate();
  std::uint64_t total = std::accumulate(witness.class_sizes.begin(), witness.class_sizes.end(),
                                        std::uint64_t{0});
  // Either the reduced instance itself or its lift onto the whole table.
  if (total != spec.reduced_total() &&
      total != spec.reduced_total() + spec.removed_pairs * spec.class_size) {
    throw ValidationError("witness does not belong to this instance");
  }
  if (result.phi_star.size() != witness.class_count()) {
    throw ValidationError("phi* does not cover every class of the witness");
  }
  return total - sum_of_row_maxima(witness, result.phi_star);
}

BoundResult bound_pipeline(const OccupancyTable& table, std::uint64_t class_count,
                           std::uint64_t class_size, Strategy strategy,
                           const PipelineOptions& options) {
  if (table.empty()) throw ValidationError("occupancy table is empty");
  InstanceSpec spec = reduce_instance(table, class_count, class_size);

  BoundResult reduced;
  switch (strategy) {
    case Strategy::bruteforce: reduced = solve_bruteforce(spec, options.limits); break;
    case Strategy::exact_dp: reduced = solve_exact_dp(spec, options.memory_budget); break;
    case Strategy::greedy: reduced = solve_greedy(spec); break;
    case Strategy::automatic:
      if (within_limits(spec, options.limits)) {
        reduced = solve_bruteforce(spec, options.limits);
      } else if (estimate_dp_memory(spec) <= options.memory_budget) {
        reduced = solve_exact_dp(spec, options.memory_budget);
      } else {
        reduced = solve_greedy(spec);
      }
      break;
  }

  AssignmentMatrix lifted;
  lifted.class_sizes.assign(class_count, class_size);
  lifted.cell_sizes.reserve(table.size());
  for (const auto& cell : table.cells()) lifted.cell_sizes.push_back(cell.count);
  lifted.entries.reserve(reduced.witness.entries.size() + spec.removed_pairs);
  for (const auto& e : reduced.witness.entries) {
    lifted.entries.push_back({e.cls, spec.reduced_cell_origin[e.cell], e.count});
  }
  for (std::size_t j = 0; j < spec.removed_cell_origin.size(); ++j) {
    lifted.entries.push_back({spec.reduced_class_count + j, spec.removed_cell_origin[j],
                              class_size});
  }

  BoundResult result = finish(std::move(lifted), reduced.solver, reduced.exact);
  result.mistake_bound = mistake_bound_of(result, spec);
  result.oracle_min_mistakes = reduced.oracle_min_mistakes;
  result.cell_arity = table.arity();
  result.cell_coords.reserve(table.size() * table.arity());
  for (const auto& cell : table.cells()) {
    result.cell_coords.insert(result.cell_coords.end(), cell.coords.begin(), cell.coords.end());
  }
  return result;
}

}  // namespace cbound
