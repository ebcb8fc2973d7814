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

#include <cbound/metric_classifiers.hpp>

#include <cbound/bound_solvers.hpp>
#include <cbound/error.hpp>
#include <cbound/parallel.hpp>
#include <cbound/rng.hpp>
#include <cbound/stats.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace cbound {

EmbeddingSet::EmbeddingSet(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingSet::add(std::string sample_id, std::span<const double> vector,
                       std::optional<std::uint32_t> label) {
  if (vector.size() != dimension_) {
    std::ostringstream msg;
    msg << "sample '" << sample_id << "' has dimension " << vector.size() << ", expected "
        << dimension_;
    throw ValidationError(msg.str());
  }
  for (double x : vector) {
    if (!std::isfinite(x)) throw ValidationError("sample '" + sample_id + "' is not finite");
  }
  ids_.push_back(std::move(sample_id));
  data_.insert(data_.end(), vector.begin(), vector.end());
  labels_.push_back(label);
}

bool EmbeddingSet::fully_labeled() const {
  return std::all_of(labels_.begin(), labels_.end(), [](const auto& l) { return l.has_value(); });
}

std::vector<std::uint32_t> EmbeddingSet::labels() const {
  std::vector<std::uint32_t> out;
  out.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!labels_[i]) throw ValidationError("sample '" + ids_[i] + "' has no label");
    out.push_back(*labels_[i]);
  }
  return out;
}

void RepresentativeSet::validate(std::size_t dimension) const {
  if (entries.empty()) throw ValidationError("representative set is empty");
  std::vector<std::uint32_t> classes;
  for (const auto& entry : entries) {
    if (entry.vectors.empty()) throw ValidationError("representative entry has no vectors");
    for (const auto& v : entry.vectors) {
      if (v.size() != dimension) throw ValidationError("representative has the wrong dimension");
    }
    classes.push_back(entry.cls);
  }
  std::sort(classes.begin(), classes.end());
  if (std::adjacent_find(classes.begin(), classes.end()) != classes.end()) {
    throw ValidationError("representative classes must be distinct");
  }
}

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::identity: return "identity";
    case LearnerKind::pair_projection: return "pair_projection";
    case LearnerKind::coordinate_subset: return "coordinate_subset";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(std::string_view text) {
  if (text == "identity") return LearnerKind::identity;
  if (text == "pair_projection") return LearnerKind::pair_projection;
  if (text == "coordinate_subset") return LearnerKind::coordinate_subset;
  throw ValidationError("unknown learner kind '" + std::string(text) + "'");
}

DerivedLearner DerivedLearner::identity(std::size_t dimension) {
  DerivedLearner learner;
  learner.kind_ = LearnerKind::identity;
  learner.input_dimension_ = dimension;
  return learner;
}

DerivedLearner DerivedLearner::pair_projection(std::size_t dimension,
                                               std::span<const std::vector<double>> first,
                                               std::span<const std::vector<double>> second) {
  if (first.size() != second.size() || first.empty()) {
    throw ValidationError("pair projection needs matching, non-empty endpoint lists");
  }
  DerivedLearner learner;
  learner.kind_ = LearnerKind::pair_projection;
  learner.input_dimension_ = dimension;
  for (std::size_t j = 0; j < first.size(); ++j) {
    const auto& a = first[j];
    const auto& b = second[j];
    if (a.size() != dimension || b.size() != dimension) {
      throw ValidationError("pair projection endpoint has the wrong dimension");
    }
    std::vector<double> mid(dimension), dir(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
      mid[i] = 0.5 * (a[i] + b[i]);
      dir[i] = b[i] - a[i];
    }
    double length = std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0));
    if (length == 0.0) throw ValidationError("pair projection endpoints coincide");
    for (double& x : dir) x /= length;
    learner.midpoints_.push_back(std::move(mid));
    learner.directions_.push_back(std::move(dir));
    learner.lengths_.push_back(length);
  }
  return learner;
}

DerivedLearner DerivedLearner::coordinate_subset(std::size_t dimension,
                                                 std::vector<std::size_t> coordinates) {
  if (coordinates.empty()) throw ValidationError("coordinate subset is empty");
  std::sort(coordinates.begin(), coordinates.end());
  if (std::adjacent_find(coordinates.begin(), coordinates.end()) != coordinates.end() ||
      coordinates.back() >= dimension) {
    throw ValidationError("coordinate subset must hold distinct indices below the dimension");
  }
  DerivedLearner learner;
  learner.kind_ = LearnerKind::coordinate_subset;
  learner.input_dimension_ = dimension;
  learner.coordinates_ = std::move(coordinates);
  return learner;
}

std::size_t DerivedLearner::output_dimension() const noexcept {
  switch (kind_) {
    case LearnerKind::identity: return input_dimension_;
    case LearnerKind::pair_projection: return lengths_.size();
    case LearnerKind::coordinate_subset: return coordinates_.size();
  }
  return 0;
}

void DerivedLearner::apply_into(std::span<const double> v, std::span<double> out) const {
  if (v.size() != input_dimension_ || out.size() != output_dimension()) {
    throw ValidationError("learner applied to a vector of the wrong dimension");
  }
  switch (kind_) {
    case LearnerKind::identity:
      std::copy(v.begin(), v.end(), out.begin());
      break;
    case LearnerKind::pair_projection:
      for (std::size_t j = 0; j < lengths_.size(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          dot += (v[i] - midpoints_[j][i]) * directions_[j][i];
        }
        out[j] = dot / lengths_[j];
      }
      break;
    case LearnerKind::coordinate_subset:
      for (std::size_t j = 0; j < coordinates_.size(); ++j) out[j] = v[coordinates_[j]];
      break;
  }
}

std::vector<double> DerivedLearner::apply(std::span<const double> v) const {
  std::vector<double> out(output_dimension());
  apply_into(v, out);
  return out;
}

std::vector<std::vector<double>> one_hot_learner(std::span<const std::uint32_t> classes,
                                                 std::uint32_t class_count) {
  std::vector<std::vector<double>> out;
  out.reserve(classes.size());
  for (std::uint32_t k : classes) {
    if (k >= class_count) {
      std::ostringstream msg;
      msg << "class " << k << " is outside [0, " << class_count << ")";
      throw ValidationError(msg.str());
    }
    std::vector<double> e(class_count, 0.0);
    e[k] = 1.0;
    out.push_back(std::move(e));
  }
  return out;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("distance between vectors of different size");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss);
}

std::vector<Label> nearest_representative_classify(const EmbeddingSet& embeddings,
                                                   const RepresentativeSet& reps,
                                                   const DerivedLearner& learner) {
  reps.validate(embeddings.dimension());
  if (learner.input_dimension() != embeddings.dimension()) {
    throw ValidationError("learner does not match the embedding dimension");
  }
  const std::size_t out_dim = learner.output_dimension();

  // (entry, transformed vector), flattened.
  std::vector<std::size_t> owner;
  std::vector<double> points;
  for (std::size_t j = 0; j < reps.size(); ++j) {
    for (const auto& v : reps.entries[j].vectors) {
      owner.push_back(j);
      auto t = learner.apply(v);
      points.insert(points.end(), t.begin(), t.end());
    }
  }

  std::vector<Label> labels(embeddings.size());
  std::vector<double> x(out_dim);
  for (std::size_t s = 0; s < embeddings.size(); ++s) {
    learner.apply_into(embeddings.row(s), x);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_entry = 0;
    for (std::size_t p = 0; p < owner.size(); ++p) {
      const double* q = points.data() + p * out_dim;
      double ss = 0.0;
      for (std::size_t i = 0; i < out_dim; ++i) ss += (x[i] - q[i]) * (x[i] - q[i]);
      if (ss < best || (ss == best && owner[p] < best_entry)) {
        best = ss;
        best_entry = owner[p];
      }
    }
    labels[s] = static_cast<Label>(best_entry);
  }
  return labels;
}

DerivedLearner derive_pair_projection(const EmbeddingSet& embeddings, std::size_t pair_count,
                                      std::uint64_t seed) {
  constexpr int kRetries = 100;
  const std::size_t n = embeddings.size();
  if (n < 2) throw ValidationError("pair projection needs at least two samples");
  if (pair_count == 0) throw ValidationError("pair projection needs at least one pair");
  Rng rng(seed);
  std::vector<std::vector<double>> first, second;
  for (std::size_t j = 0; j < pair_count; ++j) {
    bool drawn = false;
    for (int attempt = 0; attempt < kRetries && !drawn; ++attempt) {
      std::size_t a = rng.below(n);
      std::size_t b = rng.below(n - 1);
      if (b >= a) ++b;
      auto ra = embeddings.row(a);
      auto rb = embeddings.row(b);
      if (std::equal(ra.begin(), ra.end(), rb.begin())) continue;
      first.emplace_back(ra.begin(), ra.end());
      second.emplace_back(rb.begin(), rb.end());
      drawn = true;
    }
    if (!drawn) {
      throw ValidationError("could not draw a pair of distinct vectors after 100 attempts");
    }
  }
  return DerivedLearner::pair_projection(embeddings.dimension(), first, second);
}

DerivedLearner derive_coordinate_subset(std::size_t dimension, std::size_t subset_size,
                                        std::uint64_t seed) {
  if (subset_size == 0 || subset_size > dimension) {
    std::ostringstream msg;
    msg << "coordinate subset size " << subset_size << " is outside [1, " << dimension << "]";
    throw ValidationError(msg.str());
  }
  Rng rng(seed);
  std::vector<std::size_t> all(dimension);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t j = 0; j < subset_size; ++j) std::swap(all[j], all[j + rng.below(dimension - j)]);
  all.resize(subset_size);
  return DerivedLearner::coordinate_subset(dimension, std::move(all));
}

namespace {

std::map<std::uint32_t, std::vector<std::size_t>> members_by_class(const EmbeddingSet& set) {
  std::map<std::uint32_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.label(i)) members[*set.label(i)].push_back(i);
  }
  return members;
}

std::uint64_t pairs_of(std::uint64_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

void check_same_samples(std::size_t a, std::size_t b, std::size_t labels) {
  if (a != b || a != labels) {
    throw ValidationError("predictions and labels must cover the same samples");
  }
}

// (joint cell, class) groups, sorted.
std::vector<std::pair<std::pair<Label, Label>, std::uint32_t>> joint_groups(
    std::span<const Label> a, std::span<const Label> b, std::span<const std::uint32_t> labels) {
  std::vector<std::pair<std::pair<Label, Label>, std::uint32_t>> keys(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) keys[i] = {{a[i], b[i]}, labels[i]};
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

std::vector<std::uint32_t> choose_classes(const EmbeddingSet& embeddings, std::size_t count,
                                          std::uint64_t seed) {
  auto members = members_by_class(embeddings);
  std::vector<std::uint32_t> classes;
  for (const auto& [cls, _] : members) classes.push_back(cls);
  if (count == 0 || count > classes.size()) {
    std::ostringstream msg;
    msg << "cannot choose " << count << " representative classes out of " << classes.size();
    throw ValidationError(msg.str());
  }
  Rng rng(seed);
  for (std::size_t j = 0; j < count; ++j) {
    std::swap(classes[j], classes[j + rng.below(classes.size() - j)]);
  }
  classes.resize(count);
  std::sort(classes.begin(), classes.end());
  return classes;
}

RepresentativeSet choose_representatives(const EmbeddingSet& embeddings,
                                         std::span<const std::uint32_t> classes,
                                         std::size_t per_class, std::uint64_t seed) {
  if (per_class == 0) throw ValidationError("need at least one representative per class");
  auto members = members_by_class(embeddings);
  Rng rng(seed);
  RepresentativeSet reps;
  for (std::uint32_t cls : classes) {
    auto it = members.find(cls);
    if (it == members.end()) {
      throw ValidationError("class " + std::to_string(cls) + " has no samples");
    }
    auto pool = it->second;
    std::size_t take = std::min(per_class, pool.size());
    Representative entry{cls, {}};
    for (std::size_t j = 0; j < take; ++j) {
      std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
      auto row = embeddings.row(pool[j]);
      entry.vectors.emplace_back(row.begin(), row.end());
    }
    reps.entries.push_back(std::move(entry));
  }
  return reps;
}

std::uint64_t false_same_count(std::span<const Label> predictions_a,
                               std::span<const Label> predictions_b,
                               std::span<const std::uint32_t> labels) {
  check_same_samples(predictions_a.size(), predictions_b.size(), labels.size());
  auto keys = joint_groups(predictions_a, predictions_b, labels);
  // Per joint cell: C(|cell|, 2) - sum_k C(n_k, 2).
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < keys.size()) {
    std::size_t cell_end = i;
    std::uint64_t same_class_pairs = 0;
    while (cell_end < keys.size() && keys[cell_end].first == keys[i].first) {
      std::size_t class_end = cell_end;
      while (class_end < keys.size() && keys[class_end] == keys[cell_end]) ++class_end;
      same_class_pairs += pairs_of(class_end - cell_end);
      cell_end = class_end;
    }
    total += pairs_of(cell_end - i) - same_class_pairs;
    i = cell_end;
  }
  return total;
}

std::uint64_t true_same_count(std::span<const Label> predictions_a,
                              std::span<const Label> predictions_b,
                              std::span<const std::uint32_t> labels) {
  check_same_samples(predictions_a.size(), predictions_b.size(), labels.size());
  auto keys = joint_groups(predictions_a, predictions_b, labels);
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < keys.size()) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    total += pairs_of(j - i);
    i = j;
  }
  return total;
}

double label_consistency_accuracy(std::span<const Label> predictions,
                                  std::span<const std::uint32_t> labels) {
  if (predictions.size() != labels.size()) {
    throw ValidationError("predictions and labels must cover the same samples");
  }
  if (predictions.empty()) return 0.0;
  std::map<std::uint32_t, std::map<Label, std::uint64_t>> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[labels[i]][predictions[i]];
  std::uint64_t hits = 0;
  for (const auto& [_, by_label] : counts) {
    std::uint64_t best = 0;
    for (const auto& [__, n] : by_label) best = std::max(best, n);
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

GaussianClusters make_gaussian_clusters(const GaussianClusterConfig& config) {
  if (config.class_count == 0 || config.class_size == 0) {
    throw ValidationError("Gaussian clusters need positive K and S");
  }
  if (!(config.sigma > 0.0) || !(config.separation >= 0.0)) {
    throw ValidationError("Gaussian clusters need sigma > 0 and separation >= 0");
  }
  Rng rng(config.seed);
  GaussianClusters out{EmbeddingSet(config.dimension), {}};
  const double spread = config.separation * config.sigma / std::sqrt(2.0);
  for (std::uint32_t k = 0; k < config.class_count; ++k) {
    std::vector<double> mean(config.dimension);
    for (double& x : mean) x = spread * rng.normal();
    out.means.push_back(std::move(mean));
  }
  std::vector<double> v(config.dimension);
  std::size_t index = 0;
  for (std::uint32_t k = 0; k < config.class_count; ++k) {
    for (std::uint32_t j = 0; j < config.class_size; ++j) {
      for (std::size_t i = 0; i < config.dimension; ++i) {
        v[i] = out.means[k][i] + config.sigma * rng.normal();
      }
      out.embeddings.add("e" + std::to_string(index++), v, k);
    }
  }
  return out;
}

StudyResult pairwise_ensemble_study(const EmbeddingSet& embeddings,
                                    std::span<const LearnerSpec> learners, std::size_t label_count,
                                    std::uint64_t class_size, std::uint64_t seed,
                                    std::size_t threads) {
  if (learners.size() < 2) throw ValidationError("the study needs at least two learners");
  if (class_size == 0) throw ValidationError("class size must be positive");
  const std::vector<std::uint32_t> labels = embeddings.labels();
  std::map<std::uint32_t, std::uint64_t> class_counts;
  for (auto l : labels) ++class_counts[l];
  for (const auto& [cls, count] : class_counts) {
    if (count != class_size) {
      std::ostringstream msg;
      msg << "class " << cls << " has " << count << " samples; the study needs exactly "
          << class_size << " per class";
      throw ValidationError(msg.str());
    }
  }
  const std::uint64_t class_count = class_counts.size();

  StudyResult study;
  study.representative_classes = choose_classes(embeddings, label_count, derive_seed(seed, 0));

  std::vector<std::vector<Label>> predictions(learners.size());
  study.accuracies.assign(learners.size(), 0.0);
  parallel_for(learners.size(), threads, [&](std::size_t i) {
    const LearnerSpec& spec = learners[i];
    DerivedLearner learner = DerivedLearner::identity(embeddings.dimension());
    switch (spec.kind) {
      case LearnerKind::identity: break;
      case LearnerKind::pair_projection:
        learner = derive_pair_projection(embeddings, spec.dims, spec.seed);
        break;
      case LearnerKind::coordinate_subset:
        learner = derive_coordinate_subset(embeddings.dimension(), spec.dims, spec.seed);
        break;
    }
    RepresentativeSet reps = choose_representatives(embeddings, study.representative_classes,
                                                    spec.reps_per_class,
                                                    derive_seed(spec.seed, 1));
    predictions[i] = nearest_representative_classify(embeddings, reps, learner);
    study.accuracies[i] = label_consistency_accuracy(predictions[i], labels);
  });

  for (std::size_t a = 0; a < learners.size(); ++a) {
    for (std::size_t b = a + 1; b < learners.size(); ++b) {
      study.rows.push_back({study.rows.size(), a, b});
    }
  }
  parallel_for(study.rows.size(), threads, [&](std::size_t r) {
    StudyRow& row = study.rows[r];
    const auto& pa = predictions[row.learner_a];
    const auto& pb = predictions[row.learner_b];
    OccupancyBuilder builder(2, static_cast<Label>(label_count));
    Label cell[2];
    for (std::size_t s = 0; s < pa.size(); ++s) {
      cell[0] = pa[s];
      cell[1] = pb[s];
      builder.add(cell);
    }
    OccupancyTable table = builder.finish();
    BoundResult bound = bound_pipeline(table, class_count, class_size, Strategy::greedy);
    row.mistake_bound = bound.mistake_bound;
    row.coherence = bound.coherence;
    row.false_same = false_same_count(pa, pb, labels);
    row.true_same = true_same_count(pa, pb, labels);
    row.accuracy_a = study.accuracies[row.learner_a];
    row.accuracy_b = study.accuracies[row.learner_b];
    row.diagonal_mass = diagonal_mass(table);
  });

  std::vector<double> xs, ys;
  for (const auto& row : study.rows) {
    xs.push_back(static_cast<double>(row.mistake_bound));
    ys.push_back(static_cast<double>(row.false_same));
  }
  auto fit = stats::linear_fit(xs, ys);
  study.slope = fit.slope;
  study.intercept = fit.intercept;
  study.pearson_r = stats::pearson(xs, ys);
  return study;
}

}  // namespace cbound
