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
#include <string>
#include <string_view>
#include <vector>

namespace cbound {

// Row-major set of equal-length finite vectors with optional class labels.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dimension);

  void add(std::string sample_id, std::span<const double> vector,
           std::optional<std::uint32_t> label = std::nullopt);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::optional<std::uint32_t>& label(std::size_t i) const { return labels_[i]; }

  bool fully_labeled() const;
  // Throws ValidationError unless fully labeled.
  std::vector<std::uint32_t> labels() const;

 private:
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::vector<std::optional<std::uint32_t>> labels_;
};

struct Representative {
  std::uint32_t cls = 0;
  std::vector<std::vector<double>> vectors;  // at least one
};

// Entry j is output label j.
struct RepresentativeSet {
  std::vector<Representative> entries;

  std::size_t size() const noexcept { return entries.size(); }
  void validate(std::size_t dimension) const;
};

enum class LearnerKind { identity, pair_projection, coordinate_subset };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view text);

class DerivedLearner {
 public:
  static DerivedLearner identity(std::size_t dimension);
  // One output coordinate per (a, b) pair: <v - (a+b)/2, (b-a)/|b-a|> / |b-a|.
  static DerivedLearner pair_projection(std::size_t dimension,
                                        std::span<const std::vector<double>> first,
                                        std::span<const std::vector<double>> second);
  static DerivedLearner coordinate_subset(std::size_t dimension,
                                          std::vector<std::size_t> coordinates);

  LearnerKind kind() const noexcept { return kind_; }
  std::size_t input_dimension() const noexcept { return input_dimension_; }
  std::size_t output_dimension() const noexcept;
  const std::vector<std::size_t>& coordinates() const noexcept { return coordinates_; }

  std::vector<double> apply(std::span<const double> v) const;
  void apply_into(std::span<const double> v, std::span<double> out) const;

  friend bool operator==(const DerivedLearner&, const DerivedLearner&) = default;

 private:
  LearnerKind kind_ = LearnerKind::identity;
  std::size_t input_dimension_ = 0;
  std::vector<std::vector<double>> midpoints_;
  std::vector<std::vector<double>> directions_;  // unit length
  std::vector<double> lengths_;
  std::vector<std::size_t> coordinates_;
};

// Class k -> e_k in R^K.
std::vector<std::vector<double>> one_hot_learner(std::span<const std::uint32_t> classes,
                                                 std::uint32_t class_count);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Label of the nearest transformed representative (min over each entry's
// vectors); ties resolve to the lowest entry index.
std::vector<Label> nearest_representative_classify(const EmbeddingSet& embeddings,
                                                   const RepresentativeSet& reps,
                                                   const DerivedLearner& learner);

DerivedLearner derive_pair_projection(const EmbeddingSet& embeddings, std::size_t pair_count,
                                      std::uint64_t seed);

DerivedLearner derive_coordinate_subset(std::size_t dimension, std::size_t subset_size,
                                        std::uint64_t seed);

// `count` distinct classes drawn uniformly from those present, ascending.
std::vector<std::uint32_t> choose_classes(const EmbeddingSet& embeddings, std::size_t count,
                                          std::uint64_t seed);

// `per_class` distinct random samples of each listed class (fewer if the
// class is smaller).
RepresentativeSet choose_representatives(const EmbeddingSet& embeddings,
                                         std::span<const std::uint32_t> classes,
                                         std::size_t per_class, std::uint64_t seed);

// Unordered different-class pairs that both classifiers put together.
// Grouped by joint cell; never enumerates pairs.
std::uint64_t false_same_count(std::span<const Label> predictions_a,
                               std::span<const Label> predictions_b,
                               std::span<const std::uint32_t> labels);

// Unordered same-class pairs that both classifiers put together.
std::uint64_t true_same_count(std::span<const Label> predictions_a,
                              std::span<const Label> predictions_b,
                              std::span<const std::uint32_t> labels);

// Fraction of samples whose predicted label is the most common prediction for
// their class: the single-classifier accuracy under the best class-to-label
// map.
double label_consistency_accuracy(std::span<const Label> predictions,
                                  std::span<const std::uint32_t> labels);

struct GaussianClusterConfig {
  std::size_t dimension = 16;
  std::uint32_t class_count = 50;
  std::uint32_t class_size = 20;
  // Root-mean-square per-coordinate distance between two class means, in
  // units of sigma. Means are drawn from N(0, (separation * sigma)^2 / 2).
  double separation = 6.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

struct GaussianClusters {
  EmbeddingSet embeddings;
  std::vector<std::vector<double>> means;
};

GaussianClusters make_gaussian_clusters(const GaussianClusterConfig& config);

struct LearnerSpec {
  std::string name;
  LearnerKind kind = LearnerKind::coordinate_subset;
  std::size_t dims = 0;            // d'; ignored for identity
  std::size_t reps_per_class = 1;  // the multi-representative variant uses > 1
  std::uint64_t seed = 0;
};

struct StudyRow {
  std::size_t pair = 0;
  std::size_t learner_a = 0;
  std::size_t learner_b = 0;
  std::uint64_t mistake_bound = 0;
  std::uint64_t coherence = 0;
  std::uint64_t false_same = 0;
  std::uint64_t true_same = 0;
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  double diagonal_mass = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;  // sorted by pair id
  std::vector<double> accuracies;
  std::vector<std::uint32_t> representative_classes;
  // false_same regressed on mistake_bound
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
};

// Classifies with every learner, then for each unordered learner pair builds
// the two-classifier table, runs the greedy bound and counts false-same
// pairs. K is N / S.
StudyResult pairwise_ensemble_study(const EmbeddingSet& embeddings,
                                    std::span<const LearnerSpec> learners, std::size_t label_count,
                                    std::uint64_t class_size, std::uint64_t seed,
                                    std::size_t threads = 1);

}  // namespace cbound
