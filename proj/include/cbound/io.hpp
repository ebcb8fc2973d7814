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
#include <cbound/metric_classifiers.hpp>
#include <cbound/mistakes_model.hpp>
#include <cbound/occupancy.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace cbound::io {

using Json = nlohmann::ordered_json;

// Predictions CSV: header "sample_id,label,f_1,...,f_Q", label may be empty.
struct PredictionsFile {
  std::size_t arity = 0;
  std::vector<PredictionRecord> records;

  // 1 + the largest output seen (0 for no records).
  Label inferred_label_count() const;
};

PredictionsFile read_predictions(std::istream& in);
PredictionsFile read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, std::span<const PredictionRecord> records,
                       std::size_t arity);

// {"arity","label_count","total","cells":[{"coords","count"}]}, cells in
// lexicographic order, compact, newline terminated.
std::string occupancy_to_json(const OccupancyTable& table);
OccupancyTable occupancy_from_json(std::string_view text);

Json bound_result_to_json(const BoundResult& result);

// Embeddings CSV: header "sample_id,label,v_0,...,v_{d-1}".
EmbeddingSet read_embeddings_csv(std::istream& in);
void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set);

// Binary layout, little-endian:
//   magic "CBEMB001" (8 bytes), u32 d, u64 count, then per record
//   u32 id length, id bytes, i64 label (-1 when absent), d x f64.
inline constexpr char kEmbeddingMagic[8] = {'C', 'B', 'E', 'M', 'B', '0', '0', '1'};
EmbeddingSet read_embeddings_binary(std::istream& in);
void write_embeddings_binary(std::ostream& out, const EmbeddingSet& set);

// Dispatches on the magic bytes.
EmbeddingSet read_embeddings(const std::filesystem::path& path);

// JSON array of {"name","kind","dims","reps_per_class","seed"}.
std::vector<LearnerSpec> learner_specs_from_json(std::string_view text);
std::vector<LearnerSpec> read_learner_specs(const std::filesystem::path& path);

// m,mean_bound,std_bound,mean_actual,trials,seed,mean_coherence
void write_experiment_csv(std::ostream& out, std::span<const ExperimentRow> rows);
// m,mean_diagonal_mass,mean_bound,std_bound,mean_actual,trials,seed,mean_coherence
void write_correlated_csv(std::ostream& out, std::span<const CorrelatedRow> rows);
// pair,learner_a,learner_b,mistake_bound,coherence,false_same,acc_a,acc_b,true_same,diagonal_mass
void write_study_csv(std::ostream& out, const StudyResult& study,
                     std::span<const LearnerSpec> learners);
Json study_summary_json(const StudyResult& study, std::span<const LearnerSpec> learners);

// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace cbound::io
