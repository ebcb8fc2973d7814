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

#include "cli.hpp"

#include <cbound/bound_solvers.hpp>
#include <cbound/error.hpp>
#include <cbound/io.hpp>
#include <cbound/metric_classifiers.hpp>
#include <cbound/mistakes_model.hpp>
#include <cbound/occupancy.hpp>
#include <cbound/parallel.hpp>
#include <cbound/rng.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace cbound::cli {

namespace {

using io::Json;

constexpr const char* kSeedEnv = "CB_ENSEMBLE_SEED";

// Flags shared across subcommands; parsed values land here.
struct RunConfig {
  std::string subcommand;
  std::string predictions;
  std::string embeddings;
  std::string learners;
  std::string out;
  std::string records;
  std::optional<std::uint64_t> classes;
  std::optional<std::uint64_t> class_size;
  std::optional<std::uint32_t> labels;
  std::size_t arity = 2;
  std::string solver = "auto";
  std::optional<std::uint64_t> seed;
  std::string seed_source = "flag";
  std::uint64_t trials = 50;
  std::vector<std::uint64_t> mistakes;
  std::uint64_t memory_budget = kDefaultMemoryBudget;
  std::size_t threads = default_thread_count();
  std::string placement = "injective";
  std::string reroute = "other_class";
  std::optional<double> correlated;
  std::size_t dimension = 16;
  double separation = 4.0;
  bool binary = false;
};

Json config_json(const RunConfig& c) {
  Json doc;
  doc["subcommand"] = c.subcommand;
  auto put_path = [&](const char* key, const std::string& value) {
    if (!value.empty()) doc[key] = value;
  };
  put_path("predictions", c.predictions);
  put_path("embeddings", c.embeddings);
  put_path("learners", c.learners);
  put_path("out", c.out);
  put_path("records", c.records);
  if (c.classes) doc["classes"] = *c.classes;
  if (c.class_size) doc["class_size"] = *c.class_size;
  if (c.labels) doc["labels"] = *c.labels;
  if (c.subcommand == "simulate" || c.subcommand == "plant") doc["arity"] = c.arity;
  doc["solver"] = c.solver;
  if (c.seed) {
    doc["seed"] = *c.seed;
    doc["seed_source"] = c.seed_source;
  }
  if (c.subcommand == "simulate") {
    doc["trials"] = c.trials;
    doc["mistakes"] = c.mistakes;
    doc["placement"] = c.placement;
    doc["reroute"] = c.reroute;
    if (c.correlated) doc["agreement"] = *c.correlated;
  }
  if (c.subcommand == "gen-embeddings") {
    doc["dimension"] = c.dimension;
    doc["separation"] = c.separation;
    doc["binary"] = c.binary;
  }
  doc["memory_budget"] = c.memory_budget;
  doc["threads"] = c.threads;
  return doc;
}

// --seed, else CB_ENSEMBLE_SEED, else a fresh random seed echoed to stderr.
void resolve_seed(RunConfig& c, std::ostream& err) {
  if (c.seed) {
    c.seed_source = "flag";
    return;
  }
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    auto value = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
      throw ValidationError(std::string(kSeedEnv) + " is not an unsigned integer");
    }
    c.seed = value;
    c.seed_source = "env";
    return;
  }
  std::random_device device;
  c.seed = (static_cast<std::uint64_t>(device()) << 32) | device();
  c.seed_source = "generated";
  err << "cbound: using generated seed " << *c.seed << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  return out;
}

void write_sidecar(const RunConfig& c) {
  auto out = open_output(c.out + ".config.json");
  out << config_json(c).dump(2) << '\n';
}

Placement parse_placement(const std::string& text) {
  if (text == "injective") return Placement::injective;
  if (text == "independent") return Placement::independent;
  throw ValidationError("unknown placement '" + text + "'");
}

Reroute parse_reroute(const std::string& text) {
  if (text == "other_class") return Reroute::other_class;
  if (text == "uniform_cell") return Reroute::uniform_cell;
  throw ValidationError("unknown reroute mode '" + text + "'");
}

OccupancyTable table_from_predictions(RunConfig& c, std::ostream& err) {
  io::PredictionsFile file = io::read_predictions(c.predictions);
  if (!c.labels) {
    Label inferred = file.inferred_label_count();
    c.labels = inferred == 0 ? 1 : inferred;
    err << "cbound: label count inferred as " << *c.labels << '\n';
  }
  return build_occupancy(file.records, file.arity, *c.labels);
}

int cmd_bound(RunConfig& c, std::ostream& out, std::ostream& err) {
  OccupancyTable table = table_from_predictions(c, err);
  if (!c.classes) {
    if (table.total() % *c.class_size != 0) {
      std::ostringstream msg;
      msg << "N = " << table.total() << " is not a multiple of S = " << *c.class_size
          << "; pass --classes";
      throw ValidationError(msg.str());
    }
    c.classes = table.total() / *c.class_size;
    err << "cbound: class count taken as N / S = " << *c.classes << '\n';
  }
  auto advisory = check_resolution(*c.classes, table.arity(), table.label_count());
  if (!advisory.ok) err << "cbound: " << advisory.message << '\n';

  PipelineOptions options;
  options.memory_budget = c.memory_budget;
  BoundResult result =
      bound_pipeline(table, *c.classes, *c.class_size, parse_strategy(c.solver), options);
  Json doc = io::bound_result_to_json(result);
  doc["config"] = config_json(c);
  out << doc.dump() << '\n';
  if (!c.out.empty()) {
    auto file = open_output(c.out);
    file << doc.dump(2) << '\n';
  }
  return kOk;
}

int cmd_occupancy(RunConfig& c, std::ostream& out, std::ostream& err) {
  OccupancyTable table = table_from_predictions(c, err);
  std::string json = io::occupancy_to_json(table);
  if (c.out.empty()) {
    out << json;
  } else {
    auto file = open_output(c.out);
    file << json;
    write_sidecar(c);
  }
  return kOk;
}

int cmd_simulate(RunConfig& c, std::ostream& out, std::ostream& err) {
  resolve_seed(c, err);
  if (!c.classes || !c.class_size || !c.labels) {
    throw ValidationError("simulate needs --classes, --class-size and --labels");
  }
  if (c.mistakes.empty()) c.mistakes = {0};
  PipelineOptions options;
  options.memory_budget = c.memory_budget;

  std::ostringstream csv;
  if (c.correlated) {
    if (c.arity != 2) throw ValidationError("--correlated needs --arity 2");
    CorrelatedPairConfig cfg;
    cfg.class_count = *c.classes;
    cfg.class_size = *c.class_size;
    cfg.label_count = *c.labels;
    cfg.agreement = *c.correlated;
    cfg.mistakes = c.mistakes;
    cfg.trials = c.trials;
    cfg.seed = *c.seed;
    cfg.strategy = parse_strategy(c.solver);
    cfg.reroute = parse_reroute(c.reroute);
    cfg.pipeline = options;
    cfg.threads = c.threads;
    io::write_correlated_csv(csv, correlated_pair_experiment(cfg));
  } else {
    MonotonicityConfig cfg;
    cfg.class_count = *c.classes;
    cfg.class_size = *c.class_size;
    cfg.arity = c.arity;
    cfg.label_count = *c.labels;
    cfg.mistakes = c.mistakes;
    cfg.trials = c.trials;
    cfg.seed = *c.seed;
    cfg.strategy = parse_strategy(c.solver);
    cfg.placement = parse_placement(c.placement);
    cfg.reroute = parse_reroute(c.reroute);
    cfg.pipeline = options;
    cfg.threads = c.threads;
    io::write_experiment_csv(csv, monotonicity_experiment(cfg));
  }
  if (c.out.empty()) {
    out << csv.str();
    err << "cbound: config " << config_json(c).dump() << '\n';
  } else {
    auto file = open_output(c.out);
    file << csv.str();
    write_sidecar(c);
  }
  return kOk;
}

int cmd_plant(RunConfig& c, std::ostream& out, std::ostream& err) {
  resolve_seed(c, err);
  if (!c.classes || !c.class_size || !c.labels) {
    throw ValidationError("plant needs --classes, --class-size and --labels");
  }
  if (c.mistakes.size() > 1) throw ValidationError("plant takes a single --mistakes value");
  std::uint64_t m = c.mistakes.empty() ? 0 : c.mistakes.front();
  PlantedTruth truth = plant_truth(*c.classes, *c.class_size, c.arity, *c.labels,
                                   derive_seed(*c.seed, 0), parse_placement(c.placement));
  Simulation sim = inject_mistakes(truth, m, derive_seed(*c.seed, 1), parse_reroute(c.reroute));
  err << "cbound: actual mistakes " << sim.actual_mistakes << '\n';
  std::ostringstream csv;
  io::write_predictions(csv, sim.records, c.arity);
  if (c.out.empty()) {
    out << csv.str();
  } else {
    auto file = open_output(c.out);
    file << csv.str();
    Json config = config_json(c);
    config["actual_mistakes"] = sim.actual_mistakes;
    auto sidecar = open_output(c.out + ".config.json");
    sidecar << config.dump(2) << '\n';
  }
  return kOk;
}

int cmd_study(RunConfig& c, std::ostream& out, std::ostream& err) {
  resolve_seed(c, err);
  if (!c.labels) throw ValidationError("study needs --labels L");
  EmbeddingSet embeddings = io::read_embeddings(c.embeddings);
  if (!embeddings.fully_labeled()) {
    throw ValidationError("study needs validation labels on every embedding");
  }
  std::vector<LearnerSpec> learners = io::read_learner_specs(c.learners);
  if (!c.class_size) {
    std::map<std::uint32_t, std::uint64_t> counts;
    for (auto l : embeddings.labels()) ++counts[l];
    if (counts.empty()) throw ValidationError("embeddings file is empty");
    c.class_size = counts.begin()->second;
  }
  StudyResult study =
      pairwise_ensemble_study(embeddings, learners, *c.labels, *c.class_size, *c.seed, c.threads);
  std::ostringstream csv;
  io::write_study_csv(csv, study, learners);
  Json summary = io::study_summary_json(study, learners);
  summary["config"] = config_json(c);
  if (c.out.empty()) {
    out << csv.str();
    err << "cbound: summary " << summary.dump() << '\n';
  } else {
    auto file = open_output(c.out);
    file << csv.str();
    auto summary_file = open_output(c.out + ".summary.json");
    summary_file << summary.dump(2) << '\n';
    write_sidecar(c);
  }
  return kOk;
}

int cmd_gen_embeddings(RunConfig& c, std::ostream& out, std::ostream& err) {
  resolve_seed(c, err);
  if (!c.classes || !c.class_size) {
    throw ValidationError("gen-embeddings needs --classes and --class-size");
  }
  GaussianClusterConfig cfg;
  cfg.dimension = c.dimension;
  cfg.class_count = static_cast<std::uint32_t>(*c.classes);
  cfg.class_size = static_cast<std::uint32_t>(*c.class_size);
  cfg.separation = c.separation;
  cfg.seed = *c.seed;
  GaussianClusters clusters = make_gaussian_clusters(cfg);
  if (c.out.empty()) {
    if (c.binary) throw ValidationError("--binary needs --out");
    io::write_embeddings_csv(out, clusters.embeddings);
    return kOk;
  }
  auto file = open_output(c.out);
  if (c.binary) {
    io::write_embeddings_binary(file, clusters.embeddings);
  } else {
    io::write_embeddings_csv(file, clusters.embeddings);
  }
  write_sidecar(c);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Label-free mistake bounds for classifier ensembles", "cbound"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--memory-budget", c.memory_budget, "Exact DP memory budget in bytes");
    sub->add_option("--solver", c.solver, "auto, bruteforce, dp or greedy")
        ->check(CLI::IsMember({"auto", "bruteforce", "dp", "exact_dp", "greedy"}));
  };
  auto add_dimensions = [&](CLI::App* sub) {
    sub->add_option("--classes", c.classes, "Class count K");
    sub->add_option("--class-size", c.class_size, "Class size S");
    sub->add_option("--labels", c.labels, "Labels per classifier L");
  };

  auto* bound = app.add_subcommand("bound", "Mistake bound of a predictions file");
  bound->add_option("--predictions", c.predictions, "Predictions CSV")->required();
  add_dimensions(bound);
  bound->get_option("--class-size")->required();
  add_common(bound);

  auto* occupancy = app.add_subcommand("occupancy", "Occupancy table of a predictions file");
  occupancy->add_option("--predictions", c.predictions, "Predictions CSV")->required();
  occupancy->add_option("--labels", c.labels, "Labels per classifier L");
  occupancy->add_option("--out", c.out, "Output path");

  auto* simulate = app.add_subcommand("simulate", "Planted-truth mistake sweep");
  add_dimensions(simulate);
  add_common(simulate);
  simulate->add_option("--arity", c.arity, "Classifier count Q")->check(CLI::PositiveNumber);
  simulate->add_option("--mistakes", c.mistakes, "Comma-separated mistake counts")->delimiter(',');
  simulate->add_option("--trials", c.trials, "Trials per mistake count")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", c.seed, "Master seed");
  simulate->add_option("--placement", c.placement, "injective or independent");
  simulate->add_option("--reroute", c.reroute, "other_class or uniform_cell");
  simulate->add_option("--correlated", c.correlated,
                       "Run the correlated-pair sweep with this agreement in [0, 1]");

  auto* plant = app.add_subcommand("plant", "Write one simulated predictions file");
  add_dimensions(plant);
  plant->add_option("--arity", c.arity, "Classifier count Q")->check(CLI::PositiveNumber);
  plant->add_option("--mistakes", c.mistakes, "Mistake count")->delimiter(',');
  plant->add_option("--seed", c.seed, "Seed");
  plant->add_option("--placement", c.placement, "injective or independent");
  plant->add_option("--reroute", c.reroute, "other_class or uniform_cell");
  plant->add_option("--out", c.out, "Output path");

  auto* study = app.add_subcommand("study", "Pairwise ensemble study over embeddings");
  study->add_option("--embeddings", c.embeddings, "Embeddings CSV or binary file")->required();
  study->add_option("--learners", c.learners, "Learner spec JSON")->required();
  study->add_option("--labels", c.labels, "Representative count L");
  study->add_option("--class-size", c.class_size, "Class size S (default: inferred)");
  study->add_option("--seed", c.seed, "Seed");
  add_common(study);

  auto* gen = app.add_subcommand("gen-embeddings", "Synthetic Gaussian-cluster embeddings");
  gen->add_option("--classes", c.classes, "Class count K");
  gen->add_option("--class-size", c.class_size, "Class size S");
  gen->add_option("--dimension", c.dimension, "Embedding dimension")->check(CLI::PositiveNumber);
  gen->add_option("--separation", c.separation, "Mean separation in units of sigma");
  gen->add_option("--seed", c.seed, "Seed");
  gen->add_flag("--binary", c.binary, "Write the binary layout");
  gen->add_option("--out", c.out, "Output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "cbound: " << e.what() << '\n';
    if (e.get_exit_code() == 0) return kOk;
    return kIoError;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    c.subcommand = chosen->get_name();
    if (c.subcommand == "bound") return cmd_bound(c, out, err);
    if (c.subcommand == "occupancy") return cmd_occupancy(c, out, err);
    if (c.subcommand == "simulate") return cmd_simulate(c, out, err);
    if (c.subcommand == "plant") return cmd_plant(c, out, err);
    if (c.subcommand == "study") return cmd_study(c, out, err);
    if (c.subcommand == "gen-embeddings") return cmd_gen_embeddings(c, out, err);
  } catch (const ParseError& e) {
    err << "cbound: " << e.what() << '\n';
    return kIoError;
  } catch (const ValidationError& e) {
    err << "cbound: " << e.what() << '\n';
    return kValidationError;
  } catch (const ResourceError& e) {
    err << "cbound: " << e.what() << '\n';
    return kResourceError;
  }
  return kValidationError;
}

}  // namespace cbound::cli
