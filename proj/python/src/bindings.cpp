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


// Python bindings. Label matrices come in as N x Q integer arrays and are
// range-checked before narrowing to 32 bits.

#include <cbound/bound_solvers.hpp>
#include <cbound/error.hpp>
#include <cbound/io.hpp>
#include <cbound/metric_classifiers.hpp>
#include <cbound/mistakes_model.hpp>
#include <cbound/occupancy.hpp>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace cbound;

namespace {

using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Label> to_labels(const IntArray& values, const char* what) {
  std::vector<Label> out(static_cast<std::size_t>(values.size()));
  const std::int64_t* data = values.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (data[i] < 0 || data[i] > std::numeric_limits<Label>::max()) {
      throw ValidationError(std::string(what) + " entry " + std::to_string(i) + " = " +
                            std::to_string(data[i]) + " is not a valid label");
    }
    out[i] = static_cast<Label>(data[i]);
  }
  return out;
}

OccupancyTable occupancy_from_matrix(const IntArray& outputs, Label label_count) {
  if (outputs.ndim() != 2) throw ValidationError("outputs must be an N x Q array");
  auto arity = static_cast<std::size_t>(outputs.shape(1));
  auto flat = to_labels(outputs, "outputs");
  return build_occupancy(std::span<const Label>(flat), arity, label_count);
}

EmbeddingSet embeddings_from_array(const RealArray& vectors,
                                   std::optional<std::vector<std::string>> ids,
                                   std::optional<std::vector<std::uint32_t>> labels) {
  if (vectors.ndim() != 2) throw ValidationError("vectors must be an N x d array");
  auto n = static_cast<std::size_t>(vectors.shape(0));
  auto d = static_cast<std::size_t>(vectors.shape(1));
  if (ids && ids->size() != n) throw ValidationError("ids must have one entry per row");
  if (labels && labels->size() != n) throw ValidationError("labels must have one entry per row");
  EmbeddingSet set(d);
  const double* data = vectors.data();
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = ids ? (*ids)[i] : "e" + std::to_string(i);
    std::optional<std::uint32_t> label;
    if (labels) label = (*labels)[i];
    set.add(std::move(id), std::span<const double>(data + i * d, d), label);
  }
  return set;
}

py::dict decomposition_dict(const MistakeDecomposition& d) {
  py::dict out;
  out["hidden"] = d.hidden;
  out["visible"] = d.visible;
  out["cycles_used"] = d.cycles_used;
  out["paths_used"] = d.paths_used;
  return out;
}

}  // namespace

PYBIND11_MODULE(_cbound, m) {
  m.doc() = "Lower bounds on ensemble mistakes from joint classifier outputs";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  static py::exception<ResourceError> resource_error(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ResourceError& e) {
      py::object type = py::reinterpret_borrow<py::object>(resource_error.ptr());
      py::object exc = type(e.what());
      exc.attr("estimate") = e.estimate();
      PyErr_SetObject(resource_error.ptr(), exc.ptr());
    }
  });

  py::enum_<Strategy>(m, "Strategy")
      .value("auto", Strategy::automatic)
      .value("bruteforce", Strategy::bruteforce)
      .value("dp", Strategy::exact_dp)
      .value("greedy", Strategy::greedy);
  py::enum_<SolverKind>(m, "SolverKind")
      .value("bruteforce", SolverKind::bruteforce)
      .value("exact_dp", SolverKind::exact_dp)
      .value("greedy", SolverKind::greedy);
  py::enum_<Placement>(m, "Placement")
      .value("independent", Placement::independent)
      .value("injective", Placement::injective);
  py::enum_<Reroute>(m, "Reroute")
      .value("other_class", Reroute::other_class)
      .value("uniform_cell", Reroute::uniform_cell);
  py::enum_<LearnerKind>(m, "LearnerKind")
      .value("identity", LearnerKind::identity)
      .value("pair_projection", LearnerKind::pair_projection)
      .value("coordinate_subset", LearnerKind::coordinate_subset);
  m.def("parse_strategy", [](const std::string& s) { return parse_strategy(s); });

  // Occupancy.
  py::class_<OccupancyTable>(m, "OccupancyTable")
      .def_property_readonly("arity", &OccupancyTable::arity)
      .def_property_readonly("label_count", &OccupancyTable::label_count)
      .def_property_readonly("total", &OccupancyTable::total)
      .def("__len__", &OccupancyTable::size)
      .def("cells",
           [](const OccupancyTable& t) {
             py::list out;
             for (const auto& c : t.cells()) out.append(py::make_tuple(py::tuple(py::cast(c.coords)), c.count));
             return out;
           })
      .def("count_of", [](const OccupancyTable& t, const CellIndex& coords) { return t.count_of(coords); })
      .def("marginal", &OccupancyTable::marginal)
      .def("to_json", [](const OccupancyTable& t) { return io::occupancy_to_json(t); })
      .def_static("from_json", [](const std::string& s) { return io::occupancy_from_json(s); });

  m.def("build_occupancy", &occupancy_from_matrix, py::arg("outputs"), py::arg("label_count"),
        "Counts an N x Q array of labels into a sparse table.");
  m.def("merge", &merge);
  m.def("diagonal_mass", &diagonal_mass);
  m.def(
      "check_resolution",
      [](std::uint64_t k, std::uint64_t q, std::uint64_t l) {
        auto a = check_resolution(k, q, l);
        return py::make_tuple(a.ok, a.message);
      },
      py::arg("class_count"), py::arg("arity"), py::arg("label_count"));
  m.def(
      "read_predictions",
      [](const std::string& path) {
        auto file = io::read_predictions(std::filesystem::path(path));
        return build_occupancy(file.records, file.arity,
                               [&] {
                                 Label top = 0;
                                 for (const auto& r : file.records) {
                                   for (Label l : r.outputs) top = std::max(top, l);
                                 }
                                 return top + 1;
                               }());
      },
      py::arg("path"), "Reads a predictions CSV into a table; L is one past the largest label.");

  // Instances and solvers.
  py::class_<InstanceSpec>(m, "InstanceSpec")
      .def_readonly("class_count", &InstanceSpec::class_count)
      .def_readonly("class_size", &InstanceSpec::class_size)
      .def_readonly("reduced_cell_sizes", &InstanceSpec::reduced_cell_sizes)
      .def_readonly("reduced_class_count", &InstanceSpec::reduced_class_count)
      .def_readonly("removed_pairs", &InstanceSpec::removed_pairs)
      .def_property_readonly("largest_cell", &InstanceSpec::largest_cell);
  m.def("make_instance",
        py::overload_cast<std::vector<std::uint64_t>, std::uint64_t, std::uint64_t>(&make_instance),
        py::arg("cell_sizes"), py::arg("class_count"), py::arg("class_size"));
  m.def("make_unequal_instance", &make_unequal_instance, py::arg("cell_sizes"),
        py::arg("class_sizes"));
  m.def("reduce", &reduce);
  m.def("reduce_instance", &reduce_instance, py::arg("table"), py::arg("class_count"),
        py::arg("class_size"));

  py::class_<BoundResult>(m, "BoundResult")
      .def_readonly("coherence", &BoundResult::coherence)
      .def_readonly("mistake_bound", &BoundResult::mistake_bound)
      .def_readonly("phi_star", &BoundResult::phi_star)
      .def_readonly("solver", &BoundResult::solver)
      .def_readonly("exact", &BoundResult::exact)
      .def_readonly("oracle_min_mistakes", &BoundResult::oracle_min_mistakes)
      .def_property_readonly("witness", [](const BoundResult& r) { return r.witness.dense(); })
      .def("to_json", [](const BoundResult& r) { return io::bound_result_to_json(r).dump(); });

  m.def(
      "solve_bruteforce",
      [](const InstanceSpec& spec, std::uint64_t max_classes, std::uint64_t max_cell,
         std::uint64_t max_total) {
        return solve_bruteforce(spec, BruteforceLimits{max_classes, max_cell, max_total});
      },
      py::arg("spec"), py::arg("max_classes") = BruteforceLimits{}.max_classes,
      py::arg("max_cell") = BruteforceLimits{}.max_cell,
      py::arg("max_total") = BruteforceLimits{}.max_total);
  m.def("solve_exact_dp", &solve_exact_dp, py::arg("spec"),
        py::arg("memory_budget") = kDefaultMemoryBudget);
  m.def("estimate_dp_memory", &estimate_dp_memory);
  m.def("solve_greedy", [](const InstanceSpec& spec) { return solve_greedy(spec); });
  m.def(
      "bound_pipeline",
      [](const OccupancyTable& table, std::uint64_t k, std::uint64_t s, Strategy strategy,
         std::uint64_t memory_budget) {
        PipelineOptions options;
        options.memory_budget = memory_budget;
        return bound_pipeline(table, k, s, strategy, options);
      },
      py::arg("table"), py::arg("class_count"), py::arg("class_size"),
      py::arg("strategy") = Strategy::automatic, py::arg("memory_budget") = kDefaultMemoryBudget,
      py::call_guard<py::gil_scoped_release>());

  // Simulation.
  py::class_<PlantedTruth>(m, "PlantedTruth")
      .def_readonly("class_count", &PlantedTruth::class_count)
      .def_readonly("class_size", &PlantedTruth::class_size)
      .def_readonly("arity", &PlantedTruth::arity)
      .def_readonly("label_count", &PlantedTruth::label_count)
      .def_readonly("class_cells", &PlantedTruth::class_cells)
      .def_readonly("seed", &PlantedTruth::seed);
  m.def("plant_truth", &plant_truth, py::arg("class_count"), py::arg("class_size"),
        py::arg("arity"), py::arg("label_count"), py::arg("seed"),
        py::arg("placement") = Placement::injective);
  m.def("plant_correlated_pair", &plant_correlated_pair, py::arg("class_count"),
        py::arg("class_size"), py::arg("label_count"), py::arg("agreement"), py::arg("seed"));

  py::class_<Simulation>(m, "Simulation")
      .def_readonly("actual_mistakes", &Simulation::actual_mistakes)
      .def_readonly("rerouted", &Simulation::rerouted)
      .def_property_readonly("outputs",
                             [](const Simulation& s) {
                               std::size_t q = s.records.empty() ? 0 : s.records.front().outputs.size();
                               py::array_t<std::int64_t> out({s.records.size(), q});
                               auto view = out.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < s.records.size(); ++i) {
                                 for (std::size_t j = 0; j < q; ++j) view(i, j) = s.records[i].outputs[j];
                               }
                               return out;
                             })
      .def_property_readonly("sample_ids", [](const Simulation& s) {
        std::vector<std::string> ids;
        for (const auto& r : s.records) ids.push_back(r.sample_id);
        return ids;
      })
      .def("occupancy", [](const Simulation& s, const PlantedTruth& truth) {
        return build_occupancy(s.records, truth.arity, truth.label_count);
      });
  m.def("inject_mistakes", &inject_mistakes, py::arg("truth"), py::arg("mistakes"),
        py::arg("seed"), py::arg("reroute") = Reroute::other_class);

  m.def(
      "decompose_mistakes",
      [](const PlantedTruth& truth, const Simulation& sim, const std::string& method) {
        auto graph = build_mistakes_graph(truth, sim.records);
        if (method == "greedy") return decomposition_dict(decompose_greedy(graph));
        if (method == "exhaustive") return decomposition_dict(decompose_exhaustive(graph));
        if (method == "auto") return decomposition_dict(decompose_mistakes(graph));
        throw ValidationError("unknown decomposition method '" + method + "'");
      },
      py::arg("truth"), py::arg("simulation"), py::arg("method") = "auto");
  m.def(
      "decompose_arcs",
      [](const std::vector<std::pair<CellIndex, CellIndex>>& arcs, const std::string& method) {
        MistakesGraph graph;
        std::set<CellIndex> nodes;
        for (std::size_t i = 0; i < arcs.size(); ++i) {
          if (arcs[i].first == arcs[i].second) throw ValidationError("arcs must join distinct cells");
          nodes.insert(arcs[i].first);
          nodes.insert(arcs[i].second);
          graph.arcs.push_back({arcs[i].first, arcs[i].second, "a" + std::to_string(i)});
        }
        graph.nodes.assign(nodes.begin(), nodes.end());
        if (method == "greedy") return decomposition_dict(decompose_greedy(graph));
        if (method == "exhaustive") return decomposition_dict(decompose_exhaustive(graph));
        if (method == "auto") return decomposition_dict(decompose_mistakes(graph));
        throw ValidationError("unknown decomposition method '" + method + "'");
      },
      py::arg("arcs"), py::arg("method") = "auto");

  m.def(
      "monotonicity_experiment",
      [](std::uint64_t k, std::uint64_t s, std::size_t q, Label l,
         std::vector<std::uint64_t> mistakes, std::uint64_t trials, std::uint64_t seed,
         Strategy strategy, Placement placement, Reroute reroute, std::size_t threads) {
        MonotonicityConfig c;
        c.class_count = k;
        c.class_size = s;
        c.arity = q;
        c.label_count = l;
        c.mistakes = std::move(mistakes);
        c.trials = trials;
        c.seed = seed;
        c.strategy = strategy;
        c.placement = placement;
        c.reroute = reroute;
        c.threads = threads;
        std::vector<py::dict> rows;
        std::vector<ExperimentRow> result;
        {
          py::gil_scoped_release release;
          result = monotonicity_experiment(c);
        }
        for (const auto& r : result) {
          py::dict d;
          d["mistakes"] = r.mistakes;
          d["mean_bound"] = r.mean_bound;
          d["std_bound"] = r.std_bound;
          d["mean_actual"] = r.mean_actual;
          d["mean_coherence"] = r.mean_coherence;
          d["trials"] = r.trials;
          d["seed"] = r.seed;
          rows.push_back(d);
        }
        return rows;
      },
      py::arg("class_count"), py::arg("class_size"), py::arg("arity"), py::arg("label_count"),
      py::arg("mistakes"), py::arg("trials"), py::arg("seed"),
      py::arg("strategy") = Strategy::greedy, py::arg("placement") = Placement::injective,
      py::arg("reroute") = Reroute::other_class, py::arg("threads") = 1);
  m.def(
      "correlated_pair_experiment",
      [](std::uint64_t k, std::uint64_t s, Label l, double agreement,
         std::vector<std::uint64_t> mistakes, std::uint64_t trials, std::uint64_t seed,
         Strategy strategy, Reroute reroute, std::size_t threads) {
        CorrelatedPairConfig c;
        c.class_count = k;
        c.class_size = s;
        c.label_count = l;
        c.agreement = agreement;
        c.mistakes = std::move(mistakes);
        c.trials = trials;
        c.seed = seed;
        c.strategy = strategy;
        c.reroute = reroute;
        c.threads = threads;
        std::vector<CorrelatedRow> result;
        {
          py::gil_scoped_release release;
          result = correlated_pair_experiment(c);
        }
        std::vector<py::dict> rows;
        for (const auto& r : result) {
          py::dict d;
          d["mistakes"] = r.mistakes;
          d["mean_diagonal_mass"] = r.mean_diagonal_mass;
          d["mean_bound"] = r.mean_bound;
          d["std_bound"] = r.std_bound;
          d["mean_actual"] = r.mean_actual;
          d["mean_coherence"] = r.mean_coherence;
          d["trials"] = r.trials;
          d["seed"] = r.seed;
          rows.push_back(d);
        }
        return rows;
      },
      py::arg("class_count"), py::arg("class_size"), py::arg("label_count"), py::arg("agreement"),
      py::arg("mistakes"), py::arg("trials"), py::arg("seed"),
      py::arg("strategy") = Strategy::greedy, py::arg("reroute") = Reroute::other_class,
      py::arg("threads") = 1);

  // Metric classifiers.
  py::class_<EmbeddingSet>(m, "EmbeddingSet")
      .def(py::init(&embeddings_from_array), py::arg("vectors"), py::arg("ids") = py::none(),
           py::arg("labels") = py::none())
      .def_property_readonly("dimension", &EmbeddingSet::dimension)
      .def("__len__", &EmbeddingSet::size)
      .def("labels", &EmbeddingSet::labels)
      .def_static("read", [](const std::string& path) { return io::read_embeddings(path); });

  py::class_<LearnerSpec>(m, "LearnerSpec")
      .def(py::init([](std::string name, LearnerKind kind, std::size_t dims,
                       std::size_t reps_per_class, std::uint64_t seed) {
             return LearnerSpec{std::move(name), kind, dims, reps_per_class, seed};
           }),
           py::arg("name"), py::arg("kind"), py::arg("dims") = 0, py::arg("reps_per_class") = 1,
           py::arg("seed") = 0)
      .def_readwrite("name", &LearnerSpec::name)
      .def_readwrite("kind", &LearnerSpec::kind)
      .def_readwrite("dims", &LearnerSpec::dims)
      .def_readwrite("reps_per_class", &LearnerSpec::reps_per_class)
      .def_readwrite("seed", &LearnerSpec::seed);

  m.def(
      "gaussian_clusters",
      [](std::size_t dimension, std::uint32_t k, std::uint32_t s, double separation,
         double sigma, std::uint64_t seed) {
        GaussianClusterConfig c{dimension, k, s, separation, sigma, seed};
        return make_gaussian_clusters(c).embeddings;
      },
      py::arg("dimension"), py::arg("class_count"), py::arg("class_size"),
      py::arg("separation") = GaussianClusterConfig{}.separation, py::arg("sigma") = 1.0,
      py::arg("seed") = 0);

  m.def(
      "false_same_count",
      [](const IntArray& a, const IntArray& b, std::vector<std::uint32_t> labels) {
        auto la = to_labels(a, "predictions_a");
        auto lb = to_labels(b, "predictions_b");
        return false_same_count(la, lb, labels);
      },
      py::arg("predictions_a"), py::arg("predictions_b"), py::arg("labels"));
  m.def(
      "true_same_count",
      [](const IntArray& a, const IntArray& b, std::vector<std::uint32_t> labels) {
        auto la = to_labels(a, "predictions_a");
        auto lb = to_labels(b, "predictions_b");
        return true_same_count(la, lb, labels);
      },
      py::arg("predictions_a"), py::arg("predictions_b"), py::arg("labels"));

  m.def(
      "pairwise_ensemble_study",
      [](const EmbeddingSet& embeddings, const std::vector<LearnerSpec>& learners,
         std::size_t label_count, std::uint64_t class_size, std::uint64_t seed,
         std::size_t threads) {
        StudyResult study;
        {
          py::gil_scoped_release release;
          study = pairwise_ensemble_study(embeddings, learners, label_count, class_size, seed,
                                          threads);
        }
        py::list rows;
        for (const auto& r : study.rows) {
          py::dict d;
          d["pair"] = r.pair;
          d["learner_a"] = learners[r.learner_a].name;
          d["learner_b"] = learners[r.learner_b].name;
          d["mistake_bound"] = r.mistake_bound;
          d["coherence"] = r.coherence;
          d["false_same"] = r.false_same;
          d["true_same"] = r.true_same;
          d["accuracy_a"] = r.accuracy_a;
          d["accuracy_b"] = r.accuracy_b;
          d["diagonal_mass"] = r.diagonal_mass;
          rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["accuracies"] = study.accuracies;
        out["representative_classes"] = study.representative_classes;
        out["slope"] = study.slope;
        out["intercept"] = study.intercept;
        out["pearson_r"] = study.pearson_r;
        return out;
      },
      py::arg("embeddings"), py::arg("learners"), py::arg("label_count"), py::arg("class_size"),
      py::arg("seed"), py::arg("threads") = 1);
}
