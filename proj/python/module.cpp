#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "soberdse/dataset.hpp"
#include "soberdse/explorers.hpp"
#include "soberdse/selector.hpp"

namespace py = pybind11;
using namespace soberdse;

namespace {

std::vector<DesignPoint> to_points(const std::vector<std::pair<double, double>>& objectives) {
  std::vector<DesignPoint> points;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    points.push_back({Knobs{static_cast<int>(i)}, ObjectiveVector(objectives[i].first, objectives[i].second)});
  }
  return points;
}

py::list front_tuples(const ParetoFront& front) {
  py::list out;
  for (const auto& p : front) out.append(py::make_tuple(p.obj().area(), p.obj().latency()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Design-space explorer portfolio, synthetic benchmarks and the explorer selector.";

  py::enum_<Family>(m, "Family")
      .value("SMOOTH", Family::smooth)
      .value("RUGGED", Family::rugged)
      .value("DECEPTIVE", Family::deceptive)
      .value("PLATEAU", Family::plateau)
      .value("CLUSTERED", Family::clustered);
  py::enum_<SizeClass>(m, "SizeClass")
      .value("SMALL", SizeClass::small)
      .value("MEDIUM", SizeClass::medium)
      .value("LARGE", SizeClass::large);
  py::enum_<ExplorerId>(m, "ExplorerId")
      .value("NSGA2", ExplorerId::nsga2)
      .value("SA", ExplorerId::sa)
      .value("ACO", ExplorerId::aco)
      .value("PSO", ExplorerId::pso)
      .value("LATTICE", ExplorerId::lattice)
      .value("SBO", ExplorerId::sbo)
      .value("EDA", ExplorerId::eda)
      .value("AC", ExplorerId::ac)
      .value("PG", ExplorerId::pg)
      .value("QLMOEA", ExplorerId::qlmoea);

  // Pareto utilities on plain (area, latency) tuples.
  m.def(
      "pareto_filter",
      [](const std::vector<std::pair<double, double>>& objectives) {
        return front_tuples(pareto_filter(to_points(objectives)));
      },
      py::arg("objectives"), "Non-dominated subset sorted by ascending area.");
  m.def(
      "adrs",
      [](const std::vector<std::pair<double, double>>& reference, const std::vector<std::pair<double, double>>& approx) {
        return adrs(pareto_filter(to_points(reference)), pareto_filter(to_points(approx)));
      },
      py::arg("reference"), py::arg("approx"));
  m.def(
      "dominates",
      [](std::pair<double, double> a, std::pair<double, double> b) {
        return dominates(ObjectiveVector(a.first, a.second), ObjectiveVector(b.first, b.second));
      },
      py::arg("a"), py::arg("b"));

  py::class_<BenchmarkInstance>(m, "BenchmarkInstance")
      .def_readonly("id", &BenchmarkInstance::id)
      .def_readonly("family", &BenchmarkInstance::family)
      .def_readonly("seed", &BenchmarkInstance::seed)
      .def_readonly("size_class", &BenchmarkInstance::size_class)
      .def_property_readonly("space_size", [](const BenchmarkInstance& b) { return b.schema.space_size(); })
      .def_property_readonly("cardinalities",
                             [](const BenchmarkInstance& b) {
                               std::vector<int> c;
                               for (const auto& k : b.schema.knobs) c.push_back(k.cardinality());
                               return c;
                             })
      .def_property_readonly("node_count", [](const BenchmarkInstance& b) { return b.graph.nodes.size(); })
      .def_property_readonly("edge_count", [](const BenchmarkInstance& b) { return b.graph.edges.size(); })
      .def("__repr__", [](const BenchmarkInstance& b) { return "<BenchmarkInstance " + b.id + ">"; });

  m.def("synth_instance", &synth_instance, py::arg("family"), py::arg("seed"), py::arg("size"));
  m.def("extract_features", &extract_features, py::arg("instance"));

  py::class_<SurrogateModel>(m, "SurrogateModel")
      .def(py::init<const BenchmarkInstance&>(), py::arg("instance"))
      .def(
          "evaluate",
          [](const SurrogateModel& model, const Knobs& knobs) {
            const ObjectiveVector o = model.evaluate(knobs);
            return py::make_tuple(o.area(), o.latency());
          },
          py::arg("knobs"), "Returns (area, latency).")
      .def(
          "exhaustive_front",
          [](const SurrogateModel& model, std::uint64_t limit) {
            return front_tuples(exhaustive_front(model, model.schema(), limit));
          },
          py::arg("limit") = kDefaultExhaustiveLimit);

  m.def(
      "explore",
      [](ExplorerId explorer, const BenchmarkInstance& instance, std::uint64_t budget, std::uint64_t seed) {
        Budget b;
        b.max_evaluations = budget;
        py::gil_scoped_release release;
        const ExplorationResult r = explore(explorer, instance, SurrogateModel(instance), b, seed);
        py::gil_scoped_acquire acquire;
        py::dict out;
        out["front"] = front_tuples(r.front);
        out["evaluations_used"] = r.evaluations_used;
        out["evaluated"] = r.evaluated.size();
        return out;
      },
      py::arg("explorer"), py::arg("instance"), py::arg("budget") = 500, py::arg("seed") = 0);
  m.def(
      "run_portfolio",
      [](const BenchmarkInstance& instance, std::uint64_t budget, std::uint64_t master_seed, unsigned workers) {
        Budget b;
        b.max_evaluations = budget;
        PortfolioOptions options;
        options.workers = workers;
        PortfolioResult p;
        {
          py::gil_scoped_release release;
          p = run_portfolio(instance, SurrogateModel(instance), b, master_seed, options);
        }
        py::dict out;
        out["adrs"] = std::vector<double>(p.adrs.begin(), p.adrs.end());
        out["best"] = p.best;
        out["reference"] = front_tuples(p.reference);
        out["exhaustive_reference"] = p.exhaustive_reference;
        return out;
      },
      py::arg("instance"), py::arg("budget") = 500, py::arg("master_seed") = 0, py::arg("workers") = 1);

  // Neural and selector primitives.
  m.def("softmax", &softmax, py::arg("logits"));
  m.def("entropy", &entropy, py::arg("p"));
  m.def(
      "cross_entropy",
      [](const Vector& p, int label) {
        const LossAndGradient l = cross_entropy(p, label);
        return py::make_tuple(l.loss, l.dlogits);
      },
      py::arg("p"), py::arg("label"), "Returns (loss, gradient w.r.t. logits).");
  m.def("reward", &reward, py::arg("adrs_chosen"), py::arg("adrs_best"));
  m.def(
      "gae",
      [](const std::vector<double>& rewards, const std::vector<double>& values, double bootstrap, double gamma,
         double lambda) {
        const GaeResult g = gae(rewards, values, bootstrap, gamma, lambda);
        return py::make_tuple(g.advantages, g.returns);
      },
      py::arg("rewards"), py::arg("values"), py::arg("bootstrap_value") = 0.0, py::arg("gamma") = 0.99,
      py::arg("lam") = 0.95, "Returns (advantages, returns).");

  // Dataset pipeline.
  m.def(
      "generate",
      [](const std::filesystem::path& dir, const std::vector<Family>& families, const std::vector<std::uint64_t>& seeds,
         SizeClass size, std::uint64_t budget, std::uint64_t master_seed, double split, unsigned workers) {
        SynthConfig s{families, seeds, size};
        RunConfig r;
        r.budget.max_evaluations = budget;
        r.master_seed = master_seed;
        r.split_fraction = split;
        r.workers = workers;
        py::gil_scoped_release release;
        return generate(s, r, dir).manifest.file_hashes;
      },
      py::arg("dir"), py::arg("families"), py::arg("seeds"), py::arg("size") = SizeClass::medium,
      py::arg("budget") = 500, py::arg("master_seed") = 0, py::arg("split") = 0.69, py::arg("workers") = 1,
      "Writes a dataset and returns its file hashes.");
  m.def(
      "load",
      [](const std::filesystem::path& path) {
        const Dataset d = load(path);
        py::dict out;
        std::vector<std::string> ids;
        for (const auto& inst : d.instances) ids.push_back(inst.id);
        out["ids"] = ids;
        out["train_ids"] = d.manifest.train_ids;
        out["inference_ids"] = d.manifest.inference_ids;
        py::dict labels;
        for (const auto& s : d.samples) labels[py::str(s.benchmark_id)] = s.label;
        out["labels"] = labels;
        out["files"] = d.manifest.file_hashes;
        return out;
      },
      py::arg("path"));
}
