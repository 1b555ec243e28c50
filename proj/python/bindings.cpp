#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "calibench/analysis.hpp"
#include "calibench/calibrate.hpp"
#include "calibench/commands.hpp"
#include "calibench/corpus.hpp"
#include "calibench/errors.hpp"
#include "calibench/fixture.hpp"
#include "calibench/metrics.hpp"
#include "calibench/protocols.hpp"

namespace py = pybind11;
using namespace calibench;

namespace {

using Scores = std::vector<double>;
using Labels = std::vector<int>;

// Calibrators cross the boundary as their JSON form ({"kind": ..., ...}).
py::object calibrator_to_py(const Calibrator& cal) {
  return py::module_::import("json").attr("loads")(to_json(cal).dump());
}

Calibrator calibrator_from_py(const py::object& obj) {
  const std::string text = py::str(py::module_::import("json").attr("dumps")(obj));
  return calibrator_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_calibench, m) {
  m.doc() = "Calibration-aware benchmarking of binary-decision models";

  static py::exception<Error> error(m, "CalibenchError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  // metrics
  m.def("auc", [](const Scores& s, const Labels& y) { return auc(s, y); }, py::arg("scores"), py::arg("labels"));
  m.def("auc_trapezoid", [](const Scores& s, const Labels& y) { return auc_trapezoid(s, y); }, py::arg("scores"),
        py::arg("labels"));
  m.def(
      "roc_curve",
      [](const Scores& s, const Labels& y) {
        const auto r = roc_curve(s, y);
        std::vector<std::tuple<double, double, double>> out;
        for (std::size_t k = 0; k < r.points.size(); ++k) out.emplace_back(r.thresholds[k], r.points[k].fpr, r.points[k].tpr);
        return out;
      },
      py::arg("scores"), py::arg("labels"), "List of (threshold, fpr, tpr).");
  m.def(
      "confusion_at",
      [](const Scores& s, const Labels& y, double threshold) {
        const auto c = confusion_at(s, y, threshold);
        return py::dict(py::arg("tp") = c.tp, py::arg("fp") = c.fp, py::arg("tn") = c.tn, py::arg("fn") = c.fn);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold"));
  m.def("accuracy", [](const Labels& p, const Labels& y) { return accuracy(p, y); }, py::arg("predictions"),
        py::arg("labels"));
  m.def("kappa", [](const Labels& p, const Labels& y) { return kappa(p, y); }, py::arg("predictions"),
        py::arg("labels"));

  // calibrate
  m.def(
      "fit",
      [](const std::string& method, const Scores& s, const Labels& y) {
        return calibrator_to_py(fit(parse_method(method), s, y));
      },
      py::arg("method"), py::arg("scores"), py::arg("labels"));
  m.def(
      "predict", [](const py::object& cal, double score) { return predict(calibrator_from_py(cal), score); },
      py::arg("calibrator"), py::arg("score"));
  m.def(
      "decide",
      [](const py::object& cal, const Scores& s) { return decide_all(calibrator_from_py(cal), s); },
      py::arg("calibrator"), py::arg("scores"));
  m.def("pava", [](const Scores& v, const Scores& w) { return pava(v, w); }, py::arg("values"), py::arg("weights"));

  // corpus
  py::class_<BenchmarkCorpus>(m, "Corpus")
      .def_property_readonly("models", &BenchmarkCorpus::models)
      .def_property_readonly("datasets", &BenchmarkCorpus::datasets)
      .def("domain_of", &BenchmarkCorpus::domain_of)
      .def("__len__", [](const BenchmarkCorpus& c) { return c.records().size(); })
      .def(
          "slice",
          [](const BenchmarkCorpus& c, const std::string& model, const std::vector<std::string>& datasets) {
            auto s = slice(c, model, datasets);
            return std::make_pair(std::move(s.scores), std::move(s.labels));
          },
          py::arg("model"), py::arg("datasets"))
      .def(
          "transform",
          [](const BenchmarkCorpus& c, const std::string& model, const std::function<double(double)>& fn) {
            return transform_scores(c, model, fn);
          },
          py::arg("model"), py::arg("fn"));
  m.def(
      "load_corpus",
      [](const std::filesystem::path& path, const std::filesystem::path& registry, std::optional<std::string> format) {
        const auto f = format ? parse_file_format(*format) : format_from_extension(path);
        return load_corpus(path, f, registry);
      },
      py::arg("path"), py::arg("registry"), py::arg("format") = py::none());
  m.def(
      "make_fixture", [](std::uint64_t seed, int items) { return make_rank_flip_fixture({seed, items}); },
      py::arg("seed") = 42, py::arg("items_per_dataset") = 200);

  // protocols
  m.def(
      "run_protocol",
      [](const BenchmarkCorpus& corpus, const std::string& regime, const std::string& method, std::uint64_t seed,
         double ratio, int reps, unsigned threads) {
        const ProtocolSpec spec{parse_regime(regime), parse_method(method), ratio, reps, seed};
        ProtocolRun run;
        {
          py::gil_scoped_release release;
          run = run_protocol(corpus, spec, {threads});
        }
        return py::module_::import("json").attr("loads")(to_json(run).dump());
      },
      py::arg("corpus"), py::arg("regime"), py::arg("method") = "logistic", py::arg("seed") = 0,
      py::arg("ratio") = 0.8, py::arg("reps") = 100, py::arg("threads") = 0,
      "Runs one regime/method and returns the JSON form of the run.");

  // analysis
  m.def("rank_models", [](const Scores& v) { return rank_models(v); }, py::arg("values"));
  m.def(
      "histogram",
      [](const BenchmarkCorpus& corpus, const std::string& model, int bins) {
        const auto h = histogram(corpus, model, bins);
        return std::make_pair(h.edges, h.counts);
      },
      py::arg("corpus"), py::arg("model"), py::arg("bins") = 20, "Returns (edges, counts).");
  m.def(
      "score_variance", [](const BenchmarkCorpus& c, const std::string& model) { return score_variance(c, model); },
      py::arg("corpus"), py::arg("model"));
}
