#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stochif/config.hpp"
#include "stochif/dataset.hpp"
#include "stochif/experiment.hpp"
#include "stochif/geometry.hpp"
#include "stochif/surrogate.hpp"
#include "stochif/validate.hpp"

namespace py = pybind11;
using namespace stochif;

namespace {

// Configs cross the boundary as JSON text; the Python wrapper converts to dicts.
ExperimentConfig parse_config(const std::string& text) {
  auto c = nlohmann::json::parse(text).get<ExperimentConfig>();
  c.validate();
  return c;
}

std::vector<double> row(const Eigen::Ref<const Eigen::VectorXd>& y) { return {y.data(), y.data() + y.size()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural surrogates for point values of stochastic interface problems";

  py::register_exception<SampleError>(m, "SampleError", PyExc_RuntimeError);
  py::register_exception<DatasetMismatch>(m, "DatasetMismatch", PyExc_RuntimeError);

  m.def("preset_names", &preset_names);
  m.def("preset_config_json", [](const std::string& name) { return nlohmann::json(preset_config(name)).dump(); });
  m.def("config_hash_json", [](const std::string& text) { return config_hash(parse_config(text)); });

  m.def(
      "interface_radius",
      [](const Eigen::Ref<const Eigen::VectorXd>& y, double phi, double r0, double p, double c, bool strict) {
        const InterfaceModel model(InterfaceParams{r0, static_cast<int>(y.size()), p, c, strict});
        return model.radius(row(y), phi);
      },
      py::arg("y"), py::arg("phi"), py::arg("r0") = 0.5, py::arg("p") = 3.0, py::arg("c") = 0.08,
      py::arg("strict") = true);
  m.def(
      "max_shape_variation",
      [](int d, double p, double r0, double c) {
        return InterfaceModel(InterfaceParams{r0, d, p, c, false}).max_shape_variation();
      },
      py::arg("d"), py::arg("p"), py::arg("r0") = 0.5, py::arg("c") = 0.08);

  m.def("sample_parameters", &sample_parameters, py::arg("d"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0);

  py::class_<QoiSolver>(m, "QoiSolver")
      .def(py::init([](const std::string& text) { return QoiSolver(parse_config(text)); }))
      .def_property_readonly("num_vertices", [](const QoiSolver& s) { return s.mesh().num_vertices(); })
      .def_property_readonly("solver_name", &QoiSolver::solver_name)
      .def("__call__",
           [](const QoiSolver& s, const Eigen::Ref<const Eigen::VectorXd>& y) {
             const auto q = s(row(y));
             return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())));
           })
      .def(
          "solve",
          [](const QoiSolver& s, const Eigen::MatrixXd& y, int workers) {
            py::gil_scoped_release release;
            return solve_samples(s, y, workers).q;
          },
          py::arg("y"), py::arg("workers") = 1);

  py::class_<Mlp>(m, "Mlp")
      .def(py::init<std::vector<int>, double>(), py::arg("widths"), py::arg("beta") = 0.2)
      .def_static("init", &Mlp::init, py::arg("widths"), py::arg("beta") = 0.2, py::arg("seed") = 1)
      .def_static("load", py::overload_cast<const std::string&>(&load_checkpoint))
      .def("save", [](const Mlp& net, const std::string& path) { save_checkpoint(net, path); })
      .def_property_readonly("widths", &Mlp::widths)
      .def_property_readonly("beta", &Mlp::beta)
      .def_property_readonly("num_parameters", &Mlp::num_parameters)
      .def_property(
          "weights", [](const Mlp& n) { return n.weights(); },
          [](Mlp& n, const std::vector<Eigen::MatrixXd>& w) { n.weights() = w; })
      .def_property(
          "biases", [](const Mlp& n) { return n.biases(); },
          [](Mlp& n, const std::vector<Eigen::VectorXd>& b) { n.biases() = b; })
      .def(
          "predict", [](const Mlp& n, const Eigen::MatrixXd& y) { return Eigen::MatrixXd(n.forward(Eigen::MatrixXd(y.transpose())).transpose()); },
          py::arg("y"), "Rows of y are samples; returns one row of outputs per sample.")
      .def(
          "loss",
          [](const Mlp& n, const Eigen::MatrixXd& y, const Eigen::MatrixXd& q) {
            return loss(n, Batch{y.transpose(), q.transpose()});
          },
          py::arg("y"), py::arg("q"));

  m.def(
      "train",
      [](const Eigen::MatrixXd& y_train, const Eigen::MatrixXd& q_train, const Eigen::MatrixXd& y_test,
         const Eigen::MatrixXd& q_test, std::vector<int> widths, int epochs, int restarts, double learning_rate,
         std::uint64_t seed, int workers) {
        TrainOptions o;
        o.widths = std::move(widths);
        o.epochs = epochs;
        o.restarts = restarts;
        o.adam.learning_rate = learning_rate;
        o.seed = seed;
        o.workers = workers;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(Batch{y_train.transpose(), q_train.transpose()}, Batch{y_test.transpose(), q_test.transpose()}, o);
        }
        std::vector<std::string> reports;
        for (const auto& rep : r.reports) reports.push_back(nlohmann::json(rep).dump());
        return py::make_tuple(r.best, r.best_index, reports);
      },
      py::arg("y_train"), py::arg("q_train"), py::arg("y_test"), py::arg("q_test"), py::arg("widths"),
      py::arg("epochs") = 5000, py::arg("restarts") = 3, py::arg("learning_rate") = 2e-4, py::arg("seed") = 1,
      py::arg("workers") = 1);

  m.def(
      "run_experiment_json",
      [](const std::string& text, bool persist) {
        const auto c = parse_config(text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c, RunOptions{persist, {}});
        }
        return result_record(r).dump();
      },
      py::arg("config"), py::arg("persist") = false);

  m.def("suite_names", &suite_names);
  m.def("run_suite", [](const std::string& suite) {
    std::vector<Check> checks;
    {
      py::gil_scoped_release release;
      checks = run_suite(suite);
    }
    py::list out;
    for (const auto& c : checks) {
      py::dict d;
      d["suite"] = c.suite;
      d["name"] = c.name;
      d["value"] = c.value;
      d["op"] = c.op;
      d["bound"] = c.bound;
      d["passed"] = c.passed;
      d["detail"] = c.detail;
      out.append(d);
    }
    return out;
  });
}
