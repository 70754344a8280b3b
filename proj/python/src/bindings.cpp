// Thin bindings: scenario runs, trajectory directories, batteries, and a few
// kernels on numpy arrays. Structured results cross as JSON text.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdlab/diffusion.hpp"
#include "fdlab/metrics.hpp"
#include "fdlab/scenario.hpp"
#include "fdlab/serialize.hpp"
#include "fdlab/splitting.hpp"
#include "fdlab/verify.hpp"

namespace py = pybind11;
using namespace fdlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid grid_for(const Array& a, std::pair<double, double> x, std::pair<double, double> y) {
  if (a.ndim() == 1) return Grid::line({x.first, x.second}, int(a.shape(0)));
  if (a.ndim() == 2)
    return Grid::box({x.first, x.second}, {y.first, y.second}, int(a.shape(1)), int(a.shape(0)));
  throw std::invalid_argument("expected a 1D or 2D array");
}

Array to_array(const DensityField& f) {
  const Grid& g = f.grid();
  Array out = g.dim() == 1 ? Array({py::ssize_t(g.cells(0))})
                           : Array({py::ssize_t(g.cells(1)), py::ssize_t(g.cells(0))});
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

DiscreteMeasure measure(const Array& points, const Array& weights) {
  DiscreteMeasure mu;
  const auto n = weights.shape(0);
  mu.dim = points.ndim() == 2 && points.shape(1) == 2 ? 2 : 1;
  for (py::ssize_t i = 0; i < n; ++i) {
    const double* p = points.data() + i * (mu.dim == 2 ? 2 : 1);
    mu.support.push_back({p[0], mu.dim == 2 ? p[1] : 0.0});
    mu.weights.push_back(weights.data()[i]);
  }
  return mu;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fdlab core bindings";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

  m.def("run_scenario",
        [](const std::string& path, const std::string& out) {
          const Scenario sc = load_scenario(path);
          TrajectoryRecord traj;
          {
            py::gil_scoped_release release;
            traj = run_splitting(sc.rho0, sc.drift, sc.schedule);
          }
          const fs::path dir = out.empty() ? fs::path(sc.output) : fs::path(out);
          write_trajectory(dir, traj, sc.drift, json{{"scenario", sc.to_json()}, {"seed", sc.seed}});
          return dir.string();
        },
        py::arg("path"), py::arg("out") = "");

  m.def("scenario_json", [](const std::string& path) { return load_scenario(path).to_json().dump(); });

  m.def("load_trajectory", [](const std::string& dir) {
    DriftSpec V;
    json man;
    const TrajectoryRecord t = read_trajectory(dir, &V, &man);
    py::list snaps;
    for (const auto& f : t.snapshots) snaps.append(to_array(f));
    py::dict d;
    d["times"] = t.times();
    d["snapshots"] = snaps;
    d["m"] = t.m;
    d["epsilon"] = t.epsilon;
    d["diagnostics_csv"] = diagnostics_csv(t);
    d["manifest"] = man.dump();
    return d;
  });

  m.def("verify", [](const std::string& battery, const std::string& dir) {
    const BatteryResult r = run_battery(battery, fs::path(dir));
    return py::make_tuple(int(r.status), r.report.dump());
  });

  m.def("battery_names", &battery_names);

  m.def("classify_drift",
        [](const std::string& kind, const std::map<std::string, std::string>& params, int dim, double mexp,
           double q, double q1, double q2, const std::string& cls, double T) {
          json section{{"kind", kind}};
          for (const auto& [k, v] : params) section[k] = v;
          const DriftSpec V = drift_from_config(section, dim);
          ClassifyContext ctx;
          ctx.domain = dim == 1 ? Grid::line({0.0, 1.0}, 64) : Grid::box({0.0, 1.0}, {0.0, 1.0}, 64, 64);
          ctx.T = T;
          json j = to_json(classify(V, mexp, q, {q1, q2}, class_from_name(cls), ctx));
          j["drift"] = drift_to_json(V);
          return j.dump();
        },
        py::arg("kind"), py::arg("params"), py::arg("dim"), py::arg("m"), py::arg("q"), py::arg("q1"),
        py::arg("q2"), py::arg("cls") = "D", py::arg("T") = 1.0);

  m.def("diffusion_step",
        [](const Array& values, double mexp, double eps, double dt, std::pair<double, double> x,
           std::pair<double, double> y) {
          const Grid g = grid_for(values, x, y);
          const DensityField f(g, std::vector<double>(values.data(), values.data() + values.size()));
          DiffusionParams p;
          p.m = mexp;
          p.epsilon = eps;
          p.dt = dt;
          return to_array(DiffusionStepper(g).step(f, p).field);
        },
        py::arg("values"), py::arg("m"), py::arg("epsilon"), py::arg("dt"),
        py::arg("x") = std::pair<double, double>{0.0, 1.0}, py::arg("y") = std::pair<double, double>{0.0, 1.0});

  m.def("w2_1d", [](const Array& x, const Array& wx, const Array& y, const Array& wy) {
    return w2_1d(measure(x, wx), measure(y, wy));
  });

  m.def("wp_exact", [](const Array& x, const Array& wx, const Array& y, const Array& wy, double p) {
    return wp_exact(measure(x, wx), measure(y, wy), p).value;
  }, py::arg("x"), py::arg("wx"), py::arg("y"), py::arg("wy"), py::arg("p") = 2.0);
}
