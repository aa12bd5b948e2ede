#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stackelberg/baseline.hpp"
#include "stackelberg/checks.hpp"
#include "stackelberg/game_json.hpp"
#include "stackelberg/pev.hpp"
#include "stackelberg/sca.hpp"
#include "stackelberg/vgne.hpp"

namespace py = pybind11;
using namespace stackelberg;

namespace {

using GamePtr = std::shared_ptr<AggregativeGame>;

py::dict trace_dict(const SolveTrace& t) {
  std::vector<int> k, inner;
  std::vector<double> J0, step, stat, eq, compl_max;
  for (const auto& r : t.rows) {
    k.push_back(r.k);
    J0.push_back(r.J0);
    step.push_back(r.step_norm);
    stat.push_back(r.stationarity);
    inner.push_back(r.inner_iters);
    eq.push_back(r.eq_residual);
    compl_max.push_back(r.compl_max);
  }
  py::dict d;
  d["k"] = k;
  d["J0"] = J0;
  d["step_norm"] = step;
  d["stationarity"] = stat;
  d["inner_iters"] = inner;
  d["eq_residual"] = eq;
  d["compl_max"] = compl_max;
  d["warnings"] = t.warnings;
  return d;
}

ScaConfig make_config(double sigma, std::optional<double> alpha, bool vanishing, const std::string& inner, double tol,
                      int max_outer) {
  ScaConfig cfg;
  cfg.sigma = sigma;
  cfg.alpha = alpha;
  cfg.vanishing = vanishing;
  cfg.inner = parse_inner_solver(inner);
  cfg.outer_tol = tol;
  cfg.max_outer = max_outer;
  return cfg;
}

py::dict solve(const GamePtr& game, double theta, double sigma, std::optional<double> alpha, bool vanishing,
               const std::string& inner, double tol, int max_outer, std::optional<Vec> y0) {
  auto sys = std::make_shared<const StackedSystem>(game);
  const auto params = RelaxationParams::uniform(theta, game->N());
  const ScaConfig cfg = make_config(sigma, alpha, vanishing, inner, tol, max_outer);
  ScaResult r;
  {
    py::gil_scoped_release release;
    r = run(sys, params, cfg, feasible_init(*sys, params, y0.value_or(game->y0_midpoint())));
  }
  py::dict d;
  d["y0"] = Vec(r.omega.y0());
  d["x"] = Vec(r.omega.x());
  d["omega"] = r.omega.data;
  d["J0"] = game->leader_cost(Vec(r.omega.y0()), Vec(r.omega.x()));
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["stop_reason"] = r.stop_reason;
  d["alpha"] = r.alpha;
  d["trace"] = trace_dict(r.trace);
  return d;
}

py::dict check_dict(const CheckResult& c) {
  py::dict d;
  d["name"] = c.name;
  d["pass"] = c.pass;
  d["worst"] = c.worst;
  d["detail"] = c.detail;
  return d;
}

}  // namespace

PYBIND11_MODULE(_stackelberg, m) {
  m.doc() = "Two-layer SCA solver for Stackelberg games with aggregative followers";

  py::register_exception<Error>(m, "SolverError");
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<PevParams>(m, "PevParams")
      .def(py::init<>())
      .def_readwrite("N", &PevParams::N)
      .def_readwrite("T", &PevParams::T)
      .def_readwrite("q", &PevParams::q)
      .def_readwrite("c", &PevParams::c)
      .def_readwrite("kappa_mean", &PevParams::kappa_mean)
      .def_readwrite("kappa_sd", &PevParams::kappa_sd)
      .def_readwrite("s_lo", &PevParams::s_lo)
      .def_readwrite("s_hi", &PevParams::s_hi)
      .def_readwrite("delta", &PevParams::delta)
      .def_readwrite("D", &PevParams::D)
      .def_readwrite("capacity", &PevParams::capacity)
      .def_readwrite("x_lo", &PevParams::x_lo)
      .def_readwrite("x_hi", &PevParams::x_hi)
      .def_readwrite("p_bar", &PevParams::p_bar)
      .def_readwrite("seed", &PevParams::seed);

  py::class_<AggregativeGame, GamePtr>(m, "Game")
      .def_property_readonly("N", &AggregativeGame::N)
      .def_property_readonly("n", &AggregativeGame::n)
      .def_property_readonly("n0", &AggregativeGame::n0)
      .def_property_readonly("m", &AggregativeGame::m)
      .def("pseudo_gradient", &AggregativeGame::pseudo_gradient, py::arg("y0"), py::arg("x"))
      .def("leader_cost", &AggregativeGame::leader_cost, py::arg("y0"), py::arg("x"))
      .def("leader_grad", &AggregativeGame::leader_grad, py::arg("y0"), py::arg("x"))
      .def("y0_midpoint", &AggregativeGame::y0_midpoint)
      .def("to_json", [](const AggregativeGame& g) { return game_to_json(g).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return std::make_shared<AggregativeGame>(game_from_json(nlohmann::json::parse(text)));
      });

  m.def(
      "generate_instance",
      [](const PevParams& p) { return std::make_shared<AggregativeGame>(generate_instance(p)); },
      py::arg("params"));

  m.def(
      "solve_vgne",
      [](const GamePtr& game, const Vec& y0) {
        const auto s = solve_vgne(*game, y0);
        py::dict d;
        d["x"] = s.x;
        d["lambda"] = s.lambda;
        d["lambda_local"] = s.lambda_local;
        d["kkt_residual"] = s.kkt_residual;
        d["vi_residual"] = s.vi_residual;
        d["iterations"] = s.iterations;
        return d;
      },
      py::arg("game"), py::arg("y0"));

  m.def("solve", &solve, py::arg("game"), py::arg("theta") = 1e-2, py::arg("sigma") = 1.0,
        py::arg("alpha") = py::none(), py::arg("vanishing") = false, py::arg("inner") = "adal",
        py::arg("tol") = 1e-4, py::arg("max_outer") = 500, py::arg("y0") = py::none(),
        "Two-layer SCA from the relaxed-feasible point at y0 (midpoint of Y0 by default).");

  m.def(
      "naive",
      [](const GamePtr& game, double tol, int max_iter, double beta) {
        NaiveConfig cfg;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.beta_constant = beta;
        const auto r = naive_run(*game, cfg);
        std::vector<double> J0;
        for (const auto& row : r.trace.rows) J0.push_back(row.J0);
        py::dict d;
        d["y0"] = r.y0;
        d["x"] = r.x;
        d["converged"] = r.converged;
        d["iterations"] = r.iterations;
        d["J0"] = J0;
        return d;
      },
      py::arg("game"), py::arg("tol") = 1e-4, py::arg("max_iter") = 500, py::arg("beta") = 0.0,
      "Naive alternating baseline; beta = 0 selects the 1/k schedule.");

  m.def(
      "theta_sweep",
      [](const PevParams& p, std::vector<double> grid, double sigma, const std::string& inner, int max_outer) {
        ScaConfig cfg = make_config(sigma, std::nullopt, false, inner, 1e-4, max_outer);
        SweepReport r;
        {
          py::gil_scoped_release release;
          r = theta_sweep(p, std::move(grid), cfg);
        }
        return r.to_json();
      },
      py::arg("params"), py::arg("grid") = default_theta_grid(), py::arg("sigma") = 1.0,
      py::arg("inner") = "reference", py::arg("max_outer") = 500, "Returns the sweep report as JSON text.");

  m.def("default_theta_grid", &default_theta_grid);

  m.def(
      "check_gradients",
      [](const GamePtr& game, int samples, std::uint64_t seed) {
        return std::vector<py::dict>{check_dict(check_pseudo_gradient(*game, samples, seed)),
                                     check_dict(check_leader_gradient(*game, samples, seed + 1))};
      },
      py::arg("game"), py::arg("samples") = 20, py::arg("seed") = 1);
}
