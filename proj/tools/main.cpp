// Command-line front end. Exit codes: 0 success, 1 input error, 2 solver
// nonconvergence or a failed check.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "stackelberg/baseline.hpp"
#include "stackelberg/checks.hpp"
#include "stackelberg/config.hpp"
#include "stackelberg/game_json.hpp"
#include "stackelberg/pev.hpp"
#include "stackelberg/sca.hpp"
#include "stackelberg/vgne.hpp"

namespace sb = stackelberg;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Common {
  std::string config;
  std::string game;
  std::string out;
  std::optional<long> N;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

struct SolveFlags {
  std::optional<double> theta;
  std::optional<double> sigma;
  std::string alpha;
  std::string inner;
  std::optional<double> tol;
  std::optional<int> max_outer;
  std::string trace;
};

void add_common(CLI::App* cmd, Common& c, bool with_game = true) {
  cmd->add_option("--config", c.config, "run configuration (JSON)");
  if (with_game) cmd->add_option("--game", c.game, "game instance (JSON); the PEV instance is generated otherwise");
  cmd->add_option("--out", c.out, "output file (stdout when omitted)");
  cmd->add_option("--N", c.N, "number of vehicles for the generated PEV instance");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--threads", c.threads, "worker threads (overrides SOLVER_THREADS)");
}

sb::RunConfig resolve(const Common& c) {
  sb::RunConfig cfg = c.config.empty() ? sb::RunConfig{} : sb::load_run_config(c.config);
  if (c.N) cfg.pev.N = *c.N;
  if (c.seed) cfg.pev.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.game.empty()) cfg.io.game = c.game;
  if (!c.out.empty()) cfg.io.output = c.out;
  if (cfg.threads > 0) setenv("SOLVER_THREADS", std::to_string(cfg.threads).c_str(), 1);
  cfg.pev.validate();
  return cfg;
}

void apply_solve_flags(const SolveFlags& f, sb::RunConfig& cfg) {
  if (f.theta) {
    if (!(*f.theta > 0.0)) throw sb::PreconditionError("--theta must be positive");
    cfg.theta = *f.theta;
  }
  if (f.sigma) cfg.sca.sigma = *f.sigma;
  if (!f.alpha.empty()) {
    if (f.alpha == "vanishing") {
      cfg.sca.vanishing = true;
    } else {
      try {
        cfg.sca.alpha = std::stod(f.alpha);
      } catch (const std::exception&) {
        throw sb::PreconditionError("--alpha must be a number or 'vanishing'");
      }
    }
  }
  if (!f.inner.empty()) cfg.sca.inner = sb::parse_inner_solver(f.inner);
  if (f.tol) cfg.sca.outer_tol = *f.tol;
  if (f.max_outer) cfg.sca.max_outer = *f.max_outer;
  if (!f.trace.empty()) cfg.io.trace = f.trace;
}

std::shared_ptr<const sb::AggregativeGame> make_game(const sb::RunConfig& cfg) {
  if (!cfg.io.game.empty()) return std::make_shared<const sb::AggregativeGame>(sb::load_game(cfg.io.game));
  return std::make_shared<const sb::AggregativeGame>(sb::generate_instance(cfg.pev));
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw sb::PreconditionError("cannot write '" + path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw sb::PreconditionError("cannot write '" + path + "'");
  writer(out);
}

json to_json(const Eigen::Ref<const sb::Vec>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

sb::Vec parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw sb::PreconditionError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return Eigen::Map<sb::Vec>(values.data(), static_cast<sb::Index>(values.size()));
}

int cmd_generate(const Common& c) {
  const auto cfg = resolve(c);
  emit(cfg.io.output, sb::game_to_json(sb::generate_instance(cfg.pev)).dump());
  return kOk;
}

int cmd_solve(const Common& c, const SolveFlags& f) {
  auto cfg = resolve(c);
  apply_solve_flags(f, cfg);
  auto game = make_game(cfg);
  auto sys = std::make_shared<const sb::StackedSystem>(game);
  const auto relax = cfg.relaxation(game->N());
  const auto w0 = sb::feasible_init(*sys, relax, game->y0_midpoint());
  const auto result = sb::run(sys, relax, cfg.sca, w0);
  if (!cfg.io.trace.empty()) write_file(cfg.io.trace, [&](std::ostream& out) { result.trace.write_csv(out); });
  for (const auto& w : result.trace.warnings) std::cerr << "warning: " << w << '\n';
  json j;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["stop_reason"] = result.stop_reason;
  j["alpha"] = result.alpha;
  j["J0"] = game->leader_cost(sb::Vec(result.omega.y0()), sb::Vec(result.omega.x()));
  j["y0"] = to_json(result.omega.y0());
  j["x"] = to_json(result.omega.x());
  j["lambda"] = to_json(result.omega.lambda());
  j["mu"] = to_json(result.omega.mu());
  j["warnings"] = result.trace.warnings;
  j["licq"] = {{"checked", result.licq.checked}, {"holds", result.licq.holds}, {"note", result.licq.note}};
  emit(cfg.io.output, j.dump(2));
  if (!result.converged) {
    std::cerr << "outer loop stopped at max_outer without meeting the tolerance\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_vgne(const Common& c, const std::string& y0_text) {
  const auto cfg = resolve(c);
  auto game = make_game(cfg);
  sb::Vec y0 = y0_text.empty() ? game->y0_midpoint() : parse_list(y0_text, "--y0");
  if (y0.size() != game->n0()) throw sb::PreconditionError("--y0 must have n0 entries");
  const auto sol = sb::solve_vgne(*game, y0);
  json j;
  j["x"] = to_json(sol.x);
  j["lambda"] = to_json(sol.lambda);
  j["vi_residual"] = sol.vi_residual;
  j["kkt_residual"] = sol.kkt_residual;
  j["iterations"] = sol.iterations;
  emit(cfg.io.output, j.dump(2));
  return kOk;
}

int cmd_naive(const Common& c, const std::string& trace) {
  const auto cfg = resolve(c);
  auto game = make_game(cfg);
  const auto result = sb::naive_run(*game, cfg.naive);
  const std::string trace_path = trace.empty() ? cfg.io.trace : trace;
  if (!trace_path.empty()) write_file(trace_path, [&](std::ostream& out) { result.trace.write_csv(out); });
  json j;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["J0"] = game->leader_cost(result.y0, result.x);
  j["y0"] = to_json(result.y0);
  j["x"] = to_json(result.x);
  emit(cfg.io.output, j.dump(2));
  return result.converged ? kOk : kNotConverged;
}

int cmd_sweep(const Common& c, const SolveFlags& f, const std::string& grid_text, const std::string& csv) {
  auto cfg = resolve(c);
  apply_solve_flags(f, cfg);
  std::vector<double> grid = sb::default_theta_grid();
  if (!grid_text.empty()) {
    const sb::Vec g = parse_list(grid_text, "--grid");
    grid.assign(g.data(), g.data() + g.size());
  }
  const auto report = sb::theta_sweep(cfg.pev, grid, cfg.sca, cfg.naive);
  if (!csv.empty()) write_file(csv, [&](std::ostream& out) { report.write_csv(out); });
  emit(cfg.io.output, report.to_json());
  for (const auto& p : report.points) {
    if (p.status != "ok") return kNotConverged;
  }
  return kOk;
}

int cmd_compare(const Common& c, const SolveFlags& f, int seeds, const std::string& csv) {
  auto cfg = resolve(c);
  apply_solve_flags(f, cfg);
  if (seeds <= 0) throw sb::PreconditionError("--seeds must be positive");
  std::vector<std::uint64_t> list;
  for (int k = 0; k < seeds; ++k) list.push_back(cfg.pev.seed + static_cast<std::uint64_t>(k));
  const auto report = sb::compare_algorithms(cfg.pev, list, cfg.sca, cfg.naive, cfg.theta);
  if (!csv.empty()) write_file(csv, [&](std::ostream& out) { report.write_csv(out); });
  emit(cfg.io.output, report.to_json());
  for (const auto& r : report.runs) {
    if (r.status != "ok") return kNotConverged;
  }
  return kOk;
}

int cmd_check(const Common& c, const SolveFlags& f) {
  auto cfg = resolve(c);
  apply_solve_flags(f, cfg);
  auto game = make_game(cfg);
  auto sys = std::make_shared<const sb::StackedSystem>(game);
  const auto relax = cfg.relaxation(game->N());
  std::vector<sb::CheckResult> results;

  const auto diag = sb::diagnose(*game);
  sb::CheckResult standing{"standing assumptions", diag.ok(), 0.0, ""};
  for (const auto& m : diag.messages) standing.detail += (standing.detail.empty() ? "" : "; ") + m;
  results.push_back(standing);
  results.push_back(sb::check_pseudo_gradient(*game, 20, cfg.pev.seed));
  results.push_back(sb::check_leader_gradient(*game, 20, cfg.pev.seed + 1));
  results.push_back(sb::check_antidiagonal_identity(game->m(), 20, cfg.pev.seed + 2));

  const auto points = sb::sample_relaxed_points(*sys, relax, 4, cfg.pev.seed + 3);
  double worst_eq = 0.0;
  for (const auto& w : points) worst_eq = std::max(worst_eq, sb::residuals(*sys, relax, w).equality);
  results.push_back({"sampled points satisfy A w = d", worst_eq <= 1e-8, worst_eq,
                     "max residual " + sci(worst_eq)});
  results.push_back(sb::check_strong_convexity(*sys, points, cfg.sca.sigma, 100, cfg.pev.seed + 4));
  results.push_back(sb::check_anchor_lipschitz(*sys, points, cfg.sca.sigma, 100, cfg.pev.seed + 5));

  json j = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
    j.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    ok = ok && r.pass;
  }
  emit(cfg.io.output, j.dump(2));
  return ok ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local Stackelberg equilibria of aggregative games via relaxed complementarity and SCA"};
  app.require_subcommand(1);

  Common common;
  SolveFlags flags;
  auto add_solve_flags = [&](CLI::App* cmd) {
    cmd->add_option("--theta", flags.theta, "relaxation parameter (coordinator and every follower)");
    cmd->add_option("--sigma", flags.sigma, "proximal weight");
    cmd->add_option("--alpha", flags.alpha, "fixed outer step, or 'vanishing'");
    cmd->add_option("--inner", flags.inner, "inner solver: adal or reference");
    cmd->add_option("--tol", flags.tol, "outer stopping tolerance");
    cmd->add_option("--max-outer", flags.max_outer, "outer iteration cap");
  };

  auto* generate = app.add_subcommand("generate", "emit the PEV game as JSON");
  add_common(generate, common, false);

  auto* solve = app.add_subcommand("solve", "two-layer SCA solve");
  add_common(solve, common);
  add_solve_flags(solve);
  solve->add_option("--trace", flags.trace, "per-iteration CSV");

  std::string y0_text;
  auto* vgne = app.add_subcommand("vgne", "followers' v-GNE for a fixed leader decision");
  add_common(vgne, common);
  vgne->add_option("--y0", y0_text, "comma separated leader decision (midpoint of Y0 when omitted)");

  std::string naive_trace;
  auto* naive = app.add_subcommand("naive", "naive alternating baseline");
  add_common(naive, common);
  naive->add_option("--trace", naive_trace, "per-iteration CSV");

  std::string grid_text, csv;
  auto* sweep = app.add_subcommand("sweep-theta", "relaxation trade-off sweep on the PEV instance");
  add_common(sweep, common, false);
  add_solve_flags(sweep);
  sweep->add_option("--grid", grid_text, "comma separated theta values");
  sweep->add_option("--csv", csv, "CSV report");

  int seeds = 10;
  auto* compare = app.add_subcommand("compare", "SCA against the naive baseline over several seeds");
  add_common(compare, common, false);
  add_solve_flags(compare);
  compare->add_option("--seeds", seeds, "number of consecutive seeds starting at --seed");
  compare->add_option("--csv", csv, "CSV report");

  auto* check = app.add_subcommand("check", "run the invariant suite on an instance");
  add_common(check, common);
  add_solve_flags(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*generate) return cmd_generate(common);
    if (*solve) return cmd_solve(common, flags);
    if (*vgne) return cmd_vgne(common, y0_text);
    if (*naive) return cmd_naive(common, naive_trace);
    if (*sweep) return cmd_sweep(common, flags, grid_text, csv);
    if (*compare) return cmd_compare(common, flags, seeds, csv);
    if (*check) return cmd_check(common, flags);
  } catch (const sb::PreconditionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const sb::StructuralError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const sb::UnsupportedFormError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const sb::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kNotConverged;
  }
  return kInputError;
}
