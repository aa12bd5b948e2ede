#include "stackelberg/config.hpp"

#include <fstream>
#include <initializer_list>

namespace stackelberg {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw PreconditionError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw PreconditionError("unknown configuration key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw PreconditionError("configuration key '" + where + "." + key + "' has the wrong type");
  }
}

Vec read_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw PreconditionError("configuration key '" + where + "' must be an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw PreconditionError("configuration key '" + where + "' must hold numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

void parse_sca(const json& j, ScaConfig& cfg) {
  check_keys(j, "sca", {"sigma", "alpha", "outer_tol", "max_outer", "inner", "descent_tol", "monotone_slack",
                        "check_licq", "licq_max_dim", "warm_start_dual"});
  read(j, "sigma", cfg.sigma, "sca");
  if (j.contains("alpha")) {
    const json& a = j.at("alpha");
    if (a.is_string() && a.get<std::string>() == "vanishing") {
      cfg.vanishing = true;
    } else if (a.is_number()) {
      cfg.alpha = a.get<double>();
    } else {
      throw PreconditionError("sca.alpha must be a number or \"vanishing\"");
    }
  }
  read(j, "outer_tol", cfg.outer_tol, "sca");
  read(j, "max_outer", cfg.max_outer, "sca");
  if (j.contains("inner")) {
    if (!j.at("inner").is_string()) throw PreconditionError("sca.inner must be a string");
    cfg.inner = parse_inner_solver(j.at("inner").get<std::string>());
  }
  read(j, "descent_tol", cfg.descent_tol, "sca");
  read(j, "monotone_slack", cfg.monotone_slack, "sca");
  read(j, "check_licq", cfg.check_licq, "sca");
  read(j, "licq_max_dim", cfg.licq_max_dim, "sca");
  read(j, "warm_start_dual", cfg.warm_start_dual, "sca");
}

void parse_adal(const json& j, AdalConfig& cfg) {
  check_keys(j, "adal", {"rho", "tau", "tol", "max_inner", "block_tol", "max_rho_doublings", "coupling_scale"});
  read(j, "rho", cfg.rho, "adal");
  read(j, "tau", cfg.tau, "adal");
  read(j, "tol", cfg.tol, "adal");
  read(j, "max_inner", cfg.max_inner, "adal");
  read(j, "block_tol", cfg.block_tol, "adal");
  read(j, "max_rho_doublings", cfg.max_rho_doublings, "adal");
  read(j, "coupling_scale", cfg.coupling_scale, "adal");
  cfg.validate();
}

void parse_reference(const json& j, ReferenceOptions& cfg) {
  check_keys(j, "reference", {"tol", "max_iter", "memory"});
  read(j, "tol", cfg.tol, "reference");
  read(j, "max_iter", cfg.max_iter, "reference");
  read(j, "memory", cfg.memory, "reference");
}

void parse_naive(const json& j, NaiveConfig& cfg) {
  check_keys(j, "naive", {"beta", "tol", "max_iter"});
  if (j.contains("beta")) {
    const json& b = j.at("beta");
    if (b.is_string() && b.get<std::string>() == "1/k") {
      cfg.beta_constant = 0.0;
    } else if (b.is_number()) {
      cfg.beta_constant = b.get<double>();
    } else {
      throw PreconditionError("naive.beta must be a number or \"1/k\"");
    }
  }
  read(j, "tol", cfg.tol, "naive");
  read(j, "max_iter", cfg.max_iter, "naive");
  cfg.validate();
}

void parse_pev(const json& j, PevParams& p) {
  check_keys(j, "pev", {"N", "T", "q", "c", "kappa_mean", "kappa_sd", "s_lo", "s_hi", "delta", "D", "capacity",
                        "x_lo", "x_hi", "p_bar"});
  read(j, "N", p.N, "pev");
  read(j, "T", p.T, "pev");
  read(j, "q", p.q, "pev");
  read(j, "c", p.c, "pev");
  read(j, "kappa_mean", p.kappa_mean, "pev");
  read(j, "kappa_sd", p.kappa_sd, "pev");
  read(j, "s_lo", p.s_lo, "pev");
  read(j, "s_hi", p.s_hi, "pev");
  read(j, "delta", p.delta, "pev");
  if (j.contains("D")) p.D = read_vec(j.at("D"), "pev.D");
  if (j.contains("capacity")) p.capacity = read_vec(j.at("capacity"), "pev.capacity");
  read(j, "x_lo", p.x_lo, "pev");
  read(j, "x_hi", p.x_hi, "pev");
  read(j, "p_bar", p.p_bar, "pev");
  p.validate();
}

}  // namespace

RelaxationParams RunConfig::relaxation(Index followers) const {
  RelaxationParams params = RelaxationParams::uniform(theta, followers);
  if (theta_i) {
    if (theta_i->size() == 1) {
      params.theta_i = Vec::Constant(followers, (*theta_i)[0]);
    } else if (theta_i->size() == followers) {
      params.theta_i = *theta_i;
    } else {
      throw PreconditionError("relaxation.theta_i must have one entry per follower");
    }
  }
  params.validate(followers);
  return params;
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  check_keys(j, "config", {"sca", "adal", "reference", "naive", "relaxation", "pev", "io", "seed", "threads"});
  if (j.contains("sca")) parse_sca(j.at("sca"), cfg.sca);
  if (j.contains("adal")) parse_adal(j.at("adal"), cfg.sca.adal);
  if (j.contains("reference")) parse_reference(j.at("reference"), cfg.sca.reference);
  if (j.contains("naive")) parse_naive(j.at("naive"), cfg.naive);
  if (j.contains("relaxation")) {
    const json& r = j.at("relaxation");
    check_keys(r, "relaxation", {"theta", "theta_i"});
    read(r, "theta", cfg.theta, "relaxation");
    if (!(cfg.theta > 0.0)) throw PreconditionError("relaxation.theta must be positive");
    if (r.contains("theta_i")) {
      const json& t = r.at("theta_i");
      cfg.theta_i = t.is_number() ? Vec::Constant(1, t.get<double>()) : read_vec(t, "relaxation.theta_i");
    }
  }
  if (j.contains("pev")) parse_pev(j.at("pev"), cfg.pev);
  if (j.contains("io")) {
    const json& io = j.at("io");
    check_keys(io, "io", {"game", "trace", "output"});
    read(io, "game", cfg.io.game, "io");
    read(io, "trace", cfg.io.trace, "io");
    read(io, "output", cfg.io.output, "io");
  }
  read(j, "seed", cfg.pev.seed, "config");
  read(j, "threads", cfg.threads, "config");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw PreconditionError("'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace stackelberg
