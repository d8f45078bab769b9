#pragma once

// Flat key=value experiment configuration. Model keys are unprefixed
// (p_h, p_l, q_hh, q_ll, c, c_m, beta); everything else lives under
// solver.*, sim.*, qlearn.*, scan.*, poa.* or irm.*. Unknown keys and
// out-of-range values are rejected before anything runs.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pathlearn/model.hpp"
#include "pathlearn/qlearn.hpp"

namespace pathlearn::cli {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  double p_h = 0.9, p_l = 0.1, q_hh = 0.9, q_ll = 0.9, c = 1.0, c_m = 0.5, beta = 0.9;

  std::size_t grid_n = 1001;
  std::size_t grid2d_n = 100;
  double tol = 1e-9;

  std::uint64_t seed = 1;
  std::size_t runs = 10'000;
  std::size_t horizon = 0;  // 0: pick from beta
  double x0 = 0.5;
  std::size_t burn_in = 10'000;
  std::size_t samples = 1'000'000;
  std::size_t batches = 50;

  int K = 2;
  double omega = 0.6;
  double epsilon = 0.1;
  std::uint64_t epochs = 10'000'000;

  std::string axis = "c_m";
  double lo = 0.0, hi = 1.0, step = 0.01;
  int k_min = 1, k_max = 6;

  std::size_t poa_instances = 200;
  double poa_eps = 1e-3;
  double poa_q = 0.999;

  std::string irm_policy = "optimal";

  ModelParams model() const { return ModelParams::create(p_h, p_l, q_hh, q_ll, c, c_m, beta); }
};

namespace detail_cfg {

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const double v = pathlearn::detail::parse_double(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) throw ConfigError(key + ": expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail_cfg

/// Policy source for irm-audit: optimal, myopic, or qlearn:K.
inline void check_policy_source(const std::string& s) {
  if (s == "optimal" || s == "myopic") return;
  if (s.rfind("qlearn:", 0) == 0) {
    const std::string k = s.substr(7);
    if (!k.empty() && k.find_first_not_of("0123456789") == std::string::npos && std::stoi(k) >= 1 &&
        std::stoi(k) <= 8) {
      return;
    }
  }
  throw ConfigError("irm.policy: expected optimal, myopic or qlearn:K with 1 <= K <= 8 (got '" + s + "')");
}

inline void validate(const ExperimentConfig& c) {
  try {
    (void)c.model();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.grid_n < 2) throw ConfigError("solver.grid_n: must be >= 2");
  if (c.grid2d_n < 2) throw ConfigError("solver.grid2d_n: must be >= 2");
  if (!(c.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (c.runs < 2) throw ConfigError("sim.runs: must be >= 2");
  if (!(c.x0 >= 0.0 && c.x0 <= 1.0)) throw ConfigError("sim.x0: must be in [0, 1]");
  if (c.batches < 2 || c.samples < c.batches) throw ConfigError("sim.samples: must be >= sim.batches >= 2");
  if (c.K < 1 || c.K > 8) throw ConfigError("qlearn.K: must be in [1, 8]");
  if (!(c.omega > 0.5 && c.omega <= 1.0)) throw ConfigError("qlearn.omega: must be in (0.5, 1]");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw ConfigError("qlearn.epsilon: must be in [0, 1]");
  if (c.epochs < 1) throw ConfigError("qlearn.epochs: must be >= 1");
  try {
    (void)parse_scan_axis(c.axis);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scan.") + e.what());
  }
  if (!(c.step > 0.0) || !(c.lo <= c.hi)) throw ConfigError("scan.step: need step > 0 and lo <= hi");
  if (c.k_min < 1 || c.k_max < c.k_min || c.k_max > 8) throw ConfigError("scan.k_max: need 1 <= k_min <= k_max <= 8");
  if (c.poa_instances < 1) throw ConfigError("poa.instances: must be >= 1");
  if (!(c.poa_eps > 0.0)) throw ConfigError("poa.eps: must be positive");
  if (!(c.poa_q > 0.5 && c.poa_q < 1.0)) throw ConfigError("poa.q: must be in (1/2, 1)");
  check_policy_source(c.irm_policy);
}

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](double& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = pathlearn::detail::parse_double(k, v); };
  };
  auto count = [](auto& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) {
      f = static_cast<std::remove_reference_t<decltype(f)>>(detail_cfg::parse_count(k, v));
    };
  };
  auto str = [](std::string& f) -> Setter { return [&f](const std::string&, const std::string& v) { f = v; }; };
  const std::map<std::string, Setter> keys = {
      {"p_h", num(c.p_h)},           {"p_l", num(c.p_l)},
      {"q_hh", num(c.q_hh)},         {"q_ll", num(c.q_ll)},
      {"c", num(c.c)},               {"c_m", num(c.c_m)},
      {"beta", num(c.beta)},         {"solver.grid_n", count(c.grid_n)},
      {"solver.grid2d_n", count(c.grid2d_n)}, {"solver.tol", num(c.tol)},
      {"sim.seed", count(c.seed)},   {"sim.runs", count(c.runs)},
      {"sim.horizon", count(c.horizon)}, {"sim.x0", num(c.x0)},
      {"sim.burn_in", count(c.burn_in)}, {"sim.samples", count(c.samples)},
      {"sim.batches", count(c.batches)}, {"qlearn.K", count(c.K)},
      {"qlearn.omega", num(c.omega)}, {"qlearn.epsilon", num(c.epsilon)},
      {"qlearn.epochs", count(c.epochs)}, {"scan.axis", str(c.axis)},
      {"scan.lo", num(c.lo)},        {"scan.hi", num(c.hi)},
      {"scan.step", num(c.step)},    {"scan.k_min", count(c.k_min)},
      {"scan.k_max", count(c.k_max)}, {"poa.instances", count(c.poa_instances)},
      {"poa.eps", num(c.poa_eps)},   {"poa.q", num(c.poa_q)},
      {"irm.policy", str(c.irm_policy)},
  };
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string t = pathlearn::detail::trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
      const std::string key = pathlearn::detail::trim(std::string_view(t).substr(0, eq));
      const std::string value = pathlearn::detail::trim(std::string_view(t).substr(eq + 1));
      const auto it = keys.find(key);
      if (it == keys.end()) throw ConfigError(key + ": unknown key");
      if (seen[key]) throw ConfigError(key + ": duplicate key");
      seen[key] = true;
      it->second(key, value);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("--config: cannot read '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return parse_config(s.str());
}

/// Canonical rendering; parse_config(render(c)) reproduces c.
inline std::string render(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "p_h=" << c.p_h << "\np_l=" << c.p_l << "\nq_hh=" << c.q_hh << "\nq_ll=" << c.q_ll << "\nc=" << c.c
    << "\nc_m=" << c.c_m << "\nbeta=" << c.beta << "\nsolver.grid_n=" << c.grid_n
    << "\nsolver.grid2d_n=" << c.grid2d_n << "\nsolver.tol=" << c.tol << "\nsim.seed=" << c.seed
    << "\nsim.runs=" << c.runs << "\nsim.horizon=" << c.horizon << "\nsim.x0=" << c.x0
    << "\nsim.burn_in=" << c.burn_in << "\nsim.samples=" << c.samples << "\nsim.batches=" << c.batches
    << "\nqlearn.K=" << c.K << "\nqlearn.omega=" << c.omega << "\nqlearn.epsilon=" << c.epsilon
    << "\nqlearn.epochs=" << c.epochs << "\nscan.axis=" << c.axis << "\nscan.lo=" << c.lo << "\nscan.hi=" << c.hi
    << "\nscan.step=" << c.step << "\nscan.k_min=" << c.k_min << "\nscan.k_max=" << c.k_max
    << "\npoa.instances=" << c.poa_instances << "\npoa.eps=" << c.poa_eps << "\npoa.q=" << c.poa_q
    << "\nirm.policy=" << c.irm_policy << "\n";
  return o.str();
}

}  // namespace pathlearn::cli
