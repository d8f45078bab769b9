#pragma once

// Monte Carlo engine for the two-path world.
//
// Every epoch draws exactly two uniforms from the stream (report, then chain
// move), whatever action is taken. Two runs with the same seed therefore see
// the same hidden-state path and the same report draws.

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "pathlearn/model.hpp"

namespace pathlearn {

using BeliefPolicy = std::function<Action(Belief)>;

struct EpochRecord {
  PathState state;
  Belief belief;  ///< prior held before the trip
  Action action;
  Observation observation;
  double cost;
};

struct Trajectory {
  std::vector<EpochRecord> epochs;
  std::uint64_t seed;
  ModelParams params;
};

/// Chain-move draw shared by every simulator in the library.
inline PathState advance_state(PathState s, const ModelParams& m, double u) {
  if (s == PathState::H) return u < m.q_hh() ? PathState::H : PathState::L;
  return u < m.q_ll() ? PathState::L : PathState::H;
}

/// Trip outcome for a P1 traveler given a uniform draw.
inline bool hazard_occurs(PathState s, const ModelParams& m, double u) {
  return u < (s == PathState::H ? m.p_h() : m.p_l());
}

/// Simulates `horizon` epochs. The initial hidden state is drawn from the
/// belief x0, so x0 is a correct prior for it.
inline Trajectory run_episode(const BeliefPolicy& policy, const ModelParams& m, std::size_t horizon,
                              std::uint64_t seed, Belief x0) {
  if (horizon < 1) throw std::invalid_argument("horizon: must be >= 1");
  Rng rng(seed);
  Trajectory tr{{}, seed, m};
  tr.epochs.reserve(horizon);
  PathState s = rng.uniform() < x0 ? PathState::H : PathState::L;
  Belief x = x0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double u_obs = rng.uniform();
    const double u_move = rng.uniform();
    const Action a = policy(x);
    Observation y = Observation::NoInfo;
    double cost = m.c_m();
    if (a == Action::P1) {
      const bool hazard = hazard_occurs(s, m, u_obs);
      y = hazard ? Observation::Hazard : Observation::NoHazard;
      cost = hazard ? m.c() : 0.0;
    }
    tr.epochs.push_back({s, x, a, y, cost});
    x = belief_step(x, a, y, m);
    s = advance_state(s, m, u_move);
  }
  return tr;
}

inline double discounted_cost(const Trajectory& tr) {
  double total = 0.0, w = 1.0;
  for (const auto& e : tr.epochs) {
    total += w * e.cost;
    w *= tr.params.beta();
  }
  return total;
}

struct EstimateCI {
  double mean = 0.0;
  double halfwidth_3sigma = 0.0;
  std::size_t n_runs = 0;
  double truncation_bound = 0.0;  ///< max cost of the epochs beyond the horizon
};

/// Smallest horizon whose truncation bias is below 1e-4 c/(1-beta).
inline std::size_t default_horizon(const ModelParams& m) {
  if (m.beta() <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(1e-4) / std::log(m.beta())));
}

inline EstimateCI estimate_discounted_cost(const BeliefPolicy& policy, const ModelParams& m, Belief x0,
                                           std::size_t n_runs, std::size_t horizon, std::uint64_t seed) {
  if (n_runs < 2) throw std::invalid_argument("n_runs: need at least 2 runs");
  double mean = 0.0, m2 = 0.0;  // Welford
  for (std::size_t r = 0; r < n_runs; ++r) {
    const double v = discounted_cost(run_episode(policy, m, horizon, splitmix64(seed + r), x0));
    const double d = v - mean;
    mean += d / static_cast<double>(r + 1);
    m2 += d * (v - mean);
  }
  const double n = static_cast<double>(n_runs);
  const double var = std::max(0.0, m2 / (n - 1.0));
  EstimateCI est;
  est.mean = mean;
  est.halfwidth_3sigma = 3.0 * std::sqrt(var / n);
  est.n_runs = n_runs;
  est.truncation_bound = std::pow(m.beta(), static_cast<double>(horizon)) * m.c() / (1.0 - m.beta());
  return est;
}

/// Debug dump: t, state, belief, action, obs, cost.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  const auto old = out.precision(17);
  out << "t,state,belief,action,obs,cost\n";
  for (std::size_t t = 0; t < tr.epochs.size(); ++t) {
    const auto& e = tr.epochs[t];
    out << t + 1 << ',' << to_string(e.state) << ',' << e.belief << ',' << to_string(e.action) << ','
        << to_string(e.observation) << ',' << e.cost << '\n';
  }
  out.precision(old);
}

}  // namespace pathlearn
