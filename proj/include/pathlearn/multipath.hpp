#pragma once

// Three parallel paths: two independent stochastic paths P1 and P1' that
// share one Markov model, plus the deterministic P2.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathlearn/exact_solver.hpp"
#include "pathlearn/qlearn.hpp"

namespace pathlearn {

enum class Action3 : std::uint8_t { P1, P1Prime, P2 };

inline const char* to_string(Action3 a) {
  switch (a) {
    case Action3::P1: return "P1";
    case Action3::P1Prime: return "P1'";
    case Action3::P2: return "P2";
  }
  return "?";
}

struct Belief2 {
  Belief x1;   ///< belief for P1
  Belief x1p;  ///< belief for P1'
};

/// Values on an n-by-n grid over [0,1]^2, row index for x1. Off-grid points
/// use bilinear interpolation summed in an order that is exactly symmetric
/// under swapping the arguments when the node values are symmetric.
struct ValueFunction2D {
  BeliefGrid grid;
  std::vector<double> values;  ///< values[i*n + j] = V(node i, node j)

  static ValueFunction2D zeros(BeliefGrid g) { return {g, std::vector<double>(g.size() * g.size(), 0.0)}; }

  std::size_t n() const { return grid.size(); }
  double node_value(std::size_t i, std::size_t j) const { return values[i * n() + j]; }

  double operator()(double a, double b) const {
    const auto [i, u] = grid.locate(a);
    const auto [j, v] = grid.locate(b);
    const std::size_t N = n();
    const double u0 = 1.0 - u, v0 = 1.0 - v;
    const double d00 = (u0 * v0) * values[i * N + j];
    const double d11 = (u * v) * values[(i + 1) * N + j + 1];
    const double d10 = (u * v0) * values[(i + 1) * N + j];
    const double d01 = (u0 * v) * values[i * N + j + 1];
    return (d00 + d11) + (d10 + d01);
  }

  /// max |V(a,b) - V(b,a)| over nodes.
  double symmetry_residual() const {
    double r = 0.0;
    for (std::size_t i = 0; i < n(); ++i) {
      for (std::size_t j = 0; j < i; ++j) r = std::max(r, std::abs(node_value(i, j) - node_value(j, i)));
    }
    return r;
  }
};

struct Q3 {
  double p1;
  double p1p;
  double p2;
};

/// Ties resolve P1, then P1', then P2.
inline Action3 argmin_action(const Q3& q) {
  if (q.p1 <= q.p1p && q.p1 <= q.p2) return Action3::P1;
  if (q.p1p <= q.p2) return Action3::P1Prime;
  return Action3::P2;
}

/// Lookahead costs: the explored path gets Bayes plus transition, the other
/// path (or both, for P2) only the transition.
inline Q3 q_values_3(Belief2 x, const ValueFunction2D& V, const ModelParams& m) {
  const double beta = m.beta();
  const double t1 = transition_prior(x.x1, m);
  const double t1p = transition_prior(x.x1p, m);
  const double h1 = hazard_probability(x.x1, m);
  const double h1p = hazard_probability(x.x1p, m);
  const double a1 = belief_step(x.x1, Action::P1, Observation::Hazard, m);
  const double b1 = belief_step(x.x1, Action::P1, Observation::NoHazard, m);
  const double a1p = belief_step(x.x1p, Action::P1, Observation::Hazard, m);
  const double b1p = belief_step(x.x1p, Action::P1, Observation::NoHazard, m);
  Q3 q;
  q.p1 = expected_p1_cost(x.x1, m) + beta * (h1 * V(a1, t1p) + (1.0 - h1) * V(b1, t1p));
  q.p1p = expected_p1_cost(x.x1p, m) + beta * (h1p * V(t1, a1p) + (1.0 - h1p) * V(t1, b1p));
  q.p2 = m.c_m() + beta * V(t1, t1p);
  return q;
}

inline ValueFunction2D bellman_backup_3(const ValueFunction2D& V, const ModelParams& m) {
  ValueFunction2D out{V.grid, std::vector<double>(V.values.size())};
  const std::size_t n = V.n();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Q3 q = q_values_3({V.grid.node(i), V.grid.node(j)}, V, m);
      out.values[i * n + j] = std::min({q.p1, q.p1p, q.p2});
    }
  }
  return out;
}

struct Solve3Result {
  ValueFunction2D value;
  int iterations;
  double last_change;
};

inline Solve3Result solve_3path(const ModelParams& m, BeliefGrid grid = BeliefGrid{100}, double tol = 1e-9) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol: must be positive");
  const double beta = m.beta();
  const double stop = beta > 0.0 ? tol * (1.0 - beta) / beta : std::numeric_limits<double>::infinity();
  Solve3Result r{ValueFunction2D::zeros(grid), 0, 0.0};
  while (true) {
    ValueFunction2D next = bellman_backup_3(r.value, m);
    r.last_change = sup_distance(next.values, r.value.values);
    r.value = std::move(next);
    ++r.iterations;
    if (r.last_change < stop || r.iterations >= 10'000'000) break;
  }
  return r;
}

struct PolicyMap3 {
  BeliefGrid grid;
  std::vector<Action3> actions;  ///< actions[i*n + j]

  Action3 at(std::size_t i, std::size_t j) const { return actions[i * grid.size() + j]; }
};

inline PolicyMap3 policy_map_3(const ValueFunction2D& V, const ModelParams& m) {
  const std::size_t n = V.n();
  PolicyMap3 p{V.grid, std::vector<Action3>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p.actions[i * n + j] = argmin_action(q_values_3({V.grid.node(i), V.grid.node(j)}, V, m));
    }
  }
  return p;
}

inline Action3 mirror(Action3 a) {
  if (a == Action3::P1) return Action3::P1Prime;
  if (a == Action3::P1Prime) return Action3::P1;
  return a;
}

/// CSV columns: x1, x1p, action.
inline void write_policy_map_csv(std::ostream& out, const PolicyMap3& p) {
  const auto old = out.precision(17);
  out << "x1,x1p,action\n";
  const std::size_t n = p.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out << p.grid.node(i) << ',' << p.grid.node(j) << ',' << to_string(p.at(i, j)) << '\n';
    }
  }
  out.precision(old);
}

// Q-learning over the pair of per-path K-windows. The path not traveled
// receives a no-information entry; P2 gives both paths one.

/// Largest window length accepted by the three-path learner.
inline constexpr int kMaxJointWindow = 4;

struct JointWindowModel {
  WindowModel single;
  std::size_t count;  ///< 3^K per path

  JointWindowModel(int K, const ModelParams& m) : single(K, m), count(single.count) {
    if (K > kMaxJointWindow) {
      throw std::invalid_argument("K: joint window space 9^" + std::to_string(K) + " = " +
                                  std::to_string(count * count) + " states exceeds the K <= 4 limit");
    }
  }

  std::size_t joint(std::size_t w1, std::size_t w2) const { return w1 * count + w2; }
};

/// Action values per joint window, entry index 3*joint + action.
struct QTable3 {
  int K = 1;
  std::vector<double> values;

  double at(std::size_t jw, Action3 a) const { return values[3 * jw + static_cast<std::size_t>(a)]; }
  double min_at(std::size_t jw) const {
    return std::min({values[3 * jw], values[3 * jw + 1], values[3 * jw + 2]});
  }
  Action3 greedy(std::size_t jw) const {
    return argmin_action(Q3{values[3 * jw], values[3 * jw + 1], values[3 * jw + 2]});
  }
};

struct AsymptoticQ3Result {
  QTable3 table;
  int iterations = 0;
  double residual = 0.0;
};

inline AsymptoticQ3Result asymptotic_q_3(const ModelParams& m, int K, double tol = 1e-10) {
  const JointWindowModel jm(K, m);
  const auto& wm = jm.single;
  const std::size_t ny = jm.count;
  const double beta = m.beta();
  const double stop = beta > 0.0 ? tol * (1.0 - beta) / beta : std::numeric_limits<double>::infinity();
  AsymptoticQ3Result r;
  r.table = {K, std::vector<double>(3 * ny * ny, 0.0)};
  std::vector<double> next(r.table.values.size());
  const QTable3& cur = r.table;
  while (true) {
    for (std::size_t w1 = 0; w1 < ny; ++w1) {
      const std::size_t w1h = wm.shift(w1, Observation::Hazard);
      const std::size_t w10 = wm.shift(w1, Observation::NoHazard);
      const std::size_t w1e = wm.shift(w1, Observation::NoInfo);
      for (std::size_t w2 = 0; w2 < ny; ++w2) {
        const std::size_t w2h = wm.shift(w2, Observation::Hazard);
        const std::size_t w20 = wm.shift(w2, Observation::NoHazard);
        const std::size_t w2e = wm.shift(w2, Observation::NoInfo);
        const std::size_t jw = jm.joint(w1, w2);
        const double h1 = wm.hazard[w1], h2 = wm.hazard[w2];
        next[3 * jw] = wm.p1_cost[w1] + beta * (h1 * cur.min_at(jm.joint(w1h, w2e)) +
                                                (1.0 - h1) * cur.min_at(jm.joint(w10, w2e)));
        next[3 * jw + 1] = wm.p1_cost[w2] + beta * (h2 * cur.min_at(jm.joint(w1e, w2h)) +
                                                    (1.0 - h2) * cur.min_at(jm.joint(w1e, w20)));
        next[3 * jw + 2] = m.c_m() + beta * cur.min_at(jm.joint(w1e, w2e));
      }
    }
    r.residual = sup_distance(next, r.table.values);
    r.table.values.swap(next);
    ++r.iterations;
    if (r.residual < stop || r.iterations >= 10'000'000) break;
  }
  return r;
}

struct JointWindowPolicy {
  int K = 1;
  std::vector<Action3> actions;  ///< per joint window
};

inline JointWindowPolicy policy_from_q_3(const QTable3& q) {
  JointWindowPolicy p{q.K, std::vector<Action3>(q.values.size() / 3)};
  for (std::size_t jw = 0; jw < p.actions.size(); ++jw) p.actions[jw] = q.greedy(jw);
  return p;
}

/// Stationary window law of the joint chain (state of P1, state of P1',
/// window of P1, window of P1'), by lazy power iteration as in the
/// two-path case. Returns the marginal over joint windows.
inline std::vector<double> stationary_joint_window_distribution(const JointWindowPolicy& pol, const ModelParams& m,
                                                                double tol = 1e-12,
                                                                int max_iterations = 50'000'000) {
  const JointWindowModel jm(pol.K, m);
  const std::size_t ny = jm.count;
  const std::size_t nw = ny * ny;
  const std::size_t n = 4 * nw;  // state index s1*2 + s2, H = 0
  const double pi_h = m.stationary_h();
  const double pi[2] = {pi_h, 1.0 - pi_h};
  const double stay[2] = {m.q_hh(), m.q_ll()};
  const double hazard[2] = {m.p_h(), m.p_l()};
  std::vector<double> cur(n, 0.0), nxt(n, 0.0);
  const std::size_t empty = jm.joint(ny - 1, ny - 1);
  for (std::size_t s1 = 0; s1 < 2; ++s1) {
    for (std::size_t s2 = 0; s2 < 2; ++s2) cur[(s1 * 2 + s2) * nw + empty] = pi[s1] * pi[s2];
  }
  // Chain moves of both paths, applied after the window update.
  auto spread = [&](std::size_t s1, std::size_t s2, std::size_t jw, double mass) {
    const double a1 = stay[s1], a2 = stay[s2];
    const std::size_t o1 = 1 - s1, o2 = 1 - s2;
    nxt[(s1 * 2 + s2) * nw + jw] += mass * a1 * a2;
    nxt[(s1 * 2 + o2) * nw + jw] += mass * a1 * (1.0 - a2);
    nxt[(o1 * 2 + s2) * nw + jw] += mass * (1.0 - a1) * a2;
    nxt[(o1 * 2 + o2) * nw + jw] += mass * (1.0 - a1) * (1.0 - a2);
  };
  int it = 0;
  while (true) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::size_t s1 = 0; s1 < 2; ++s1) {
      for (std::size_t s2 = 0; s2 < 2; ++s2) {
        const std::size_t base = (s1 * 2 + s2) * nw;
        for (std::size_t w1 = 0; w1 < ny; ++w1) {
          for (std::size_t w2 = 0; w2 < ny; ++w2) {
            const std::size_t jw = jm.joint(w1, w2);
            const double mass = cur[base + jw];
            if (mass == 0.0) continue;
            switch (pol.actions[jw]) {
              case Action3::P1: {
                const double h = hazard[s1];
                const std::size_t e2 = jm.single.shift(w2, Observation::NoInfo);
                spread(s1, s2, jm.joint(jm.single.shift(w1, Observation::Hazard), e2), mass * h);
                spread(s1, s2, jm.joint(jm.single.shift(w1, Observation::NoHazard), e2), mass * (1.0 - h));
                break;
              }
              case Action3::P1Prime: {
                const double h = hazard[s2];
                const std::size_t e1 = jm.single.shift(w1, Observation::NoInfo);
                spread(s1, s2, jm.joint(e1, jm.single.shift(w2, Observation::Hazard)), mass * h);
                spread(s1, s2, jm.joint(e1, jm.single.shift(w2, Observation::NoHazard)), mass * (1.0 - h));
                break;
              }
              case Action3::P2:
                spread(s1, s2,
                       jm.joint(jm.single.shift(w1, Observation::NoInfo), jm.single.shift(w2, Observation::NoInfo)),
                       mass);
                break;
            }
          }
        }
      }
    }
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lazy = 0.5 * (cur[i] + nxt[i]);
      res += std::abs(lazy - cur[i]);
      nxt[i] = lazy;
    }
    cur.swap(nxt);
    ++it;
    if (res < tol || it >= max_iterations) break;
  }
  std::vector<double> marginal(nw, 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t jw = 0; jw < nw; ++jw) marginal[jw] += cur[s * nw + jw];
  }
  for (double v : marginal) total += v;
  for (double& v : marginal) v /= total;
  return marginal;
}

/// Three-way incentive report. For each recommendation, the conditional
/// expected P1 and P1' costs given that recommendation.
struct IC3Report {
  double mass[3] = {0, 0, 0};  ///< per recommendation P1, P1', P2
  double cost_p1[3] = {0, 0, 0};
  double cost_p1p[3] = {0, 0, 0};
  bool follows[3] = {true, true, true};  ///< vacuously true for zero-mass recommendations

  bool incentive_compatible() const { return follows[0] && follows[1] && follows[2]; }
};

/// A recommended stochastic path is followed iff its conditional cost is at
/// most c_M and at most the other stochastic path's conditional cost. P2 is
/// followed iff both stochastic paths' conditional costs are at least c_M.
inline IC3Report ic_check_3(const JointWindowPolicy& pol, const std::vector<double>& joint_mass,
                            const ModelParams& m) {
  const JointWindowModel jm(pol.K, m);
  IC3Report r;
  for (std::size_t w1 = 0; w1 < jm.count; ++w1) {
    for (std::size_t w2 = 0; w2 < jm.count; ++w2) {
      const std::size_t jw = jm.joint(w1, w2);
      const auto a = static_cast<std::size_t>(pol.actions[jw]);
      const double p = joint_mass[jw];
      r.mass[a] += p;
      r.cost_p1[a] += p * jm.single.p1_cost[w1];
      r.cost_p1p[a] += p * jm.single.p1_cost[w2];
    }
  }
  for (int a = 0; a < 3; ++a) {
    if (r.mass[a] > 0.0) {
      r.cost_p1[a] /= r.mass[a];
      r.cost_p1p[a] /= r.mass[a];
    }
  }
  const double cm = m.c_m();
  if (r.mass[0] > 0.0) r.follows[0] = r.cost_p1[0] <= cm && r.cost_p1[0] <= r.cost_p1p[0];
  if (r.mass[1] > 0.0) r.follows[1] = r.cost_p1p[1] <= cm && r.cost_p1p[1] <= r.cost_p1[1];
  if (r.mass[2] > 0.0) r.follows[2] = r.cost_p1[2] >= cm && r.cost_p1p[2] >= cm;
  return r;
}

struct Table1Cell {
  std::string row;
  double axis_value;
  int K;
  bool ic;
};

inline Table1Cell ic_cell_3(const ModelParams& m, const std::string& row, double v, int K) {
  const auto q = asymptotic_q_3(m, K);
  const auto pol = policy_from_q_3(q.table);
  const auto mass = stationary_joint_window_distribution(pol, m);
  return {row, v, K, ic_check_3(pol, mass, m).incentive_compatible()};
}

/// Scan of one parameter row over K in [k_min, k_max].
inline std::vector<Table1Cell> ic_scan_3path(const ModelParams& base, ScanAxis axis, const std::vector<double>& values,
                                             int k_min, int k_max) {
  if (k_max > kMaxJointWindow) {
    throw std::invalid_argument("K: joint window space grows as 9^K; K <= 4 supported (requested " +
                                std::to_string(k_max) + ")");
  }
  std::vector<Table1Cell> out;
  for (int K = k_min; K <= k_max; ++K) {
    for (double v : values) out.push_back(ic_cell_3(apply_axis(base, axis, v), to_string(axis), v, K));
  }
  return out;
}

}  // namespace pathlearn
