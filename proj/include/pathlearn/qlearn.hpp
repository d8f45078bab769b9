#pragma once

// Q-learning platform whose state is the window of the last K reports.
//
// Covers the online learner, the deterministic system its iterates converge
// to, the induced window policy, the exact stationary law of the
// (hidden state, window) chain, and the incentive checks built on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathlearn/exact_solver.hpp"
#include "pathlearn/irm.hpp"
#include "pathlearn/model.hpp"
#include "pathlearn/rng.hpp"

namespace pathlearn {

inline std::size_t window_count(int K) {
  if (K < 1) throw std::invalid_argument("K: must be >= 1");
  std::size_t n = 1;
  for (int i = 0; i < K; ++i) n *= 3;
  return n;
}

/// Last K reports, oldest first. Encoded base 3 with the oldest report as
/// the most significant digit and digits 0 < 1 < none, so the code is the
/// lexicographic rank of the window.
class ObservationWindow {
 public:
  ObservationWindow(int K, std::size_t code) : K_(K), code_(code) {
    if (code >= window_count(K)) throw std::invalid_argument("window: code out of range");
  }

  static ObservationWindow empty(int K) { return {K, window_count(K) - 1}; }

  static ObservationWindow from(const std::vector<Observation>& obs) {
    std::size_t code = 0;
    for (Observation y : obs) code = code * 3 + static_cast<std::size_t>(y);
    return {static_cast<int>(obs.size()), code};
  }

  int size() const { return K_; }
  std::size_t code() const { return code_; }

  Observation operator[](int i) const {
    std::size_t c = code_;
    for (int j = K_ - 1; j > i; --j) c /= 3;
    return static_cast<Observation>(c % 3);
  }

  std::vector<Observation> elements() const {
    std::vector<Observation> out(static_cast<std::size_t>(K_));
    for (int i = 0; i < K_; ++i) out[static_cast<std::size_t>(i)] = (*this)[i];
    return out;
  }

  std::string str() const {
    std::string s;
    for (int i = 0; i < K_; ++i) s += to_string((*this)[i]);
    return s;
  }

  friend bool operator==(const ObservationWindow&, const ObservationWindow&) = default;

 private:
  int K_;
  std::size_t code_;
};

/// Drop the oldest report and append `obs`.
inline std::size_t shift_code(std::size_t code, std::size_t count, Observation obs) {
  return (code % (count / 3)) * 3 + static_cast<std::size_t>(obs);
}

inline ObservationWindow window_shift(const ObservationWindow& y, Observation obs) {
  return {y.size(), shift_code(y.code(), window_count(y.size()), obs)};
}

/// Belief after filtering the window's reports from the stationary prior.
inline double prob_h_given_window(const ObservationWindow& y, const ModelParams& m) {
  Belief x = m.stationary_h();
  for (int i = 0; i < y.size(); ++i) {
    const Observation o = y[i];
    x = belief_step(x, o == Observation::NoInfo ? Action::P2 : Action::P1, o, m);
  }
  return x;
}

inline double expected_p1_cost_window(const ObservationWindow& y, const ModelParams& m) {
  return expected_p1_cost(prob_h_given_window(y, m), m);
}

/// Per-window quantities reused by every solver in this module.
struct WindowModel {
  int K;
  std::size_t count;
  std::vector<double> prob_h;   ///< Pr[H | y]
  std::vector<double> hazard;   ///< probability the next P1 report is a hazard
  std::vector<double> p1_cost;  ///< c1(y)

  WindowModel(int k, const ModelParams& m) : K(k), count(window_count(k)) {
    prob_h.resize(count);
    hazard.resize(count);
    p1_cost.resize(count);
    for (std::size_t w = 0; w < count; ++w) {
      prob_h[w] = prob_h_given_window(ObservationWindow(K, w), m);
      hazard[w] = hazard_probability(prob_h[w], m);
      p1_cost[w] = expected_p1_cost(prob_h[w], m);
    }
  }

  std::size_t shift(std::size_t w, Observation o) const { return shift_code(w, count, o); }
};

/// Window whose Pr[H|y] is closest to x; ties go to the lower code.
inline ObservationWindow window_for_belief(Belief x, int K, const ModelParams& m) {
  const std::size_t n = window_count(K);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < n; ++w) {
    const double d = std::abs(prob_h_given_window(ObservationWindow(K, w), m) - x);
    if (d < best_d) {
      best_d = d;
      best = w;
    }
  }
  return {K, best};
}

/// Action values per (window, action) and visit counts. Entry index is
/// 2*window + action.
struct QTable {
  int K = 1;
  std::vector<double> values;
  std::vector<std::uint64_t> visits;

  static QTable zeros(int K) {
    const std::size_t n = 2 * window_count(K);
    return {K, std::vector<double>(n, 0.0), std::vector<std::uint64_t>(n, 0)};
  }

  std::size_t windows() const { return values.size() / 2; }
  double& at(std::size_t w, Action a) { return values[2 * w + static_cast<std::size_t>(a)]; }
  double at(std::size_t w, Action a) const { return values[2 * w + static_cast<std::size_t>(a)]; }
  double min_at(std::size_t w) const { return std::min(values[2 * w], values[2 * w + 1]); }
  Action greedy(std::size_t w) const { return values[2 * w] <= values[2 * w + 1] ? Action::P1 : Action::P2; }
};

/// Step size 1/(1+N)^omega with omega in (1/2, 1].
struct LearningSchedule {
  double omega = 0.6;

  double step(std::uint64_t visits) const { return std::pow(1.0 + static_cast<double>(visits), -omega); }

  void validate() const {
    if (!(omega > 0.5 && omega <= 1.0)) throw std::invalid_argument("omega: must be in (0.5, 1]");
  }
};

/// Constant-rate epsilon-greedy exploration over the two paths.
struct Exploration {
  double epsilon = 0.1;
};

/// Action per window.
struct WindowPolicy {
  int K = 1;
  std::vector<Action> actions;

  static WindowPolicy constant(int K, Action a) { return {K, std::vector<Action>(window_count(K), a)}; }
  Action operator()(std::size_t w) const { return actions[w]; }
};

/// Greedy policy of a table; ties go to P1.
inline WindowPolicy policy_from_q(const QTable& q) {
  WindowPolicy p{q.K, std::vector<Action>(q.windows())};
  for (std::size_t w = 0; w < p.actions.size(); ++w) p.actions[w] = q.greedy(w);
  return p;
}

/// Online Q-learning against the simulated world. Starts from a zero table,
/// the empty window, and a hidden state drawn from the stationary law.
/// Each epoch updates exactly the visited (window, action) entry.
inline QTable qlearning_online(const ModelParams& m, int K, LearningSchedule schedule, Exploration explore,
                               std::uint64_t epochs, std::uint64_t seed) {
  schedule.validate();
  if (epochs < 1) throw std::invalid_argument("epochs: must be >= 1");
  if (!(explore.epsilon >= 0.0 && explore.epsilon <= 1.0)) throw std::invalid_argument("epsilon: must be in [0, 1]");
  QTable q = QTable::zeros(K);
  const std::size_t count = window_count(K);
  Rng rng(seed);
  PathState s = rng.uniform() < m.stationary_h() ? PathState::H : PathState::L;
  std::size_t w = count - 1;
  for (std::uint64_t t = 0; t < epochs; ++t) {
    const double u_explore = rng.uniform();
    const double u_pick = rng.uniform();
    const double u_obs = rng.uniform();
    const double u_move = rng.uniform();
    Action a = q.greedy(w);
    if (u_explore < explore.epsilon) a = u_pick < 0.5 ? Action::P1 : Action::P2;

    Observation y = Observation::NoInfo;
    double cost = m.c_m();
    if (a == Action::P1) {
      const bool hazard = u_obs < (s == PathState::H ? m.p_h() : m.p_l());
      y = hazard ? Observation::Hazard : Observation::NoHazard;
      cost = hazard ? m.c() : 0.0;
    }
    const std::size_t next = shift_code(w, count, y);
    const std::size_t idx = 2 * w + static_cast<std::size_t>(a);
    const double alpha = schedule.step(++q.visits[idx]);
    q.values[idx] = alpha * (cost + m.beta() * q.min_at(next)) + (1.0 - alpha) * q.values[idx];

    w = next;
    if (s == PathState::H) {
      s = u_move < m.q_hh() ? PathState::H : PathState::L;
    } else {
      s = u_move < m.q_ll() ? PathState::L : PathState::H;
    }
  }
  return q;
}

/// One synchronous sweep of the system the online iterates converge to.
inline QTable apply_q_operator(const QTable& q, const WindowModel& wm, const ModelParams& m) {
  QTable out = q;
  const double beta = m.beta();
  for (std::size_t w = 0; w < wm.count; ++w) {
    const double h = wm.hazard[w];
    out.at(w, Action::P1) = wm.p1_cost[w] + beta * (h * q.min_at(wm.shift(w, Observation::Hazard)) +
                                                     (1.0 - h) * q.min_at(wm.shift(w, Observation::NoHazard)));
    out.at(w, Action::P2) = m.c_m() + beta * q.min_at(wm.shift(w, Observation::NoInfo));
  }
  return out;
}

struct AsymptoticQResult {
  QTable table;
  int iterations = 0;
  double residual = 0.0;  ///< sup-norm change of the last sweep
};

/// Fixed point of the asymptotic Q system by synchronous iteration from zero.
inline AsymptoticQResult asymptotic_q(const ModelParams& m, int K, double tol = 1e-10) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol: must be positive");
  const WindowModel wm(K, m);
  const double beta = m.beta();
  const double stop = beta > 0.0 ? tol * (1.0 - beta) / beta : std::numeric_limits<double>::infinity();
  AsymptoticQResult r{QTable::zeros(K), 0, 0.0};
  while (true) {
    QTable next = apply_q_operator(r.table, wm, m);
    r.residual = sup_distance(next.values, r.table.values);
    r.table.values = std::move(next.values);
    ++r.iterations;
    if (r.residual < stop || r.iterations >= 10'000'000) break;
  }
  return r;
}

/// Exact stationary law of the (hidden state, window) chain under a window
/// policy. Joint index is state*|Y| + window with H = 0.
struct WindowDistribution {
  int K = 1;
  std::vector<double> joint;           ///< size 2*3^K
  std::vector<double> window_mass;     ///< marginal over windows
  std::vector<double> state_mass;      ///< marginal over {H, L}
  std::vector<std::size_t> transient;  ///< windows with no stationary mass
  int iterations = 0;
  double residual = 0.0;
};

/// Power iteration on the lazy chain (I+P)/2, which has the same stationary
/// law and is aperiodic. Starting from the stationary hidden state and the
/// empty window, the limit is the law of the recurrent class reached from it.
inline WindowDistribution stationary_window_distribution(const WindowPolicy& pol, const ModelParams& m,
                                                         double tol = 1e-12, int max_iterations = 50'000'000) {
  const int K = pol.K;
  const std::size_t ny = window_count(K);
  const std::size_t n = 2 * ny;
  const double pi_h = m.stationary_h();
  WindowDistribution d;
  d.K = K;
  std::vector<double> cur(n, 0.0), nxt(n, 0.0);
  cur[ny - 1] = pi_h;
  cur[ny + ny - 1] = 1.0 - pi_h;
  const double stay[2] = {m.q_hh(), m.q_ll()};
  const double hazard[2] = {m.p_h(), m.p_l()};
  while (true) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t w = 0; w < ny; ++w) {
        const double mass = cur[s * ny + w];
        if (mass == 0.0) continue;
        const double to_same = mass * stay[s];
        const double to_other = mass - to_same;
        const std::size_t other = 1 - s;
        if (pol.actions[w] == Action::P2) {
          const std::size_t w2 = shift_code(w, ny, Observation::NoInfo);
          nxt[s * ny + w2] += to_same;
          nxt[other * ny + w2] += to_other;
        } else {
          const std::size_t w1 = shift_code(w, ny, Observation::Hazard);
          const std::size_t w0 = shift_code(w, ny, Observation::NoHazard);
          const double h = hazard[s];
          nxt[s * ny + w1] += to_same * h;
          nxt[other * ny + w1] += to_other * h;
          nxt[s * ny + w0] += to_same * (1.0 - h);
          nxt[other * ny + w0] += to_other * (1.0 - h);
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
    ++d.iterations;
    d.residual = res;
    if (res < tol || d.iterations >= max_iterations) break;
  }
  double total = 0.0;
  for (double v : cur) total += v;
  for (double& v : cur) v /= total;
  d.joint = cur;
  d.window_mass.assign(ny, 0.0);
  d.state_mass.assign(2, 0.0);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t w = 0; w < ny; ++w) {
      d.window_mass[w] += cur[s * ny + w];
      d.state_mass[s] += cur[s * ny + w];
    }
  }
  for (std::size_t w = 0; w < ny; ++w) {
    if (d.window_mass[w] < 1e-14) d.transient.push_back(w);
  }
  return d;
}

/// Incentive check for a window policy under the exact window law.
/// Recommendation P1 is followed iff E[c1(y) | y in Y1] <= c_M; P2 iff
/// E[c1(y) | y in Y2] > c_M. Both sides use c1(y) and their own mass.
inline ICReport ic_check(const WindowPolicy& pol, const WindowDistribution& d, const ModelParams& m) {
  const WindowModel wm(pol.K, m);
  ICReport r;
  r.c_m = m.c_m();
  double cost1 = 0.0, cost2 = 0.0;
  for (std::size_t w = 0; w < wm.count; ++w) {
    const double mass = d.window_mass[w];
    if (pol.actions[w] == Action::P1) {
      r.mass_p1 += mass;
      cost1 += mass * wm.p1_cost[w];
    } else {
      r.mass_p2 += mass;
      cost2 += mass * wm.p1_cost[w];
    }
  }
  r.lambda = cost1 + r.mass_p2 * m.c_m();
  if (r.mass_p1 > 0.0) {
    r.cost_given_p1 = cost1 / r.mass_p1;
    r.follows_p1 = r.cost_given_p1 <= m.c_m();
    r.verdict_p1 = r.follows_p1 ? Verdict::Follows : Verdict::Violated;
  }
  if (r.mass_p2 > 0.0) {
    r.cost_given_p2 = cost2 / r.mass_p2;
    r.follows_p2 = r.cost_given_p2 > m.c_m();
    r.verdict_p2 = r.follows_p2 ? Verdict::Follows : Verdict::Violated;
  }
  return r;
}

enum class ScanAxis { CostP2, ChainPersistence, Discount };

inline const char* to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::CostP2: return "c_m";
    case ScanAxis::ChainPersistence: return "q";
    case ScanAxis::Discount: return "beta";
  }
  return "?";
}

inline ScanAxis parse_scan_axis(const std::string& s) {
  if (s == "c_m") return ScanAxis::CostP2;
  if (s == "q") return ScanAxis::ChainPersistence;
  if (s == "beta") return ScanAxis::Discount;
  throw std::invalid_argument("axis: expected one of c_m, q, beta (got '" + s + "')");
}

inline ModelParams apply_axis(const ModelParams& base, ScanAxis axis, double v) {
  switch (axis) {
    case ScanAxis::CostP2: return base.with_c_m(v);
    case ScanAxis::ChainPersistence: return base.with_q(v);
    case ScanAxis::Discount: return base.with_beta(v);
  }
  return base;
}

/// Evenly spaced axis values lo, lo+step, ..., hi (count computed by rounding).
inline std::vector<double> axis_values(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  v.back() = hi;
  return v;
}

struct RegimeRow {
  double axis_value;
  int K;
  bool ic_p1;
  bool ic_p2;
  bool non_ic() const { return !(ic_p1 && ic_p2); }
};

/// Full pipeline per (axis value, K): asymptotic Q, greedy policy, exact
/// window law, incentive check.
inline RegimeRow ic_cell(const ModelParams& m, double axis_value, int K) {
  const auto q = asymptotic_q(m, K);
  const WindowPolicy pol = policy_from_q(q.table);
  const WindowDistribution d = stationary_window_distribution(pol, m);
  const ICReport r = ic_check(pol, d, m);
  return {axis_value, K, r.follows_p1, r.follows_p2};
}

inline std::vector<RegimeRow> ic_regime_scan(const ModelParams& base, ScanAxis axis,
                                             const std::vector<double>& values, int k_min, int k_max) {
  std::vector<RegimeRow> rows;
  rows.reserve(values.size() * static_cast<std::size_t>(k_max - k_min + 1));
  for (int K = k_min; K <= k_max; ++K) {
    for (double v : values) rows.push_back(ic_cell(apply_axis(base, axis, v), v, K));
  }
  return rows;
}

inline void write_regime_csv(std::ostream& out, const std::vector<RegimeRow>& rows) {
  const auto old = out.precision(17);
  out << "axis_value,K,ic_p1,ic_p2,non_ic\n";
  for (const auto& r : rows) {
    out << r.axis_value << ',' << r.K << ',' << r.ic_p1 << ',' << r.ic_p2 << ',' << r.non_ic() << '\n';
  }
  out.precision(old);
}

/// Exact discounted cost of a window policy as a function of (window, true
/// belief). The platform acts on the window; costs and reports follow the
/// Bayesian belief, tracked on the grid with linear interpolation.
struct WindowPolicyValue {
  BeliefGrid grid;
  int K;
  std::vector<ValueFunction> per_window;
  int iterations = 0;

  double at(std::size_t w, Belief x) const { return per_window[w](x); }
};

inline WindowPolicyValue evaluate_window_policy_table(const WindowPolicy& pol, const ModelParams& m,
                                                      BeliefGrid grid = BeliefGrid{}, double tol = 1e-9) {
  const std::size_t ny = window_count(pol.K);
  const std::size_t n = grid.size();
  // Per-node successor beliefs do not depend on the window.
  std::vector<double> x_h(n), x_0(n), x_t(n), hz(n), c1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.node(i);
    hz[i] = hazard_probability(x, m);
    c1[i] = expected_p1_cost(x, m);
    x_h[i] = belief_step(x, Action::P1, Observation::Hazard, m);
    x_0[i] = belief_step(x, Action::P1, Observation::NoHazard, m);
    x_t[i] = transition_prior(x, m);
  }
  WindowPolicyValue out{grid, pol.K, std::vector<ValueFunction>(ny, ValueFunction::zeros(grid)), 0};
  const double beta = m.beta();
  const double stop = beta > 0.0 ? tol * (1.0 - beta) / beta : std::numeric_limits<double>::infinity();
  std::vector<ValueFunction> next = out.per_window;
  while (true) {
    double change = 0.0;
    for (std::size_t w = 0; w < ny; ++w) {
      auto& v = next[w].values;
      if (pol.actions[w] == Action::P1) {
        const auto& vh = out.per_window[shift_code(w, ny, Observation::Hazard)];
        const auto& v0 = out.per_window[shift_code(w, ny, Observation::NoHazard)];
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = c1[i] + beta * (hz[i] * vh(x_h[i]) + (1.0 - hz[i]) * v0(x_0[i]));
        }
      } else {
        const auto& ve = out.per_window[shift_code(w, ny, Observation::NoInfo)];
        for (std::size_t i = 0; i < n; ++i) v[i] = m.c_m() + beta * ve(x_t[i]);
      }
      change = std::max(change, sup_distance(v, out.per_window[w].values));
    }
    out.per_window.swap(next);
    ++out.iterations;
    if (change < stop || out.iterations >= 10'000'000) break;
  }
  return out;
}

/// Cost of following the window policy from belief x0, entering at the
/// window that best matches x0.
inline double evaluate_window_policy(const WindowPolicy& pol, const ModelParams& m, Belief x0,
                                     BeliefGrid grid = BeliefGrid{}, double tol = 1e-9) {
  const auto table = evaluate_window_policy_table(pol, m, grid, tol);
  return table.at(window_for_belief(x0, pol.K, m).code(), x0);
}

}  // namespace pathlearn
