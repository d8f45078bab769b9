#pragma once

// Myopic platforms, their value functions, and price-of-anarchy tooling.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pathlearn/exact_solver.hpp"

namespace pathlearn {

/// Platform without report sharing: compares c_M with the long-run mean P1
/// cost under the chain's stationary law. Independent of the belief.
inline Action policy_no_info(const ModelParams& m) {
  const double pi_h = m.stationary_h();
  return m.c_m() >= pi_h * m.c_h() + (1.0 - pi_h) * m.c_l() ? Action::P1 : Action::P2;
}

/// Closed-form value of the no-information platform. In the always-P1
/// regime the value is affine in x because the prior evolves affinely.
inline double value_no_info(Belief x, const ModelParams& m) {
  const double beta = m.beta();
  if (policy_no_info(m) == Action::P2) return m.c_m() / (1.0 - beta);
  const double r = m.q_hh() + m.q_ll() - 1.0;
  const double slope = (m.c_h() - m.c_l()) / (1.0 - beta * r);
  const double offset = (m.c_l() + beta * slope * (1.0 - m.q_ll())) / (1.0 - beta);
  return slope * x + offset;
}

/// Beliefs within rounding noise of the threshold count as ties (P1).
inline constexpr double kTieTolerance = 1e-12;

struct MyopicThreshold {
  Belief x_hat;
  bool below_range = false;  // c_M < c_L: P1 is never cheaper
};

/// Belief at which the immediate P1 cost equals c_M, clamped to [0, 1].
inline MyopicThreshold myopic_threshold(const ModelParams& m) {
  const double spread = m.c_h() - m.c_l();
  if (!(spread > 0.0)) {
    throw std::invalid_argument("myopic_threshold: c_H == c_L, reports carry no cost information");
  }
  const double raw = (m.c_m() - m.c_l()) / spread;
  return {std::clamp(raw, 0.0, 1.0), raw < -kTieTolerance};
}

inline Action policy_myopic(Belief x, MyopicThreshold t) {
  return !t.below_range && x <= t.x_hat + kTieTolerance ? Action::P1 : Action::P2;
}

inline Action policy_myopic(Belief x, const ModelParams& m) { return policy_myopic(x, myopic_threshold(m)); }

/// A user who sees everything the platform knows takes the cheaper trip
/// now, whatever was recommended.
inline Action selfish_choice(Belief x, Action /*recommended*/, const ModelParams& m) {
  if (m.c_h() > m.c_l()) return policy_myopic(x, m);
  return m.c_l() <= m.c_m() ? Action::P1 : Action::P2;
}

/// Continuation for a fixed policy. The policy's value jumps where the action
/// switches, so inside a cell whose end nodes disagree the value is
/// extrapolated from the two nodes on the side the policy picks at x.
template <typename Policy>
struct PolicyContinuation {
  const ValueFunction& V;
  const Policy& pol;

  double operator()(double x) const {
    const BeliefGrid& g = V.grid;
    const auto [i, w] = g.locate(x);
    const Action left = pol(g.node(i));
    const Action right = pol(g.node(i + 1));
    if (left == right || w == 0.0) return V(x);
    const auto& v = V.values;
    const double h = g.spacing();
    if (pol(x) == left) {
      if (i == 0) return v[0];
      return v[i] + (v[i] - v[i - 1]) * (x - g.node(i)) / h;
    }
    if (i + 2 >= g.size()) return v[i + 1];
    return v[i + 1] - (v[i + 2] - v[i + 1]) * (g.node(i + 1) - x) / h;
  }
};

/// Backup of a fixed belief-dependent policy (policy evaluation operator).
template <typename Policy>
ValueFunction policy_backup(const ValueFunction& V, const ModelParams& m, const Policy& pol) {
  const PolicyContinuation<Policy> cont{V, pol};
  std::vector<double> out(V.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = V.grid.node(i);
    const QPair q = q_values(x, cont, m);
    out[i] = pol(x) == Action::P1 ? q.q1 : q.q2;
  }
  return {V.grid, std::move(out)};
}

template <typename Policy>
SolveResult evaluate_policy(const Policy& pol, const ModelParams& m, BeliefGrid grid = BeliefGrid{},
                            double tol = 1e-9) {
  return iterate_to_fixed_point(ValueFunction::zeros(grid), tol, m.beta(),
                                [&](const ValueFunction& V) { return policy_backup(V, m, pol); });
}

/// Value of the myopic platform that shares reports.
inline SolveResult value_myopic(const ModelParams& m, BeliefGrid grid = BeliefGrid{}, double tol = 1e-9) {
  const MyopicThreshold t = myopic_threshold(m);
  return evaluate_policy([t](double x) { return policy_myopic(x, t); }, m, grid, tol);
}

/// Off-grid evaluation by one-step lookahead on a converged value function.
/// More accurate than interpolation where the policy switches inside a cell.
inline double optimal_value_at(Belief x, const ValueFunction& V, const ModelParams& m) {
  const QPair q = q_values(x, V, m);
  return std::min(q.q1, q.q2);
}

template <typename Policy>
double policy_value_at(Belief x, const ValueFunction& V_pol, const ModelParams& m, const Policy& pol) {
  const QPair q = q_values(x, PolicyContinuation<Policy>{V_pol, pol}, m);
  return pol(x) == Action::P1 ? q.q1 : q.q2;
}

struct PoAResult {
  double ratio = 1.0;
  Belief argmax_x = 0.0;
  ModelParams instance;
};

/// Ratio of two costs with the 0/0 = 1 and positive/0 = infinity conventions.
inline double cost_ratio(double policy_cost, double optimal_cost) {
  if (optimal_cost > 0.0) return policy_cost / optimal_cost;
  return policy_cost > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

/// Per-instance max over grid nodes of V_policy / V_opt.
inline PoAResult poa_ratio(const ValueFunction& V_policy, const ValueFunction& V_opt, const ModelParams& m) {
  if (!(V_policy.grid == V_opt.grid)) throw std::invalid_argument("poa_ratio: grids differ");
  PoAResult r{-std::numeric_limits<double>::infinity(), 0.0, m};
  for (std::size_t i = 0; i < V_opt.grid.size(); ++i) {
    const double ratio = cost_ratio(V_policy.values[i], V_opt.values[i]);
    if (ratio > r.ratio) {
      r.ratio = ratio;
      r.argmax_x = V_opt.grid.node(i);
    }
  }
  return r;
}

struct WorstCaseInstance {
  ModelParams params;
  Belief x0;
};

/// Lower bound on V_myopic(x)/V(x) for the fully observable (p = 1) family
/// with c = (c_M + eps)/x, from the explore-once-then-imitate upper bound on V.
inline double myopic_ratio_lower_bound(double beta, double eps, double q, double c_m, double x) {
  const double c = (c_m + eps) / x;
  const double v_upper =
      ((1.0 - beta) * c + beta * c_m) / (1.0 - beta) * (x + (1.0 - x) * beta * (1.0 - q) / (1.0 - beta * q));
  return (c_m / (1.0 - beta)) / v_upper;
}

/// Instance on which the myopic platform never explores while the optimal
/// platform pays about c_M once to learn that P1 is almost surely safe.
///
/// Requires (1-q)(c_M+eps)/c_M < x0 < 1/2. x0 is placed where the analytic
/// ratio bound is largest within that window.
inline WorstCaseInstance worst_case_instance_myopic(double beta, double eps, double q, double c_m) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta: must be in (0, 1)");
  if (!(q > 0.5 && q < 1.0)) throw std::invalid_argument("q: must be in (1/2, 1)");
  if (!(c_m > 0.0)) throw std::invalid_argument("c_m: must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps: must be positive");
  const double lo = (1.0 - q) * (c_m + eps) / c_m;
  const double hi = 0.5;
  if (!(lo < hi)) {
    throw std::invalid_argument("infeasible: (1-q)(c_M+eps)/c_M < 1/2 violated, window for x0 is empty");
  }
  // Golden-section search on the (unimodal) bound over the open window.
  const double margin = 1e-9 * (hi - lo);
  double a = lo + margin, b = hi - margin;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (myopic_ratio_lower_bound(beta, eps, q, c_m, x1) > myopic_ratio_lower_bound(beta, eps, q, c_m, x2)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  const double x0 = 0.5 * (a + b);
  const double c = (c_m + eps) / x0;
  return {ModelParams::symmetric(1.0, q, c, c_m, beta), x0};
}

/// Instance on which the no-information platform locks onto P2 while P1 is
/// known to start in the zero-cost state. Requires c > 2 c_M strictly.
inline WorstCaseInstance worst_case_instance_no_info(double beta, double q, double c_m, double c) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta: must be in [0, 1)");
  if (!(q > 0.5 && q < 1.0)) throw std::invalid_argument("q: must be in (1/2, 1)");
  if (!(c_m > 0.0)) throw std::invalid_argument("c_m: must be positive");
  if (!(c > 2.0 * c_m)) throw std::invalid_argument("c: must exceed 2 c_M strictly");
  return {ModelParams::symmetric(1.0, q, c, c_m, beta), 0.0};
}

/// Default hazard cost for the no-information family: just above 2 c_M,
/// which makes the optimal platform's cost smallest.
inline WorstCaseInstance worst_case_instance_no_info(double beta, double q, double c_m) {
  return worst_case_instance_no_info(beta, q, c_m, 2.02 * c_m);
}

}  // namespace pathlearn
