#pragma once

// Value iteration for the belief-state MDP on a uniform belief grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "pathlearn/model.hpp"

namespace pathlearn {

/// Uniform grid with nodes i/(n-1); endpoints are exactly 0 and 1.
class BeliefGrid {
 public:
  explicit BeliefGrid(std::size_t n = 1001) : n_(n) {
    if (n < 2) throw std::invalid_argument("grid: need at least 2 nodes");
  }

  std::size_t size() const { return n_; }
  double spacing() const { return 1.0 / static_cast<double>(n_ - 1); }
  double node(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(n_ - 1);
  }

  /// Left node index and interpolation weight of x within [node(i), node(i+1)].
  std::pair<std::size_t, double> locate(double x) const {
    const double t = std::clamp(x, 0.0, 1.0) * static_cast<double>(n_ - 1);
    auto i = static_cast<std::size_t>(t);
    if (i >= n_ - 1) i = n_ - 2;
    return {i, t - static_cast<double>(i)};
  }

  /// Index of the node nearest to x.
  std::size_t nearest(double x) const {
    const double t = std::clamp(x, 0.0, 1.0) * static_cast<double>(n_ - 1);
    return static_cast<std::size_t>(std::lround(t));
  }

  friend bool operator==(const BeliefGrid&, const BeliefGrid&) = default;

 private:
  std::size_t n_;
};

/// Node values on a grid, evaluated off-node by linear interpolation.
struct ValueFunction {
  BeliefGrid grid;
  std::vector<double> values;

  ValueFunction(BeliefGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("value function: size mismatch");
  }

  static ValueFunction zeros(BeliefGrid g) { return {g, std::vector<double>(g.size(), 0.0)}; }

  double operator()(double x) const {
    const auto [i, w] = grid.locate(x);
    return (1.0 - w) * values[i] + w * values[i + 1];
  }
};

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct QPair {
  double q1;  ///< travel P1 now, act optimally afterwards
  double q2;  ///< travel P2 now, act optimally afterwards
};

/// Tie goes to P1.
inline Action argmin_action(const QPair& q) { return q.q1 <= q.q2 ? Action::P1 : Action::P2; }

/// One-step lookahead costs of both actions with continuation V.
template <typename Continuation>
QPair q_values(Belief x, const Continuation& V, const ModelParams& m) {
  const double h = hazard_probability(x, m);
  const double beta = m.beta();
  double cont1 = 0.0;
  if (h > 0.0) cont1 += h * V(belief_step(x, Action::P1, Observation::Hazard, m));
  if (h < 1.0) cont1 += (1.0 - h) * V(belief_step(x, Action::P1, Observation::NoHazard, m));
  return {expected_p1_cost(x, m) + beta * cont1, m.c_m() + beta * V(transition_prior(x, m))};
}

/// Bellman operator applied node-wise: min of the two Q-values.
inline ValueFunction bellman_backup(const ValueFunction& V, const ModelParams& m) {
  std::vector<double> out(V.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const QPair q = q_values(V.grid.node(i), V, m);
    out[i] = std::min(q.q1, q.q2);
  }
  return {V.grid, std::move(out)};
}

struct SolveResult {
  ValueFunction value;
  int iterations;
  double last_change;  ///< sup-norm change of the final sweep
};

/// Value iteration from V = 0. Stops once the sweep change drops below
/// tol*(1-beta)/beta, which bounds the distance to the fixed point by tol.
template <typename Backup>
SolveResult iterate_to_fixed_point(ValueFunction V, double tol, double beta, Backup&& backup,
                                   int max_iterations = 10'000'000) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol: must be positive");
  const double stop = beta > 0.0 ? tol * (1.0 - beta) / beta : std::numeric_limits<double>::infinity();
  int it = 0;
  double change = std::numeric_limits<double>::infinity();
  while (it < max_iterations) {
    ValueFunction next = backup(V);
    change = sup_distance(next.values, V.values);
    V = std::move(next);
    ++it;
    if (change < stop) break;
  }
  return {std::move(V), it, change};
}

inline SolveResult solve_value_function(const ModelParams& m, BeliefGrid grid = BeliefGrid{},
                                        double tol = 1e-9) {
  return iterate_to_fixed_point(ValueFunction::zeros(grid), tol, m.beta(),
                                [&](const ValueFunction& V) { return bellman_backup(V, m); });
}

/// Action per grid node; X1/X2 are the node sets choosing P1/P2.
struct PolicyTable {
  BeliefGrid grid;
  std::vector<Action> actions;

  static PolicyTable constant(BeliefGrid g, Action a) { return {g, std::vector<Action>(g.size(), a)}; }

  /// Action of the node nearest to x.
  Action operator()(double x) const { return actions[grid.nearest(x)]; }

  std::size_t count(Action a) const { return static_cast<std::size_t>(std::count(actions.begin(), actions.end(), a)); }
};

inline PolicyTable extract_policy(const ValueFunction& V, const ModelParams& m) {
  PolicyTable pol{V.grid, std::vector<Action>(V.grid.size())};
  for (std::size_t i = 0; i < pol.actions.size(); ++i) {
    pol.actions[i] = argmin_action(q_values(V.grid.node(i), V, m));
  }
  return pol;
}

/// Single P1 -> P2 switch point of a threshold policy: the first node
/// choosing P2. An all-P1 policy has threshold 1, an all-P2 policy 0.
/// Anything else (P2 before P1, or several switches) has no threshold.
inline std::optional<Belief> find_threshold(const PolicyTable& pol) {
  const auto& a = pol.actions;
  const auto first_p2 = std::find(a.begin(), a.end(), Action::P2);
  if (first_p2 == a.end()) return 1.0;
  if (std::find(first_p2, a.end(), Action::P1) != a.end()) return std::nullopt;
  return pol.grid.node(static_cast<std::size_t>(first_p2 - a.begin()));
}

struct ShapeReport {
  double monotonicity_violation = 0.0;  ///< max over i of V(x_i) - V(x_{i+1}), floored at 0
  double concavity_violation = 0.0;     ///< max positive second difference

  bool ok(double tol) const { return monotonicity_violation < tol && concavity_violation < tol; }
};

inline ShapeReport verify_shape(const ValueFunction& V) {
  ShapeReport r;
  const auto& v = V.values;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    r.monotonicity_violation = std::max(r.monotonicity_violation, v[i] - v[i + 1]);
  }
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    r.concavity_violation = std::max(r.concavity_violation, v[i + 1] - 2.0 * v[i] + v[i - 1]);
  }
  return r;
}

/// CSV columns: x, V, action, Q1, Q2.
inline void write_value_policy_csv(std::ostream& out, const ValueFunction& V, const ModelParams& m) {
  const auto old = out.precision(17);
  out << "x,V,action,Q1,Q2\n";
  for (std::size_t i = 0; i < V.grid.size(); ++i) {
    const double x = V.grid.node(i);
    const QPair q = q_values(x, V, m);
    out << x << ',' << V.values[i] << ',' << to_string(argmin_action(q)) << ',' << q.q1 << ',' << q.q2
        << '\n';
  }
  out.precision(old);
}

}  // namespace pathlearn
