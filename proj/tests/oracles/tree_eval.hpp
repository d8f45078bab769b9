#pragma once

// Finite-horizon evaluation of a threshold policy by walking the observation
// tree in exact rational arithmetic, so beliefs that land on the threshold
// are recognized as ties. Subtrees are memoized on (depth, belief).

#include <map>
#include <utility>

#include <boost/multiprecision/gmp.hpp>

namespace oracle {

using Rational = boost::multiprecision::mpq_rational;

/// Two-state model with rational parameters.
struct ExactModel {
  Rational p_h, p_l, q_hh, q_ll, c, c_m, beta;

  Rational c_h() const { return p_h * c; }
  Rational c_l() const { return p_l * c; }
  Rational transition(const Rational& x) const { return x * q_hh + (1 - x) * (1 - q_ll); }
  Rational hazard(const Rational& x) const { return x * p_h + (1 - x) * p_l; }
  Rational after(const Rational& x, bool hazard_seen) const {
    const Rational lh = hazard_seen ? p_h : 1 - p_h;
    const Rational ll = hazard_seen ? p_l : 1 - p_l;
    const Rational d = x * lh + (1 - x) * ll;
    return transition(x * lh / d);
  }
};

/// Symmetric model from integer percentages, e.g. p=90 means 0.9.
inline ExactModel exact_symmetric(int p, int q, int c, int c_m, int beta) {
  const Rational h(1, 100);
  return {p * h, (100 - p) * h, q * h, q * h, c * h, c_m * h, beta * h};
}

/// Value of "P1 iff x <= threshold" over `horizon` epochs.
class ThresholdTreeEvaluator {
 public:
  ThresholdTreeEvaluator(ExactModel m, Rational threshold) : m_(std::move(m)), t_(std::move(threshold)) {}

  Rational value(const Rational& x, int horizon) { return go(x, horizon); }
  std::size_t memo_size() const { return memo_.size(); }

 private:
  Rational go(const Rational& x, int depth) {
    if (depth == 0) return 0;
    auto key = std::make_pair(depth, x);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Rational v;
    if (x > t_) {
      v = m_.c_m + m_.beta * go(m_.transition(x), depth - 1);
    } else {
      const Rational h = m_.hazard(x);
      v = x * m_.c_h() + (1 - x) * m_.c_l();
      if (h > 0) v += m_.beta * h * go(m_.after(x, true), depth - 1);
      if (h < 1) v += m_.beta * (1 - h) * go(m_.after(x, false), depth - 1);
    }
    memo_.emplace(std::move(key), v);
    return v;
  }

  ExactModel m_;
  Rational t_;
  std::map<std::pair<int, Rational>, Rational> memo_;
};

}  // namespace oracle
