#pragma once

// Exhaustive finite-horizon planning over policy trees. Each tree is a
// vector (cost if H, cost if L); the horizon-T optimum at belief x is the
// lower envelope of x*a_H + (1-x)*a_L. Dominated vectors are pruned each
// stage, which keeps the enumeration exact.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pathlearn/model.hpp"

namespace oracle {

struct Alpha {
  double h;
  double l;
  double at(double x) const { return x * h + (1.0 - x) * l; }
};

/// Keeps the vectors that attain the minimum somewhere on [0, 1].
inline std::vector<Alpha> lower_envelope(std::vector<Alpha> v) {
  auto slope = [](const Alpha& a) { return a.h - a.l; };
  std::sort(v.begin(), v.end(), [&](const Alpha& a, const Alpha& b) {
    if (slope(a) != slope(b)) return slope(a) > slope(b);
    return a.l < b.l;
  });
  auto cross = [&](const Alpha& a, const Alpha& b) { return (b.l - a.l) / (slope(a) - slope(b)); };
  std::vector<Alpha> hull;
  for (const Alpha& a : v) {
    if (!hull.empty() && slope(hull.back()) == slope(a)) continue;
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], a) <= cross(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(a);
  }
  std::vector<Alpha> out;
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const double lo = k == 0 ? -1e300 : cross(hull[k - 1], hull[k]);
    const double hi = k + 1 == hull.size() ? 1e300 : cross(hull[k], hull[k + 1]);
    if (lo <= 1.0 && hi >= 0.0) out.push_back(hull[k]);
  }
  return out;
}

class FiniteHorizonPlanner {
 public:
  explicit FiniteHorizonPlanner(const pathlearn::ModelParams& m) : m_(m) {}

  /// Vectors of the horizon-T optimal cost, T >= 0.
  std::vector<Alpha> solve(int T) const {
    std::vector<Alpha> cur{{0.0, 0.0}};
    for (int t = 0; t < T; ++t) cur = stage(cur);
    return cur;
  }

  static double value(const std::vector<Alpha>& set, double x) {
    double best = set.front().at(x);
    for (const auto& a : set) best = std::min(best, a.at(x));
    return best;
  }

 private:
  // E[alpha(s') | s] scaled by the report likelihood.
  Alpha propagate(const Alpha& a, double lik_h, double lik_l) const {
    const double qh = m_.q_hh(), ql = m_.q_ll();
    return {lik_h * (qh * a.h + (1.0 - qh) * a.l), lik_l * ((1.0 - ql) * a.h + ql * a.l)};
  }

  std::vector<Alpha> stage(const std::vector<Alpha>& next) const {
    const double beta = m_.beta();
    std::vector<Alpha> out;
    for (const Alpha& a : next) {
      const Alpha g = propagate(a, 1.0, 1.0);
      out.push_back({m_.c_m() + beta * g.h, m_.c_m() + beta * g.l});
    }
    std::vector<Alpha> g1, g0;
    for (const Alpha& a : next) {
      g1.push_back(propagate(a, m_.p_h(), m_.p_l()));
      g0.push_back(propagate(a, 1.0 - m_.p_h(), 1.0 - m_.p_l()));
    }
    for (const Alpha& a : g1) {
      for (const Alpha& b : g0) {
        out.push_back({m_.c_h() + beta * (a.h + b.h), m_.c_l() + beta * (a.l + b.l)});
      }
    }
    return lower_envelope(std::move(out));
  }

  pathlearn::ModelParams m_;
};

}  // namespace oracle
