#pragma once

// Audit of the information-restriction mechanism: the platform hides the
// report history and only announces a path. A sophisticated user who knows
// the policy conditions the stationary belief law on the announcement and
// follows it iff that is a best response.

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathlearn/exact_solver.hpp"
#include "pathlearn/sim.hpp"

namespace pathlearn {

struct StationarySimConfig {
  std::size_t burn_in = 10'000;
  std::size_t samples = 1'000'000;
  std::size_t batches = 50;  ///< batch count for batch-means confidence intervals
  std::uint64_t seed = 1;
};

/// Histogram of the belief process under a policy, one cell per grid node
/// (nearest-node cells). Per-batch tallies are kept for interval estimates.
struct StationaryBeliefDistribution {
  BeliefGrid grid;
  std::vector<double> mass;         ///< normalized
  std::vector<double> mean_belief;  ///< mean x within each cell (0 if empty)
  std::size_t sample_count = 0;
  std::size_t burn_in = 0;
  /// batch_count[b][i], batch_belief_sum[b][i]: raw tallies of batch b.
  std::vector<std::vector<double>> batch_count;
  std::vector<std::vector<double>> batch_belief_sum;
};

/// Simulates one long trajectory (hidden chain, filter, policy) and bins the
/// prior x_t after burn-in. Starts from the chain's stationary law with the
/// matching stationary belief.
inline StationaryBeliefDistribution stationary_belief_distribution(const PolicyTable& policy,
                                                                   const ModelParams& m,
                                                                   const StationarySimConfig& cfg) {
  if (cfg.samples < cfg.batches || cfg.batches < 2) throw std::invalid_argument("samples: too few for batching");
  const std::size_t n = policy.grid.size();
  StationaryBeliefDistribution d;
  d.grid = policy.grid;
  d.sample_count = cfg.samples;
  d.burn_in = cfg.burn_in;
  d.batch_count.assign(cfg.batches, std::vector<double>(n, 0.0));
  d.batch_belief_sum.assign(cfg.batches, std::vector<double>(n, 0.0));

  Rng rng(cfg.seed);
  const double pi_h = m.stationary_h();
  PathState s = rng.uniform() < pi_h ? PathState::H : PathState::L;
  Belief x = pi_h;
  const std::size_t per_batch = cfg.samples / cfg.batches;
  const std::size_t total = cfg.burn_in + per_batch * cfg.batches;
  for (std::size_t t = 0; t < total; ++t) {
    const double u_obs = rng.uniform();
    const double u_move = rng.uniform();
    const std::size_t cell = policy.grid.nearest(x);
    if (t >= cfg.burn_in) {
      const std::size_t b = (t - cfg.burn_in) / per_batch;
      d.batch_count[b][cell] += 1.0;
      d.batch_belief_sum[b][cell] += x;
    }
    const Action a = policy.actions[cell];
    Observation y = Observation::NoInfo;
    if (a == Action::P1) y = hazard_occurs(s, m, u_obs) ? Observation::Hazard : Observation::NoHazard;
    x = belief_step(x, a, y, m);
    s = advance_state(s, m, u_move);
  }
  d.sample_count = per_batch * cfg.batches;

  d.mass.assign(n, 0.0);
  d.mean_belief.assign(n, 0.0);
  std::vector<double> xsum(n, 0.0);
  for (std::size_t b = 0; b < cfg.batches; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      d.mass[i] += d.batch_count[b][i];
      xsum[i] += d.batch_belief_sum[b][i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d.mass[i] > 0.0) d.mean_belief[i] = xsum[i] / d.mass[i];
    d.mass[i] /= static_cast<double>(d.sample_count);
  }
  return d;
}

inline double total_variation(const StationaryBeliefDistribution& a, const StationaryBeliefDistribution& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) tv += std::abs(a.mass[i] - b.mass[i]);
  return 0.5 * tv;
}

enum class Verdict { Follows, Violated, Inconclusive, Vacuous };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Follows: return "follows";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Vacuous: return "vacuous";
  }
  return "?";
}

/// Conditional expected P1 cost given each recommendation, with verdicts.
/// Exact audits (finite-chain distributions) carry zero CI half-widths.
struct ICReport {
  double cost_given_p1 = 0.0;  ///< E[x c_H + (1-x) c_L | recommend P1]
  double cost_given_p2 = 0.0;  ///< E[x c_H + (1-x) c_L | recommend P2]
  double lambda = 0.0;         ///< long-run undiscounted average cost of the policy
  double c_m = 0.0;
  double mass_p1 = 0.0;
  double mass_p2 = 0.0;
  double ci_p1 = 0.0;
  double ci_p2 = 0.0;
  double ci_lambda = 0.0;
  Verdict verdict_p1 = Verdict::Vacuous;
  Verdict verdict_p2 = Verdict::Vacuous;
  bool follows_p1 = true;
  bool follows_p2 = true;

  bool incentive_compatible() const { return follows_p1 && follows_p2; }
};

namespace detail {

struct PartitionTally {
  double mass1 = 0, mass2 = 0, cost1 = 0, cost2 = 0;  // cost sums are mass-weighted
};

inline PartitionTally tally(const PolicyTable& pol, std::span<const double> count, std::span<const double> xsum,
                            const ModelParams& m) {
  PartitionTally t;
  for (std::size_t i = 0; i < count.size(); ++i) {
    if (count[i] == 0.0) continue;
    // The P1 cost is affine in x, so the cell's belief sum gives it exactly.
    const double cost = xsum[i] * m.c_h() + (count[i] - xsum[i]) * m.c_l();
    if (pol.actions[i] == Action::P1) {
      t.mass1 += count[i];
      t.cost1 += cost;
    } else {
      t.mass2 += count[i];
      t.cost2 += cost;
    }
  }
  return t;
}

inline double batch_halfwidth(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  return 3.0 * std::sqrt(var / static_cast<double>(values.size()));
}

inline Verdict verdict_at_most(double value, double bound, double ci, bool strict = false) {
  if (value < bound - ci) return Verdict::Follows;
  if (value > bound + ci) return Verdict::Violated;
  if (ci > 0.0) return Verdict::Inconclusive;
  const bool ok = strict ? value < bound : value <= bound;
  return ok ? Verdict::Follows : Verdict::Violated;
}

}  // namespace detail

/// Long-run average cost: P1 cost over X1 plus c_M over X2.
inline double average_cost(const PolicyTable& pol, const StationaryBeliefDistribution& d, const ModelParams& m) {
  std::vector<double> xsum(d.mass.size());
  for (std::size_t i = 0; i < xsum.size(); ++i) xsum[i] = d.mass[i] * d.mean_belief[i];
  const auto t = detail::tally(pol, d.mass, xsum, m);
  return t.cost1 + t.mass2 * m.c_m();
}

inline ICReport ic_audit(const PolicyTable& pol, const StationaryBeliefDistribution& d, const ModelParams& m) {
  if (!(pol.grid == d.grid)) throw std::invalid_argument("ic_audit: grids differ");
  ICReport r;
  r.c_m = m.c_m();
  std::vector<double> xsum(d.mass.size());
  for (std::size_t i = 0; i < xsum.size(); ++i) xsum[i] = d.mass[i] * d.mean_belief[i];
  const auto t = detail::tally(pol, d.mass, xsum, m);
  r.mass_p1 = t.mass1;
  r.mass_p2 = t.mass2;
  r.cost_given_p1 = t.mass1 > 0 ? t.cost1 / t.mass1 : 0.0;
  r.cost_given_p2 = t.mass2 > 0 ? t.cost2 / t.mass2 : 0.0;
  r.lambda = t.mass1 * r.cost_given_p1 + t.mass2 * m.c_m();

  std::vector<double> b1, b2, bl;
  for (std::size_t b = 0; b < d.batch_count.size(); ++b) {
    const auto bt = detail::tally(pol, d.batch_count[b], d.batch_belief_sum[b], m);
    const double n = bt.mass1 + bt.mass2;
    if (bt.mass1 > 0) b1.push_back(bt.cost1 / bt.mass1);
    if (bt.mass2 > 0) b2.push_back(bt.cost2 / bt.mass2);
    bl.push_back((bt.cost1 + bt.mass2 * m.c_m()) / n);
  }
  r.ci_p1 = detail::batch_halfwidth(b1);
  r.ci_p2 = detail::batch_halfwidth(b2);
  r.ci_lambda = detail::batch_halfwidth(bl);

  if (t.mass1 > 0) {
    r.verdict_p1 = detail::verdict_at_most(r.cost_given_p1, m.c_m(), r.ci_p1);
    r.follows_p1 = r.cost_given_p1 <= m.c_m() + r.ci_p1;
  }
  if (t.mass2 > 0) {
    r.verdict_p2 = detail::verdict_at_most(m.c_m(), r.cost_given_p2, r.ci_p2);
    r.follows_p2 = r.cost_given_p2 >= m.c_m() - r.ci_p2;
  }
  return r;
}

/// Single-line JSON rendering of a report.
inline std::string to_json(const ICReport& r) {
  std::ostringstream o;
  o.precision(17);
  o << "{\"cost_given_p1\":" << r.cost_given_p1 << ",\"cost_given_p2\":" << r.cost_given_p2
    << ",\"lambda\":" << r.lambda << ",\"c_m\":" << r.c_m << ",\"mass_p1\":" << r.mass_p1
    << ",\"mass_p2\":" << r.mass_p2 << ",\"ci_p1\":" << r.ci_p1 << ",\"ci_p2\":" << r.ci_p2
    << ",\"ci_lambda\":" << r.ci_lambda << ",\"verdict_p1\":\"" << to_string(r.verdict_p1)
    << "\",\"verdict_p2\":\"" << to_string(r.verdict_p2) << "\",\"follows_p1\":"
    << (r.follows_p1 ? "true" : "false") << ",\"follows_p2\":" << (r.follows_p2 ? "true" : "false") << "}";
  return o.str();
}

inline const char* ic_csv_header() {
  return "cost_given_p1,cost_given_p2,lambda,c_m,mass_p1,mass_p2,ci_p1,ci_p2,ci_lambda,verdict_p1,verdict_p2,"
         "follows_p1,follows_p2";
}

inline std::string to_csv_row(const ICReport& r) {
  std::ostringstream o;
  o.precision(17);
  o << r.cost_given_p1 << ',' << r.cost_given_p2 << ',' << r.lambda << ',' << r.c_m << ',' << r.mass_p1 << ','
    << r.mass_p2 << ',' << r.ci_p1 << ',' << r.ci_p2 << ',' << r.ci_lambda << ',' << to_string(r.verdict_p1) << ','
    << to_string(r.verdict_p2) << ',' << (r.follows_p1 ? 1 : 0) << ',' << (r.follows_p2 ? 1 : 0);
  return o.str();
}

}  // namespace pathlearn
