#pragma once

// Settings and data generators behind `reproduce <name>`. Each
// generator returns plot-ready CSV text plus the numbers its checks need.

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathlearn/baselines.hpp"
#include "pathlearn/multipath.hpp"
#include "pathlearn/qlearn.hpp"

namespace pathlearn::repro {

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig2", "fig3a", "fig3b", "fig3c", "fig4", "table1"};
  return names;
}

inline void check_figure_name(const std::string& name) {
  for (const auto& n : figure_names()) {
    if (n == name) return;
  }
  throw std::invalid_argument("figure: unknown name '" + name + "' (expected fig2|fig3a|fig3b|fig3c|fig4|table1)");
}

// ---- Fig 2: window-policy cost against the optimum -------------------------

struct Fig2Point {
  double x0;
  int K;
  double cost;
  double optimal;
};

struct Fig2Data {
  std::vector<Fig2Point> points;
  std::map<int, double> max_gap;     ///< per K
  std::map<int, double> argmax_gap;  ///< x0 of the largest gap per K
  double min_excess = 0.0;           ///< min over points of cost - optimal
};

inline ModelParams fig2_params() { return ModelParams::symmetric(0.9, 0.9, 1.0, 0.5, 0.9); }

inline Fig2Data fig2(const ModelParams& m, int k_max = 4, double step = 0.01) {
  const auto V = solve_value_function(m).value;
  const auto xs = axis_values(0.0, 1.0, step);
  Fig2Data d;
  d.min_excess = std::numeric_limits<double>::infinity();
  for (int K = 1; K <= k_max; ++K) {
    const auto pol = policy_from_q(asymptotic_q(m, K).table);
    const auto table = evaluate_window_policy_table(pol, m);
    d.max_gap[K] = -std::numeric_limits<double>::infinity();
    for (double x0 : xs) {
      const double cost = table.at(window_for_belief(x0, K, m).code(), x0);
      const double opt = V(x0);
      d.points.push_back({x0, K, cost, opt});
      d.min_excess = std::min(d.min_excess, cost - opt);
      if (cost - opt > d.max_gap[K]) {
        d.max_gap[K] = cost - opt;
        d.argmax_gap[K] = x0;
      }
    }
  }
  return d;
}

inline std::string fig2_csv(const Fig2Data& d) {
  std::ostringstream o;
  o.precision(17);
  o << "x0,K,cost,optimal_cost\n";
  for (const auto& p : d.points) o << p.x0 << ',' << p.K << ',' << p.cost << ',' << p.optimal << '\n';
  return o.str();
}

// ---- Fig 3: regimes where the window policy is not incentive compatible ----

struct Fig3Setup {
  std::string name;
  ModelParams base;
  ScanAxis axis;
  std::vector<double> values;
};

inline Fig3Setup fig3_setup(const std::string& name) {
  if (name == "fig3a") {
    return {name, ModelParams::symmetric(0.9, 0.9, 1.0, 0.5, 0.9), ScanAxis::CostP2, axis_values(0.0, 1.0, 0.001)};
  }
  if (name == "fig3b") {
    return {name, ModelParams::symmetric(0.9, 0.9, 1.0, 0.8, 0.9), ScanAxis::ChainPersistence,
            axis_values(0.5, 0.999, 0.001)};
  }
  if (name == "fig3c") {
    return {name, ModelParams::symmetric(0.9, 0.9, 1.0, 0.8, 0.9), ScanAxis::Discount,
            axis_values(0.001, 0.999, 0.001)};
  }
  throw std::invalid_argument("figure: no Fig 3 panel named '" + name + "'");
}

struct Fig3Data {
  std::vector<RegimeRow> rows;
  std::map<int, std::size_t> non_ic;  ///< count of non-IC axis points per K
};

inline Fig3Data fig3(const Fig3Setup& s, int k_min = 1, int k_max = 6) {
  Fig3Data d;
  d.rows = ic_regime_scan(s.base, s.axis, s.values, k_min, k_max);
  for (int K = k_min; K <= k_max; ++K) d.non_ic[K] = 0;
  for (const auto& r : d.rows) d.non_ic[r.K] += r.non_ic();
  return d;
}

inline std::string fig3_csv(const Fig3Data& d) {
  std::ostringstream o;
  write_regime_csv(o, d.rows);
  return o.str();
}

// ---- Fig 4: three-path policy map -----------------------------------------

inline ModelParams fig4_params() { return ModelParams::symmetric(0.9, 0.9, 1.0, 0.7, 0.9); }

struct Fig4Data {
  Solve3Result solution;
  PolicyMap3 map;
};

inline Fig4Data fig4(const ModelParams& m, std::size_t n = 100, double tol = 1e-9) {
  auto r = solve_3path(m, BeliefGrid{n}, tol);
  auto p = policy_map_3(r.value, m);
  return {std::move(r), std::move(p)};
}

inline std::string fig4_csv(const Fig4Data& d) {
  std::ostringstream o;
  write_policy_map_csv(o, d.map);
  return o.str();
}

// ---- Table 1: three-path IC scan ------------------------------------------

struct Table1Row {
  std::string name;
  ModelParams base;
  ScanAxis axis;
  std::vector<double> values;
};

inline std::vector<Table1Row> table1_rows() {
  return {
      {"c_m", ModelParams::symmetric(0.9, 0.9, 1.0, 0.5, 0.9), ScanAxis::CostP2, axis_values(0.0, 1.0, 0.01)},
      {"q", ModelParams::symmetric(0.9, 0.9, 1.0, 0.8, 0.9), ScanAxis::ChainPersistence, axis_values(0.5, 0.99, 0.01)},
      {"beta", ModelParams::symmetric(0.9, 0.9, 1.0, 0.8, 0.9), ScanAxis::Discount, axis_values(0.01, 0.99, 0.01)},
  };
}

struct Table1Summary {
  std::string row;
  int K;
  std::size_t ic = 0;
  std::size_t total = 0;
  double lo = 0.0, hi = 0.0;  ///< smallest and largest IC axis value
};

struct Table1Data {
  std::vector<Table1Cell> cells;
  std::vector<Table1Summary> summary;
};

inline Table1Data table1(int k_min = 1, int k_max = 4) {
  Table1Data d;
  for (const auto& row : table1_rows()) {
    const auto cells = ic_scan_3path(row.base, row.axis, row.values, k_min, k_max);
    for (int K = k_min; K <= k_max; ++K) {
      Table1Summary s{row.name, K};
      bool first = true;
      for (const auto& c : cells) {
        if (c.K != K) continue;
        ++s.total;
        if (!c.ic) continue;
        ++s.ic;
        if (first) s.lo = c.axis_value;
        s.hi = c.axis_value;
        first = false;
      }
      d.summary.push_back(s);
    }
    d.cells.insert(d.cells.end(), cells.begin(), cells.end());
  }
  return d;
}

inline std::string table1_cells_csv(const Table1Data& d) {
  std::ostringstream o;
  o.precision(17);
  o << "row,axis_value,K,ic\n";
  for (const auto& c : d.cells) o << c.row << ',' << c.axis_value << ',' << c.K << ',' << (c.ic ? 1 : 0) << '\n';
  return o.str();
}

/// One line per (row, K): IC count and the IC range.
inline std::string table1_summary_csv(const Table1Data& d) {
  std::ostringstream o;
  o.precision(17);
  o << "row,K,ic_points,total_points,ic_lo,ic_hi,all_ic\n";
  for (const auto& s : d.summary) {
    o << s.row << ',' << s.K << ',' << s.ic << ',' << s.total << ',';
    if (s.ic > 0) {
      o << s.lo << ',' << s.hi;
    } else {
      o << ',';
    }
    o << ',' << (s.ic == s.total ? 1 : 0) << '\n';
  }
  return o.str();
}

// ---- PoA rows -------------------------------------------------------------

struct PoARow {
  ModelParams m;
  double x;
  double ratio;
};

inline std::string poa_csv(const std::vector<PoARow>& rows) {
  std::ostringstream o;
  o.precision(17);
  o << "p,q,c,c_M,x,ratio\n";
  for (const auto& r : rows) {
    o << r.m.p_h() << ',' << r.m.q_hh() << ',' << r.m.c() << ',' << r.m.c_m() << ',' << r.x << ',' << r.ratio << '\n';
  }
  return o.str();
}

/// Random symmetric instances for the PoA sweep, beta in [0, 0.95).
inline std::vector<ModelParams> random_instances(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ModelParams> out;
  while (out.size() < n) {
    const double p = 0.5 + 0.5 * rng.uniform(), q = 0.5 + 0.499 * rng.uniform();
    const double beta = 0.95 * rng.uniform(), c = 0.5 + rng.uniform();
    const double cm = c * (0.05 + 0.95 * rng.uniform());
    const auto m = ModelParams::symmetric(p, q, c, cm, beta);
    if (m.c_h() > m.c_l()) out.push_back(m);
  }
  return out;
}

inline PoARow poa_instance(const ModelParams& m, std::size_t grid_n = 1001) {
  const BeliefGrid g(grid_n);
  const auto r = poa_ratio(value_myopic(m, g).value, solve_value_function(m, g).value, m);
  return {m, r.argmax_x, r.ratio};
}

/// Ratio at x0 on the myopic worst-case family.
inline PoARow poa_worst_myopic(double beta, double eps, double q, double c_m) {
  const auto w = worst_case_instance_myopic(beta, eps, q, c_m);
  const auto t = myopic_threshold(w.params);
  const auto Vm = value_myopic(w.params).value;
  const auto V = solve_value_function(w.params).value;
  const double vm = policy_value_at(w.x0, Vm, w.params, [t](double x) { return policy_myopic(x, t); });
  return {w.params, w.x0, cost_ratio(vm, optimal_value_at(w.x0, V, w.params))};
}

/// Ratio at x0 = 0 on the no-information worst-case family.
inline PoARow poa_worst_no_info(double beta, double q, double c_m) {
  const auto w = worst_case_instance_no_info(beta, q, c_m);
  const auto V = solve_value_function(w.params).value;
  return {w.params, w.x0, cost_ratio(value_no_info(w.x0, w.params), optimal_value_at(w.x0, V, w.params))};
}

}  // namespace pathlearn::repro
