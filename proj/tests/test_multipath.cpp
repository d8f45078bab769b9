#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <sstream>

#include "pathlearn/multipath.hpp"

using namespace pathlearn;
using O = Observation;

namespace {

ModelParams fig4() { return ModelParams::symmetric(0.9, 0.9, 1.0, 0.7, 0.9); }

const Solve3Result& fig4_solution() {
  static const Solve3Result r = solve_3path(fig4());
  return r;
}

}  // namespace

TEST(Q3, ZeroDiscount) {
  const auto m = fig4().with_beta(0.0);
  const auto V = ValueFunction2D::zeros(BeliefGrid{100});
  const Q3 q = q_values_3({0.2, 0.7}, V, m);
  EXPECT_DOUBLE_EQ(q.p1, expected_p1_cost(0.2, m));
  EXPECT_DOUBLE_EQ(q.p1p, expected_p1_cost(0.7, m));
  EXPECT_DOUBLE_EQ(q.p2, m.c_m());
  const auto r = solve_3path(m);
  EXPECT_EQ(r.iterations, 1);
  const auto& g = r.value.grid;
  for (std::size_t i = 0; i < g.size(); i += 7) {
    for (std::size_t j = 0; j < g.size(); j += 5) {
      EXPECT_DOUBLE_EQ(r.value.node_value(i, j), std::min({expected_p1_cost(g.node(i), m),
                                                            expected_p1_cost(g.node(j), m), m.c_m()}));
    }
  }
}

TEST(Q3, SwapSymmetryIsExact) {
  const auto m = fig4();
  const auto& V = fig4_solution().value;
  Rng rng(6);
  for (int k = 0; k < 2000; ++k) {
    const double a = rng.uniform(), b = rng.uniform();
    const Q3 ab = q_values_3({a, b}, V, m), ba = q_values_3({b, a}, V, m);
    EXPECT_EQ(ab.p1, ba.p1p);
    EXPECT_EQ(ab.p2, ba.p2);
  }
  const Q3 d = q_values_3({0.37, 0.37}, V, m);
  EXPECT_EQ(d.p1, d.p1p);
}

TEST(Solve3, SymmetricAndBounded) {
  const auto& r = fig4_solution();
  EXPECT_LT(r.value.symmetry_residual(), 1e-8);
  for (double v : r.value.values) EXPECT_LE(v, 0.7 / (1 - 0.9) + 1e-9);
}

TEST(Solve3, ExtraPathNeverHurts) {
  const auto m = fig4();
  const auto V2 = solve_value_function(m, BeliefGrid{100}).value;
  const auto& V3 = fig4_solution().value;
  const auto& g = V3.grid;
  EXPECT_LE(V3(0.5, 0.5), solve_value_function(m).value(0.5));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_LE(V3.node_value(i, j), V2.values[i] + 1e-9);
  }
}

TEST(Solve3, MonotoneInEachBelief) {
  const auto& V = fig4_solution().value;
  const std::size_t n = V.n();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_GE(V.node_value(i + 1, j), V.node_value(i, j) - 1e-6);
      EXPECT_GE(V.node_value(j, i + 1), V.node_value(j, i) - 1e-6);
    }
  }
}

TEST(Solve3, ContractionModulus) {
  const auto m = fig4();
  BeliefGrid g(30);
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    ValueFunction2D a = ValueFunction2D::zeros(g), b = ValueFunction2D::zeros(g);
    for (auto& v : a.values) v = 5 * rng.uniform();
    for (auto& v : b.values) v = 5 * rng.uniform();
    EXPECT_LE(sup_distance(bellman_backup_3(a, m).values, bellman_backup_3(b, m).values),
              m.beta() * sup_distance(a.values, b.values) + 1e-12);
  }
}

TEST(PolicyMap, Regions) {
  const auto m = fig4();
  const auto p = policy_map_3(fig4_solution().value, m);
  const std::size_t n = p.grid.size();
  EXPECT_EQ(p.at(0, 50), Action3::P1);
  EXPECT_EQ(p.at(50, 0), Action3::P1Prime);
  EXPECT_EQ(p.at(n - 1, n - 1), Action3::P2);
  EXPECT_EQ(p.at(0, n - 1), Action3::P1);
  EXPECT_EQ(p.at(n - 1, 0), Action3::P1Prime);
}

TEST(PolicyMap, MirrorSymmetry) {
  const auto p = policy_map_3(fig4_solution().value, fig4());
  const std::size_t n = p.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NE(p.at(i, i), Action3::P1Prime);
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) {
        EXPECT_EQ(p.at(i, j), mirror(p.at(j, i))) << i << "," << j;
      }
    }
  }
}

TEST(PolicyMap, TieOrder) {
  EXPECT_EQ(argmin_action(Q3{1, 1, 1}), Action3::P1);
  EXPECT_EQ(argmin_action(Q3{2, 1, 1}), Action3::P1Prime);
  EXPECT_EQ(argmin_action(Q3{2, 2, 1}), Action3::P2);
}

TEST(PolicyMap, Csv) {
  const auto m = fig4().with_beta(0.0);
  std::ostringstream out;
  write_policy_map_csv(out, policy_map_3(solve_3path(m, BeliefGrid{5}).value, m));
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "x1,x1p,action");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 26);
}

TEST(JointWindow, RejectsLargeK) {
  try {
    JointWindowModel(5, fig4());
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("59049"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ic_scan_3path(fig4(), ScanAxis::CostP2, {0.5}, 1, 5), std::invalid_argument);
}

TEST(JointWindow, ZeroDiscount) {
  const auto m = fig4().with_beta(0.0);
  const auto r = asymptotic_q_3(m, 2);
  const WindowModel wm(2, m);
  for (std::size_t w1 = 0; w1 < 9; ++w1) {
    for (std::size_t w2 = 0; w2 < 9; ++w2) {
      const std::size_t jw = w1 * 9 + w2;
      EXPECT_DOUBLE_EQ(r.table.at(jw, Action3::P1), wm.p1_cost[w1]);
      EXPECT_DOUBLE_EQ(r.table.at(jw, Action3::P1Prime), wm.p1_cost[w2]);
      EXPECT_DOUBLE_EQ(r.table.at(jw, Action3::P2), m.c_m());
    }
  }
}

TEST(JointWindow, SwapSymmetry) {
  const auto m = fig4();
  const auto q = asymptotic_q_3(m, 2).table;
  for (std::size_t w1 = 0; w1 < 9; ++w1) {
    for (std::size_t w2 = 0; w2 < 9; ++w2) {
      EXPECT_NEAR(q.at(w1 * 9 + w2, Action3::P1), q.at(w2 * 9 + w1, Action3::P1Prime), 1e-12);
      EXPECT_NEAR(q.at(w1 * 9 + w2, Action3::P2), q.at(w2 * 9 + w1, Action3::P2), 1e-12);
    }
  }
}

// Dense solve of the 36-state chain (two hidden states, two K=1 windows).
TEST(JointWindow, LawMatchesDenseSolve) {
  const auto m = fig4();
  const auto pol = policy_from_q_3(asymptotic_q_3(m, 1).table);
  const auto mass = stationary_joint_window_distribution(pol, m);
  const std::size_t ny = 3, nw = 9, n = 4 * nw;
  const double stay[2] = {m.q_hh(), m.q_ll()}, hz[2] = {m.p_h(), m.p_l()};
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s1 = 0; s1 < 2; ++s1) {
    for (std::size_t s2 = 0; s2 < 2; ++s2) {
      for (std::size_t w1 = 0; w1 < ny; ++w1) {
        for (std::size_t w2 = 0; w2 < ny; ++w2) {
          std::vector<std::pair<std::size_t, double>> next;
          const auto a = pol.actions[w1 * ny + w2];
          if (a == Action3::P1) {
            next.push_back({shift_code(w1, ny, O::Hazard) * ny + shift_code(w2, ny, O::NoInfo), hz[s1]});
            next.push_back({shift_code(w1, ny, O::NoHazard) * ny + shift_code(w2, ny, O::NoInfo), 1 - hz[s1]});
          } else if (a == Action3::P1Prime) {
            next.push_back({shift_code(w1, ny, O::NoInfo) * ny + shift_code(w2, ny, O::Hazard), hz[s2]});
            next.push_back({shift_code(w1, ny, O::NoInfo) * ny + shift_code(w2, ny, O::NoHazard), 1 - hz[s2]});
          } else {
            next.push_back({shift_code(w1, ny, O::NoInfo) * ny + shift_code(w2, ny, O::NoInfo), 1.0});
          }
          const std::size_t from = (s1 * 2 + s2) * nw + w1 * ny + w2;
          for (auto [jw, p] : next) {
            for (std::size_t t1 = 0; t1 < 2; ++t1) {
              for (std::size_t t2 = 0; t2 < 2; ++t2) {
                const double p1 = t1 == s1 ? stay[s1] : 1 - stay[s1];
                const double p2 = t2 == s2 ? stay[s2] : 1 - stay[s2];
                P(from, (t1 * 2 + t2) * nw + jw) += p * p1 * p2;
              }
            }
          }
        }
      }
    }
  }
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1;
  const Eigen::VectorXd pi = A.fullPivLu().solve(b);
  double total = 0;
  for (std::size_t jw = 0; jw < nw; ++jw) {
    double ref = 0;
    for (std::size_t s = 0; s < 4; ++s) ref += pi(s * nw + jw);
    EXPECT_NEAR(mass[jw], ref, 1e-9);
    total += mass[jw];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(IC3, Conditions) {
  const auto m = fig4();
  JointWindowPolicy all_p2{1, std::vector<Action3>(9, Action3::P2)};
  const auto mass = stationary_joint_window_distribution(all_p2, m);
  const auto r = ic_check_3(all_p2, mass, m);
  EXPECT_NEAR(r.mass[2], 1.0, 1e-12);
  EXPECT_NEAR(r.cost_p1[2], 0.5, 1e-12);
  EXPECT_FALSE(r.follows[2]);  // 0.5 < c_M: users would rather explore
  EXPECT_TRUE(r.follows[0]);   // vacuous
  const auto ok = ic_check_3(all_p2, mass, m.with_c_m(0.4));
  EXPECT_TRUE(ok.incentive_compatible());
}

TEST(IC3, ShortWindowScanRow) {
  const auto cells = ic_scan_3path(fig4(), ScanAxis::CostP2, {0.2, 0.5}, 1, 2);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].row, "c_m");
  EXPECT_EQ(cells[2].K, 2);
  for (const auto& c : cells) EXPECT_TRUE(c.ic) << c.axis_value << " K=" << c.K;
}
