#include <gtest/gtest.h>

#include <cmath>

#include "pathlearn/model.hpp"

using namespace pathlearn;

namespace {

ModelParams base() { return ModelParams::symmetric(0.9, 0.9, 1.0, 0.5, 0.9); }

}  // namespace

TEST(Params, SymmetricFillsFields) {
  const auto m = base();
  EXPECT_DOUBLE_EQ(m.p_h(), 0.9);
  EXPECT_DOUBLE_EQ(m.p_l(), 1.0 - 0.9);
  EXPECT_DOUBLE_EQ(m.q_hh(), 0.9);
  EXPECT_DOUBLE_EQ(m.q_ll(), 0.9);
  EXPECT_DOUBLE_EQ(m.c_h(), 0.9);
  EXPECT_NEAR(m.c_l(), 0.1, 1e-15);
  EXPECT_TRUE(m.is_symmetric());
  EXPECT_DOUBLE_EQ(m.stationary_h(), 0.5);
}

TEST(Params, RejectsInvalid) {
  EXPECT_THROW(ModelParams::create(0.1, 0.9, 0.9, 0.9, 1, 0.5, 0.9), std::invalid_argument);  // p_l > p_h
  EXPECT_THROW(ModelParams::create(0.9, 0.1, 0.9, 0.9, 1, 1.5, 0.9), std::invalid_argument);  // c_m > c
  EXPECT_THROW(ModelParams::create(0.9, 0.1, 0.9, 0.9, 1, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(ModelParams::create(1.1, 0.1, 0.9, 0.9, 1, 0.5, 0.9), std::invalid_argument);
  EXPECT_THROW(ModelParams::create(0.9, 0.1, 0.9, 0.9, -1, 0.0, 0.9), std::invalid_argument);
  EXPECT_THROW(ModelParams::symmetric(0.9, 1.0, 1, 0.5, 0.9), std::invalid_argument);
  EXPECT_THROW(ModelParams::symmetric(0.4, 0.9, 1, 0.5, 0.9), std::invalid_argument);
}

TEST(Params, ErrorNamesField) {
  try {
    ModelParams::create(0.9, 0.1, 0.9, 0.9, 1, 0.5, 1.0);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("beta", 0), 0u) << e.what();
  }
}

TEST(Params, StationaryGeneral) {
  const auto m = ModelParams::create(0.8, 0.3, 0.7, 0.9, 1, 0.5, 0.9);
  // pi_H = (1 - q_LL) / (2 - q_HH - q_LL)
  EXPECT_NEAR(m.stationary_h(), 0.1 / 0.4, 1e-15);
}

TEST(Posterior, Examples) {
  const auto m = base();
  EXPECT_EQ(posterior_update(0.7, Observation::NoInfo, m), 0.7);
  EXPECT_NEAR(posterior_update(0.5, Observation::Hazard, m), 0.9, 1e-15);
  EXPECT_EQ(posterior_update(1.0, Observation::NoHazard, m), 1.0);
  EXPECT_EQ(posterior_update(0.0, Observation::Hazard, m), 0.0);
}

TEST(Posterior, ZeroDenominatorGoesToBoundary) {
  // p_H = 1, p_L = 0: a hazard at x = 0 is impossible, report points to H.
  const auto m = ModelParams::create(1.0, 0.0, 0.9, 0.9, 1, 0.5, 0.9);
  EXPECT_EQ(posterior_update(0.0, Observation::Hazard, m), 1.0);
  EXPECT_EQ(posterior_update(1.0, Observation::NoHazard, m), 0.0);
  EXPECT_EQ(posterior_update(0.3, Observation::Hazard, m), 1.0);
}

TEST(Posterior, MonotoneInPrior) {
  const auto m = ModelParams::create(0.8, 0.3, 0.7, 0.9, 1, 0.5, 0.9);
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double a = rng.uniform(), b = rng.uniform();
    if (a > b) std::swap(a, b);
    for (auto y : {Observation::Hazard, Observation::NoHazard, Observation::NoInfo}) {
      EXPECT_LE(posterior_update(a, y, m), posterior_update(b, y, m) + 1e-15);
    }
  }
}

TEST(Transition, Examples) {
  EXPECT_DOUBLE_EQ(transition_prior(0.3, ModelParams::symmetric(0.9, 0.5, 1, 0.5, 0.9)), 0.5);
  EXPECT_DOUBLE_EQ(transition_prior(1.0, base()), 0.9);
  EXPECT_DOUBLE_EQ(transition_prior(0.5, base()), 0.5);
}

TEST(BeliefStep, Examples) {
  const auto m = base();
  EXPECT_DOUBLE_EQ(belief_step(0.5, Action::P2, Observation::NoInfo, m), 0.5);
  EXPECT_NEAR(belief_step(0.5, Action::P1, Observation::Hazard, m), 0.82, 1e-15);
  EXPECT_NEAR(belief_step(0.0, Action::P1, Observation::NoHazard, m), 0.1, 1e-15);
}

TEST(BeliefStep, RejectsInconsistentPair) {
  const auto m = base();
  EXPECT_THROW(belief_step(0.5, Action::P2, Observation::Hazard, m), std::invalid_argument);
  EXPECT_THROW(belief_step(0.5, Action::P1, Observation::NoInfo, m), std::invalid_argument);
}

TEST(BeliefStep, NoInfoEqualsTransition) {
  const auto m = ModelParams::create(0.8, 0.3, 0.7, 0.9, 1, 0.5, 0.9);
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    EXPECT_EQ(belief_step(x, Action::P2, Observation::NoInfo, m), transition_prior(x, m));
  }
}

TEST(BeliefStep, StaysInChainRange) {
  const auto m = ModelParams::create(0.8, 0.3, 0.7, 0.9, 1, 0.5, 0.9);
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform();
    for (auto y : {Observation::Hazard, Observation::NoHazard}) {
      const double n = belief_step(x, Action::P1, y, m);
      EXPECT_GE(n, 1.0 - m.q_ll() - 1e-15);
      EXPECT_LE(n, m.q_hh() + 1e-15);
    }
  }
}

TEST(Cost, Examples) {
  const auto m = base();
  EXPECT_NEAR(expected_p1_cost(0.5, m), 0.5, 1e-15);
  EXPECT_NEAR(expected_p1_cost(1.0, m), 0.9, 1e-15);
  EXPECT_NEAR(expected_p1_cost(0.25, m), 0.3, 1e-15);
}

TEST(Sampling, Deterministic) {
  const auto always = ModelParams::create(1.0, 0.5, 1.0, 0.0, 1, 0.5, 0.9);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_state_transition(PathState::H, always, rng), PathState::H);
    EXPECT_EQ(sample_state_transition(PathState::L, always, rng), PathState::H);
    EXPECT_EQ(sample_observation(PathState::H, Action::P1, always, rng), Observation::Hazard);
    EXPECT_EQ(sample_observation(PathState::L, Action::P2, always, rng), Observation::NoInfo);
  }
}

TEST(Sampling, FrequenciesWithinBinomialBand) {
  const auto m = ModelParams::create(0.8, 0.3, 0.7, 0.9, 1, 0.5, 0.9);
  const int n = 100000;
  Rng rng(11);
  int stay = 0, hz = 0;
  for (int i = 0; i < n; ++i) {
    stay += sample_state_transition(PathState::H, m, rng) == PathState::H;
    hz += sample_observation(PathState::L, Action::P1, m, rng) == Observation::Hazard;
  }
  auto band = [n](double p) { return 3.0 * std::sqrt(p * (1 - p) / n); };
  EXPECT_NEAR(stay / double(n), m.q_hh(), band(m.q_hh()));
  EXPECT_NEAR(hz / double(n), m.p_l(), band(m.p_l()));
}

// The filter is calibrated: among epochs with x in [b, b+0.05), the share
// spent in H is close to the bin's beliefs.
TEST(Filter, Calibration) {
  const auto m = base();
  Rng rng(5);
  PathState s = PathState::H;
  double x = 0.5;
  const int bins = 20;
  std::vector<double> in_h(bins, 0), count(bins, 0), xsum(bins, 0);
  for (int t = 0; t < 1'000'000; ++t) {
    // Alternate actions so both kinds of update occur.
    const Action a = (t % 3 == 2) ? Action::P2 : Action::P1;
    const int b = std::min(bins - 1, static_cast<int>(x * bins));
    count[b] += 1;
    xsum[b] += x;
    in_h[b] += s == PathState::H;
    const Observation y = sample_observation(s, a, m, rng);
    x = belief_step(x, a, y, m);
    s = sample_state_transition(s, m, rng);
  }
  for (int b = 0; b < bins; ++b) {
    if (count[b] < 2000) continue;
    EXPECT_NEAR(in_h[b] / count[b], xsum[b] / count[b], 0.02) << "bin " << b;
  }
}

TEST(Config, RoundTrip) {
  const auto m = ModelParams::create(0.8, 0.3, 0.7, 0.9, 1.5, 0.5, 0.95);
  EXPECT_EQ(parse_params(format_params(m)), m);
}

TEST(Config, CommentsAndWhitespace) {
  const auto m = parse_params("# model\n p_h = 0.9\np_l=0.1 # low\nq_hh=0.9\nq_ll=0.9\n\nc=1\nc_m=0.5\nbeta=0.9\n");
  EXPECT_EQ(m, ModelParams::create(0.9, 0.1, 0.9, 0.9, 1, 0.5, 0.9));
}

TEST(Config, Rejections) {
  const std::string ok = "p_h=0.9\np_l=0.1\nq_hh=0.9\nq_ll=0.9\nc=1\nc_m=0.5\n";
  EXPECT_THROW(parse_params(ok), std::invalid_argument);                       // beta missing
  EXPECT_THROW(parse_params(ok + "beta=0.9\nfoo=1\n"), std::invalid_argument);  // unknown
  EXPECT_THROW(parse_params(ok + "beta=0.9\nc=2\n"), std::invalid_argument);    // duplicate
  EXPECT_THROW(parse_params(ok + "beta=1.0\n"), std::invalid_argument);
  EXPECT_THROW(parse_params(ok + "beta=0.9x\n"), std::invalid_argument);
  EXPECT_THROW(parse_params(ok + "beta\n"), std::invalid_argument);
}

TEST(Rng, ReplayAndRange) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    differs |= u != c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_TRUE(differs);
}
