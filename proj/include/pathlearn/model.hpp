#pragma once

// Two-path routing world: a deterministic path P2 with cost c_M and a
// stochastic path P1 whose hazard rate is driven by a hidden two-state
// Markov chain. Travelers on P1 report whether they met a hazard; the
// platform keeps a scalar belief that P1 is in the high-hazard state.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pathlearn/rng.hpp"

namespace pathlearn {

/// Probability that P1 is in the high-hazard state H, held just before an
/// epoch's trip. Always in [0, 1].
using Belief = double;

enum class PathState : std::uint8_t { H, L };

/// Trip report. NoInfo is produced exactly when the traveler took P2.
enum class Observation : std::uint8_t { NoHazard = 0, Hazard = 1, NoInfo = 2 };

enum class Action : std::uint8_t { P1, P2 };

inline const char* to_string(Action a) { return a == Action::P1 ? "P1" : "P2"; }

inline const char* to_string(Observation y) {
  switch (y) {
    case Observation::NoHazard: return "0";
    case Observation::Hazard: return "1";
    case Observation::NoInfo: return "-";
  }
  return "?";
}

inline const char* to_string(PathState s) { return s == PathState::H ? "H" : "L"; }

/// Full parameterization of the two-path world. Every instance is validated
/// on construction; there is no other validation point.
class ModelParams {
 public:
  /// General parameterization. Throws std::invalid_argument naming the field.
  static ModelParams create(double p_h, double p_l, double q_hh, double q_ll, double c,
                            double c_m, double beta) {
    ModelParams m;
    m.p_h_ = p_h;
    m.p_l_ = p_l;
    m.q_hh_ = q_hh;
    m.q_ll_ = q_ll;
    m.c_ = c;
    m.c_m_ = c_m;
    m.beta_ = beta;
    m.validate();
    return m;
  }

  /// Symmetric chain (q_HH = q_LL = q) with complementary hazard rates
  /// (p_H = p, p_L = 1 - p).
  static ModelParams symmetric(double p, double q, double c, double c_m, double beta) {
    if (!(q >= 0.5 && q < 1.0)) throw std::invalid_argument("q: symmetric model needs q in [1/2, 1)");
    if (!(p >= 0.5 && p <= 1.0)) throw std::invalid_argument("p: symmetric model needs p in [1/2, 1]");
    return create(p, 1.0 - p, q, q, c, c_m, beta);
  }

  double p_h() const { return p_h_; }
  double p_l() const { return p_l_; }
  double q_hh() const { return q_hh_; }
  double q_ll() const { return q_ll_; }
  double c() const { return c_; }
  double c_m() const { return c_m_; }
  double beta() const { return beta_; }

  double c_h() const { return p_h_ * c_; }
  double c_l() const { return p_l_ * c_; }

  bool is_symmetric() const { return q_hh_ == q_ll_ && p_l_ == 1.0 - p_h_; }

  /// Stationary probability of H for the hidden chain. A chain with both
  /// states absorbing has no unique stationary law; 1/2 is used then.
  double stationary_h() const {
    const double denom = (1.0 - q_hh_) + (1.0 - q_ll_);
    if (denom <= 0.0) return 0.5;
    return (1.0 - q_ll_) / denom;
  }

  ModelParams with_c_m(double c_m) const {
    return create(p_h_, p_l_, q_hh_, q_ll_, c_, c_m, beta_);
  }
  ModelParams with_beta(double beta) const {
    return create(p_h_, p_l_, q_hh_, q_ll_, c_, c_m_, beta);
  }
  ModelParams with_q(double q) const { return create(p_h_, p_l_, q, q, c_, c_m_, beta_); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams() = default;

  static void require_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + ": must be a probability in [0, 1]");
    }
  }

  void validate() const {
    require_probability(p_h_, "p_h");
    require_probability(p_l_, "p_l");
    require_probability(q_hh_, "q_hh");
    require_probability(q_ll_, "q_ll");
    // Equal hazard rates are admitted: they describe uninformative reports.
    if (p_l_ > p_h_) throw std::invalid_argument("p_l: must not exceed p_h");
    if (!(std::isfinite(c_) && c_ >= 0.0)) throw std::invalid_argument("c: must be finite and >= 0");
    if (!(std::isfinite(c_m_) && c_m_ >= 0.0)) throw std::invalid_argument("c_m: must be finite and >= 0");
    if (c_m_ > c_) throw std::invalid_argument("c_m: must not exceed c");
    if (!(beta_ >= 0.0 && beta_ < 1.0)) throw std::invalid_argument("beta: must be in [0, 1)");
  }

  double p_h_ = 0, p_l_ = 0, q_hh_ = 0, q_ll_ = 0, c_ = 0, c_m_ = 0, beta_ = 0;
};

/// Probability that a P1 traveler reports a hazard, given belief x.
inline double hazard_probability(Belief x, const ModelParams& m) {
  return x * m.p_h() + (1.0 - x) * m.p_l();
}

/// Bayes update of the belief after a trip report.
///
/// If the report has zero probability under x (only possible with
/// deterministic hazard rates and a boundary belief), the result is the
/// boundary belief that the report points to; with equal likelihoods the
/// prior is returned.
inline Belief posterior_update(Belief x, Observation y, const ModelParams& m) {
  if (y == Observation::NoInfo) return x;
  const double like_h = y == Observation::Hazard ? m.p_h() : 1.0 - m.p_h();
  const double like_l = y == Observation::Hazard ? m.p_l() : 1.0 - m.p_l();
  const double num = x * like_h;
  const double denom = num + (1.0 - x) * like_l;
  if (denom <= 0.0) {
    if (like_h > like_l) return 1.0;
    if (like_l > like_h) return 0.0;
    return x;
  }
  return num / denom;
}

/// Prior for the next epoch after the hidden chain moves once.
inline Belief transition_prior(Belief x_post, const ModelParams& m) {
  return x_post * m.q_hh() + (1.0 - x_post) * (1.0 - m.q_ll());
}

/// One full epoch of filtering: Bayes update on the report, then the chain
/// transition. Rejects reports inconsistent with the action taken.
inline Belief belief_step(Belief x, Action a, Observation y, const ModelParams& m) {
  if ((a == Action::P2) != (y == Observation::NoInfo)) {
    throw std::invalid_argument("belief_step: observation inconsistent with action");
  }
  return transition_prior(posterior_update(x, y, m), m);
}

/// Expected cost of one trip on P1 under belief x.
inline double expected_p1_cost(Belief x, const ModelParams& m) {
  return x * m.c_h() + (1.0 - x) * m.c_l();
}

inline PathState sample_state_transition(PathState s, const ModelParams& m, Rng& rng) {
  if (s == PathState::H) return rng.bernoulli(m.q_hh()) ? PathState::H : PathState::L;
  return rng.bernoulli(m.q_ll()) ? PathState::L : PathState::H;
}

inline Observation sample_observation(PathState s, Action a, const ModelParams& m, Rng& rng) {
  if (a == Action::P2) return Observation::NoInfo;
  const double p = s == PathState::H ? m.p_h() : m.p_l();
  return rng.bernoulli(p) ? Observation::Hazard : Observation::NoHazard;
}

// key=value parameter files: p_h, p_l, q_hh, q_ll, c, c_m, beta.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: '" + text + "'");
  }
  if (used != text.size()) throw std::invalid_argument(key + ": trailing characters in '" + text + "'");
  return v;
}

}  // namespace detail

inline ModelParams parse_params(std::string_view text) {
  constexpr const char* kKeys[] = {"p_h", "p_l", "q_hh", "q_ll", "c", "c_m", "beta"};
  double vals[7];
  bool seen[7] = {};
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    int idx = -1;
    for (int i = 0; i < 7; ++i) {
      if (key == kKeys[i]) idx = i;
    }
    if (idx < 0) throw std::invalid_argument(key + ": unknown key");
    if (seen[idx]) throw std::invalid_argument(key + ": duplicate key");
    vals[idx] = detail::parse_double(key, value);
    seen[idx] = true;
  }
  for (int i = 0; i < 7; ++i) {
    if (!seen[i]) throw std::invalid_argument(std::string(kKeys[i]) + ": missing");
  }
  return ModelParams::create(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]);
}

inline std::string format_params(const ModelParams& m) {
  std::ostringstream out;
  out.precision(17);
  out << "p_h=" << m.p_h() << "\np_l=" << m.p_l() << "\nq_hh=" << m.q_hh() << "\nq_ll=" << m.q_ll()
      << "\nc=" << m.c() << "\nc_m=" << m.c_m() << "\nbeta=" << m.beta() << "\n";
  return out.str();
}

}  // namespace pathlearn
