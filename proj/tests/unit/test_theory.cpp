#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "entropic/advantages.hpp"
#include "entropic/error.hpp"
#include "entropic/losses.hpp"
#include "entropic/theory.hpp"
#include "oracles.hpp"

using namespace entropic;
using Vec = std::vector<double>;

namespace {

SoftmaxPolicy from_p(Vec p) { return SoftmaxPolicy::from_probabilities(p); }
const Vec kP{0.7, 0.2, 0.1};
const Vec kAdv{1.0, -7.0 / 3.0, -7.0 / 3.0};

}  // namespace

TEST(Covariance, ConstantAdvantageGivesZero) {
  EXPECT_NEAR(covariance_entropy_change(from_p(kP), profile_from_vector({0.0, 0.0, 0.0}), 0.01), 0.0, 1e-18);
}

TEST(Covariance, AllPositiveDecreases) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    Vec x(5);
    for (double& v : x) v = n(rng);
    EXPECT_LE(covariance_entropy_change(SoftmaxPolicy(x), profile_from_vector(Vec(5, 0.8)), 0.1), 1e-17);
  }
}

TEST(Covariance, MatchesEnumeration) {
  const double ref = static_cast<double>(oracle::covariance_change(oracle::to_real(kP), kAdv, 0.01));
  EXPECT_NEAR(covariance_entropy_change(from_p(kP), profile_from_vector(kAdv), 0.01), ref, 1e-16);
}

TEST(STerms, SingletonAndEqualProbabilities) {
  EXPECT_EQ(compute_s_terms(from_p(kP), profile_from_vector(kAdv)).s_pos, 0.0);
  const auto s = compute_s_terms(from_p({0.3, 0.3, 0.4}), profile_from_vector({1.0, 1.0, -1.5}));
  EXPECT_NEAR(s.s_pos, 0.0, 1e-17);
}

TEST(STerms, MatchesPairEnumeration) {
  const Vec p{0.5, 0.2, 0.3};
  const auto adv = profile_from_vector({0.6, 0.6, -1.4});
  const auto s = compute_s_terms(from_p(p), adv);
  const auto rp = oracle::to_real(p);
  EXPECT_NEAR(s.s_pos, static_cast<double>(oracle::pair_sum(rp, {true, true, false})), 1e-15);
  EXPECT_NEAR(s.s_neg, static_cast<double>(oracle::pair_sum(rp, {false, false, true})), 1e-15);
  EXPECT_GT(s.s_pos, 0.0);
}

TEST(STerms, NonNegative) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Vec x(6);
    for (double& v : x) v = n(rng);
    const auto pol = SoftmaxPolicy(x);
    const auto s = compute_s_terms(pol, exact_advantages(BinaryTask{6, {0, 2, 3}}, pol));
    EXPECT_GE(s.s_pos, 0.0);
    EXPECT_GE(s.s_neg, 0.0);
  }
}

TEST(STerms, HighprobVanishesAboveHalf) {
  const auto pol = from_p({0.96, 0.03, 0.01});
  const auto s = compute_s_terms_highprob(pol, profile_from_vector({1.0, 1.0, -98.0}), 0.95);
  EXPECT_EQ(s.s_pos, 0.0);
  EXPECT_EQ(s.s_neg, 0.0);
  const auto lo = compute_s_terms_highprob(from_p({0.45, 0.45, 0.1}), profile_from_vector({1.0, 1.0, -9.0}), 0.3);
  EXPECT_NEAR(lo.s_pos, 0.0, 1e-17);
}

TEST(SameSignForm, BalancedConfigurationIsStationary) {
  const auto pol = from_p({0.2, 0.2, 0.3, 0.3});
  const auto adv = exact_advantages(BinaryTask{4, {0, 1}}, pol);
  EXPECT_NEAR(same_sign_pair_entropy_change(pol, adv, 0.0, 0.01), 0.0, 1e-18);
}

TEST(SameSignForm, AlphaOne) {
  const auto pol = from_p({0.5, 0.2, 0.3});
  const auto adv = profile_from_vector({0.6, 0.6, -1.4});
  const auto s = compute_s_terms(pol, adv);
  const double v = same_sign_pair_entropy_change(pol, adv, 1.0, 0.01);
  EXPECT_NEAR(v, -2.0 * 0.01 * 0.6 * s.s_pos, 1e-17);
  EXPECT_LE(v, 0.0);
}

TEST(Predicted, EqualsGradientInnerProduct) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const auto g = entropy_gradient(pol);
  const auto d = weighted_pg_update(pol, adv, 0.5, 0.01).delta_logits;
  long double dot = 0;
  for (std::size_t a = 0; a < 3; ++a) dot += static_cast<long double>(g[a]) * d[a];
  EXPECT_NEAR(predicted_entropy_change(pol, adv, 0.5, 0.01), static_cast<double>(dot), 1e-16);
}

TEST(Predicted, OracleConsistencyOnRandomTasks) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec x(6);
    for (double& v : x) v = n(rng);
    const auto pol = SoftmaxPolicy(x);
    const auto adv = exact_advantages(BinaryTask{6, {1, 4}}, pol);
    const double alpha = u(rng);
    const auto d = weighted_pg_update(pol, adv, alpha, 0.05).delta_logits;
    EXPECT_NEAR(predicted_entropy_change(pol, adv, alpha, 0.05), first_order_entropy_change(pol, d), 1e-10);
    EXPECT_NEAR(predicted_entropy_change(pol, adv, 0.0, 0.05), covariance_entropy_change(pol, adv, 0.05), 1e-12);
  }
}

TEST(OffPolicyBias, OnPolicyIsZero) {
  const auto pol = from_p(kP);
  const auto b = offpolicy_bias(pol, pol, profile_from_vector(kAdv), LossVariant{LossKind::kOffPolicyClipped});
  EXPECT_NEAR(b.delta, 0.0, 1e-15);
}

TEST(OffPolicyBias, ZeroAdvantages) {
  EXPECT_EQ(offpolicy_bias(from_p(kP), from_p({0.6, 0.3, 0.1}), profile_from_vector({0.0, 0.0, 0.0}),
                           LossVariant{LossKind::kOffPolicyClipped}).delta,
            0.0);
}

TEST(OffPolicyBias, MatchesDirectSums) {
  const Vec p{0.5, 0.3, 0.2}, m{0.6, 0.25, 0.15};
  const auto pol = from_p(p);
  const auto adv = exact_advantages(BinaryTask{3, {0}}, pol);
  const auto b = offpolicy_bias(pol, from_p(m), adv, LossVariant{LossKind::kOffPolicyClipped});
  long double delta = 0, s2l = 0, sl = 0, s2 = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    const long double rho = static_cast<long double>(p[a]) / m[a];
    if (rho > 0.8L && rho < 1.2L) delta += m[a] * rho * adv.advantages[a];
    s2l += static_cast<long double>(p[a]) * p[a] * std::log(static_cast<long double>(p[a]));
    sl += p[a] * std::log(static_cast<long double>(p[a]));
    s2 += static_cast<long double>(p[a]) * p[a];
  }
  EXPECT_NEAR(b.delta, static_cast<double>(delta), 1e-15);
  EXPECT_NEAR(b.c_factor, static_cast<double>(s2l - sl * s2), 1e-15);
}

TEST(SteadyState, Formula) {
  EntropyDynamics dyn;
  dyn.s_pos = 0.02;
  dyn.s_neg = 0.01;
  dyn.delta_bias = 0.0;
  dyn.c_factor = -0.1;
  EXPECT_EQ(steady_state_error(dyn, 1.0, 2.0, 1.0), 0.0);
  dyn.delta_bias = 0.05;
  const double e1 = steady_state_error(dyn, 1.0, 2.0, 1.0);
  EXPECT_NEAR(e1, 0.05 * -0.1 / (0.02 + 2.0 * 0.01), 1e-15);
  EXPECT_NEAR(steady_state_error(dyn, 2.0, 2.0, 1.0), e1 / 2.0, 1e-15);
  EXPECT_THROW(steady_state_error(dyn, 0.0, 2.0, 1.0), Error);
  dyn.s_pos = dyn.s_neg = 0.0;
  try {
    steady_state_error(dyn, 1.0, 2.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateDynamics);
  }
}

TEST(SteadyState, FromOffPolicyInstance) {
  const Vec p{0.5, 0.3, 0.2}, m{0.6, 0.25, 0.15};
  const auto pol = from_p(p);
  const auto adv = exact_advantages(BinaryTask{3, {0, 1}}, pol);
  const auto dyn = entropy_dynamics(pol, from_p(m), adv, 0.0, 0.1, LossVariant{LossKind::kOffPolicyClipped});
  const double e = steady_state_error(dyn, 1.0, adv.h, adv.a_pos);
  EXPECT_NEAR(e, dyn.delta_bias * dyn.c_factor / (adv.a_pos * (dyn.s_pos + adv.h * dyn.s_neg)), 1e-15);
  EXPECT_NEAR(dyn.c0, loop_gain({dyn.s_pos, dyn.s_neg}, adv.a_pos, adv.h, 0.1), 1e-18);
}

TEST(Stability, ProportionalOnly) {
  for (double x : {0.1, 0.7, 1.3, 1.9}) {
    const auto r = stability_report(1.0, x, 0.0);
    const auto m = r.eigenvalue_moduli;
    const double lo = std::min(m[0], m[1]), hi = std::max(m[0], m[1]);
    EXPECT_NEAR(hi, 1.0, 1e-12);
    EXPECT_NEAR(lo, std::abs(1.0 - x), 1e-12);
  }
}

TEST(Stability, DefaultGainsAtUnitLoop) {
  const auto r = stability_report(1.0, 1.0, 0.01);
  EXPECT_TRUE(r.condition_p);
  EXPECT_TRUE(r.condition_i);
  EXPECT_TRUE(r.stable);
}

TEST(Stability, MatchesEigensolver) {
  const auto r = stability_report(0.05, 1.0, 0.01);
  const auto& m = r.recurrence_matrix;
  EXPECT_NEAR(m[0][0], 0.95, 1e-15);
  EXPECT_NEAR(m[0][1], -0.0005, 1e-15);
  EXPECT_NEAR(m[1][0], 0.95, 1e-15);
  EXPECT_NEAR(m[1][1], 0.9995, 1e-15);
  const auto ref = oracle::eigen_moduli(m[0][0], m[0][1], m[1][0], m[1][1]);
  const double lo = std::min(r.eigenvalue_moduli[0], r.eigenvalue_moduli[1]);
  const double hi = std::max(r.eigenvalue_moduli[0], r.eigenvalue_moduli[1]);
  EXPECT_NEAR(lo, ref[0], 1e-12);
  EXPECT_NEAR(hi, ref[1], 1e-12);
  EXPECT_NEAR(r.lyapunov_b, 0.0005, 1e-18);
  EXPECT_TRUE(r.stable);
  EXPECT_THROW(stability_report(0.0, 1.0, 0.01), Error);
}

TEST(Stability, RecurrenceStep) {
  const auto r = stability_report(0.5, 1.0, 0.2);
  const auto [e, i] = recurrence_step(r, 0.4, -0.3);
  EXPECT_NEAR(e, 0.5 * 0.4 - 0.1 * -0.3, 1e-15);
  EXPECT_NEAR(i, 0.5 * 0.4 + 0.9 * -0.3, 1e-15);
}

TEST(Lyapunov, Values) {
  EXPECT_EQ(lyapunov_value(0.0, 0.0, 0.3), 0.0);
  EXPECT_NEAR(lyapunov_value(0.4, -0.7, 0.5), 0.16 + 0.49, 1e-15);
  EXPECT_NEAR(lyapunov_value(0.3, -1.2, 0.01), 0.09 + (0.01 / 0.99) * 1.44, 1e-15);
  EXPECT_THROW(lyapunov_value(0.1, 0.1, 0.0), Error);
  EXPECT_THROW(lyapunov_value(0.1, 0.1, 1.0), Error);
}
