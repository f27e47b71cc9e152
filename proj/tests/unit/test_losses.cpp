#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "entropic/advantages.hpp"
#include "entropic/error.hpp"
#include "entropic/losses.hpp"
#include "oracles.hpp"

using namespace entropic;
using Vec = std::vector<double>;

namespace {

SoftmaxPolicy from_p(Vec p) { return SoftmaxPolicy::from_probabilities(p); }
Vec logits_of(const SoftmaxPolicy& p) { return Vec(p.logits().begin(), p.logits().end()); }

Vec fd_update(const std::function<long double(const Vec&)>& loss, const Vec& x, double eta) {
  Vec g = oracle::central_gradient(loss, x);
  for (double& v : g) v *= -eta;
  return g;
}

void expect_vec_near(const Vec& a, const Vec& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

const Vec kP{0.7, 0.2, 0.1};
const Vec kAdv{1.0, -7.0 / 3.0, -7.0 / 3.0};

}  // namespace

TEST(ClassWeight, Values) {
  EXPECT_EQ(class_weight(2.0, 0.3), 1.3);
  EXPECT_EQ(class_weight(-2.0, 0.3), 0.7);
  EXPECT_EQ(class_weight(0.0, 0.3), 1.0);
}

TEST(ClipBand, IsStrict) {
  EXPECT_TRUE(inside_clip_band(1.0, 0.2, 0.2));
  EXPECT_FALSE(inside_clip_band(1.2, 0.2, 0.2));
  EXPECT_FALSE(inside_clip_band(0.8, 0.2, 0.2));
  EXPECT_FALSE(inside_clip_band(1.0, 0.0, 0.0));
}

TEST(WeightedUpdate, AlphaZeroIsPlainGradient) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const auto d = weighted_pg_update(pol, adv, 0.0, 0.01).delta_logits;
  const Vec fd = fd_update([&](const Vec& t) { return oracle::weighted_loss(t, kP, kAdv, 0.0); },
                           logits_of(pol), 0.01);
  EXPECT_LT(oracle::relative_error(d, fd), 1e-7);
}

TEST(WeightedUpdate, AlphaOneUsesPositivesOnly) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const auto full = weighted_pg_update(pol, adv, 1.0, 0.05).delta_logits;
  std::vector<bool> keep{true, false, false};
  const auto pos_only = masked_pg_update(pol, adv, keep, 1.0, 0.05).delta_logits;
  expect_vec_near(full, pos_only, 1e-15);
}

TEST(WeightedUpdate, MatchesFiniteDifferences) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const auto d = weighted_pg_update(pol, adv, 0.5, 0.01);
  EXPECT_EQ(d.step_size, 0.01);
  const Vec fd = fd_update([&](const Vec& t) { return oracle::weighted_loss(t, kP, kAdv, 0.5); },
                           logits_of(pol), 0.01);
  EXPECT_LT(oracle::relative_error(d.delta_logits, fd), 1e-7);
}

TEST(WeightedUpdate, LossValueMatchesOracle) {
  const auto pol = from_p(kP);
  EXPECT_NEAR(weighted_pg_loss(pol, kP, profile_from_vector(kAdv), 0.5),
              static_cast<double>(oracle::weighted_loss(logits_of(pol), kP, kAdv, 0.5)), 1e-13);
}

TEST(WeightedUpdate, RejectsOutOfRangeAlpha) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const LossVariant v;
  try {
    loss_update(v, pol, pol, adv, 1.5, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kControllerRange);
  }
}

TEST(OffPolicyUpdate, OnPolicyReduction) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const LossVariant v{LossKind::kOffPolicyClipped};
  expect_vec_near(off_policy_update(pol, pol, adv, 0.4, 0.01, v).delta_logits,
                  weighted_pg_update(pol, adv, 0.4, 0.01).delta_logits, 1e-15);
}

TEST(OffPolicyUpdate, FullyClippedIsZero) {
  const auto pol = from_p({0.5, 0.3, 0.2});
  const auto mu = from_p({0.6, 0.25, 0.15});
  const LossVariant v{LossKind::kOffPolicyClipped, 0.95, 0.0, 0.0};
  for (double d : off_policy_update(pol, mu, profile_from_vector({1.0, -1.0, -1.0}), 0.2, 0.01, v).delta_logits) {
    EXPECT_EQ(d, 0.0);
  }
}

TEST(OffPolicyUpdate, OutOfBandActionsCarryNoGradient) {
  // ratios 0.833, 1.5, 1.0: action 1 is clipped
  const Vec p{0.5, 0.3, 0.2}, m{0.6, 0.2, 0.2};
  const auto pol = from_p(p);
  const auto adv = exact_advantages(BinaryTask{3, {0}}, pol);
  const LossVariant v{LossKind::kOffPolicyClipped};
  const auto d = off_policy_update(pol, from_p(m), adv, 0.0, 0.01, v).delta_logits;
  const double beta[3] = {p[0] * adv.advantages[0], 0.0, p[2] * adv.advantages[2]};
  const double total = beta[0] + beta[2];
  for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(d[b], 0.01 * (beta[b] - p[b] * total), 1e-15);
  const Vec fd = fd_update([&](const Vec& t) { return oracle::clipped_loss(t, m, adv.advantages, 0.0, 0.2, 0.2); },
                           logits_of(pol), 0.01);
  EXPECT_LT(oracle::relative_error(d, fd), 1e-7);
}

TEST(OffPolicyUpdate, MatchesFiniteDifferences) {
  const Vec p{0.5, 0.3, 0.2}, m{0.55, 0.27, 0.18};
  for (std::size_t a = 0; a < 3; ++a) ASSERT_TRUE(inside_clip_band(p[a] / m[a], 0.2, 0.2));
  const auto pol = from_p(p);
  const auto adv = exact_advantages(BinaryTask{3, {0}}, pol);
  const LossVariant v{LossKind::kOffPolicyClipped};
  for (double alpha : {0.0, 0.4, -0.7}) {
    const auto d = off_policy_update(pol, from_p(m), adv, alpha, 0.01, v).delta_logits;
    const Vec fd = fd_update(
        [&](const Vec& t) { return oracle::clipped_loss(t, m, adv.advantages, alpha, 0.2, 0.2); }, logits_of(pol),
        0.01);
    EXPECT_LT(oracle::relative_error(d, fd), 1e-7);
    EXPECT_NEAR(clipped_ratio_loss(pol, from_p(m), adv, alpha, v),
                static_cast<double>(oracle::clipped_loss(logits_of(pol), m, adv.advantages, alpha, 0.2, 0.2)),
                1e-13);
  }
}

TEST(OffPolicyUpdate, PpoSurrogateAgreesInsideBand) {
  const Vec p{0.5, 0.3, 0.2}, m{0.55, 0.27, 0.18};
  const auto pol = from_p(p);
  const auto adv = exact_advantages(BinaryTask{3, {0}}, pol);
  const LossVariant v{LossKind::kOffPolicyClipped};
  EXPECT_NEAR(ppo_surrogate_loss(pol, from_p(m), adv, 0.3, v), clipped_ratio_loss(pol, from_p(m), adv, 0.3, v),
              1e-15);
}

TEST(OffPolicyUpdate, TinyBehaviorProbability) {
  const auto pol = from_p({0.5, 0.3, 0.2});
  const auto mu = SoftmaxPolicy({0.0, 0.0, -40.0});
  const auto adv = profile_from_vector({1.0, -1.0, -1.0});
  const LossVariant v{LossKind::kOffPolicyClipped};
  try {
    off_policy_update(pol, mu, adv, 0.0, 0.01, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kImportanceRatio);
  }
  const auto p = probs(pol), m = probs(mu);
  const auto beta = loss_coefficients(v, p, m, m, adv, 0.0, true);
  EXPECT_EQ(beta[2], 0.0);
}

TEST(HighprobUpdate, EmptyHighSetIsPlain) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  for (double alpha : {-0.8, 0.0, 0.6}) {
    expect_vec_near(highprob_update(pol, adv, alpha, 0.01, 0.99).delta_logits,
                    weighted_pg_update(pol, adv, 0.0, 0.01).delta_logits, 1e-15);
  }
}

TEST(HighprobUpdate, AlphaZeroIsPlain) {
  const auto pol = from_p({0.96, 0.03, 0.01});
  const auto adv = profile_from_vector({1.0, -24.0, -24.0});
  for (double tau : {0.5, 0.9, 0.95}) {
    expect_vec_near(highprob_update(pol, adv, 0.0, 0.01, tau).delta_logits,
                    weighted_pg_update(pol, adv, 0.0, 0.01).delta_logits, 1e-15);
  }
}

TEST(HighprobUpdate, MatchesFiniteDifferences) {
  const Vec p{0.96, 0.03, 0.01}, a{1.0, -24.0, -24.0};
  const auto pol = from_p(p);
  const auto d = highprob_update(pol, profile_from_vector(a), 0.3, 0.01, 0.95).delta_logits;
  const Vec fd = fd_update([&](const Vec& t) { return oracle::highprob_loss(t, p, a, 0.3, 0.95); },
                           logits_of(pol), 0.01);
  EXPECT_LT(oracle::relative_error(d, fd), 1e-7);
  EXPECT_NEAR(highprob_loss(pol, p, profile_from_vector(a), 0.3, 0.95),
              static_cast<double>(oracle::highprob_loss(logits_of(pol), p, a, 0.3, 0.95)), 1e-12);
}

TEST(StopgradTerm, EqualsCorrectionWhenOnPolicy) {
  const auto pol = from_p({0.96, 0.03, 0.01});
  const auto adv = profile_from_vector({1.0, -24.0, -24.0});
  expect_vec_near(unified_stopgrad_term(pol, pol, adv, 0.3, 0.95), highprob_correction_gradient(pol, adv, 0.3, 0.95),
                  1e-15);
}

TEST(StopgradTerm, AlphaZeroIsZero) {
  const auto pol = from_p({0.96, 0.03, 0.01});
  for (double g : unified_stopgrad_term(pol, from_p({0.9, 0.07, 0.03}), profile_from_vector({1.0, -24.0, -24.0}), 0.0, 0.95)) {
    EXPECT_EQ(g, 0.0);
  }
}

TEST(StopgradTerm, MatchesFiniteDifferences) {
  const Vec p{0.96, 0.03, 0.01}, mu{0.9, 0.07, 0.03}, a{1.0, -24.0, -24.0};
  const auto pol = from_p(p);
  const auto g = unified_stopgrad_term(pol, from_p(mu), profile_from_vector(a), 0.3, 0.95);
  const Vec fd = oracle::central_gradient([&](const Vec& t) { return oracle::stopgrad_loss(t, mu, a, 0.3, 0.95); },
                                          logits_of(pol));
  EXPECT_LT(oracle::relative_error(g, fd), 1e-7);
  EXPECT_NEAR(unified_stopgrad_loss(pol, mu, profile_from_vector(a), 0.3, 0.95),
              static_cast<double>(oracle::stopgrad_loss(logits_of(pol), mu, a, 0.3, 0.95)), 1e-13);
}

TEST(UpdateFromCoefficients, CentersOnSoftmax) {
  const Vec p{0.5, 0.3, 0.2}, beta{0.2, -0.1, 0.4};
  const auto d = update_from_coefficients(p, beta, 2.0).delta_logits;
  const double total = 0.5;
  for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(d[a], 2.0 * (beta[a] - p[a] * total), 1e-15);
}

TEST(UncenteredUpdate, IsElementwise) {
  const auto pol = from_p(kP);
  const auto adv = profile_from_vector(kAdv);
  const auto d = uncentered_pg_update(pol, adv, 0.5, 0.1).delta_logits;
  for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(d[a], 0.1 * kP[a] * class_weight(kAdv[a], 0.5) * kAdv[a], 1e-15);
}

TEST(LossKind, NamesRoundTrip) {
  for (LossKind k : {LossKind::kOnPolicyFull, LossKind::kOffPolicyClipped, LossKind::kOnPolicyHighprob,
                     LossKind::kOffPolicyHighprob, LossKind::kUnifiedStopgrad}) {
    EXPECT_EQ(loss_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(loss_kind_from_string("ppo"), Error);
  EXPECT_TRUE(is_off_policy(LossKind::kOffPolicyClipped));
  EXPECT_FALSE(is_off_policy(LossKind::kOnPolicyHighprob));
}

TEST(LossVariant, Validation) {
  EXPECT_THROW((LossVariant{LossKind::kOnPolicyFull, 1.0}).validate(), Error);
  EXPECT_THROW((LossVariant{LossKind::kOnPolicyFull, 0.9, 1.0, 0.2}).validate(), Error);
  EXPECT_THROW((LossVariant{LossKind::kOnPolicyFull, 0.9, 0.2, -0.1}).validate(), Error);
  EXPECT_NO_THROW(LossVariant{}.validate());
}
