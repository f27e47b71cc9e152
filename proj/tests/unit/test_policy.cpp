#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "entropic/error.hpp"
#include "entropic/policy.hpp"
#include "oracles.hpp"

using namespace entropic;

TEST(Softmax, ZeroLogitsAreUniform) {
  for (double p : probs(SoftmaxPolicy({0.0, 0.0, 0.0}))) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ConstantLogitsAreUniform) {
  for (double c : {-700.0, -3.5, 0.0, 12.0, 700.0}) {
    for (double p : probs(SoftmaxPolicy({c, c, c, c}))) EXPECT_NEAR(p, 0.25, 1e-15);
  }
}

TEST(Softmax, MatchesExtendedPrecision) {
  const std::vector<double> x{1.0, 0.0, -1.0};
  const auto ref = oracle::softmax(x);
  const auto p = probs(SoftmaxPolicy(x));
  for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(p[a], static_cast<double>(ref[a]), 1e-12);
}

TEST(Softmax, ShiftInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5);
    for (double& v : x) v = u(rng);
    const double c = 100.0 * u(rng);
    std::vector<double> y = x;
    for (double& v : y) v += c;
    const auto p = probs(SoftmaxPolicy(x));
    const auto q = probs(SoftmaxPolicy(y));
    for (std::size_t a = 0; a < 5; ++a) EXPECT_NEAR(p[a], q[a], 1e-12);
  }
}

TEST(Softmax, ExtremeLogitsStayFinite) {
  const auto p = probs(SoftmaxPolicy({1000.0, -1000.0, 0.0}));
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_GE(p[1], 0.0);
}

TEST(Softmax, RejectsBadInput) {
  EXPECT_THROW(SoftmaxPolicy({1.0}), Error);
  EXPECT_THROW(SoftmaxPolicy({0.0, NAN}), Error);
  EXPECT_THROW(SoftmaxPolicy({0.0, INFINITY}), Error);
  try {
    SoftmaxPolicy({});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(Softmax, FromProbabilitiesRoundTrip) {
  const std::vector<double> p{0.7, 0.2, 0.1};
  const auto q = probs(SoftmaxPolicy::from_probabilities(p));
  for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(q[a], p[a], 1e-15);
}

TEST(Softmax, TemperatureSharpens) {
  const SoftmaxPolicy pol({1.0, 0.0, -1.0});
  const auto cold = tempered_probs(pol, 0.6);
  const auto ref = oracle::softmax({1.0 / 0.6, 0.0, -1.0 / 0.6});
  for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(cold[a], static_cast<double>(ref[a]), 1e-12);
  EXPECT_THROW(tempered_probs(pol, 0.0), Error);
}

TEST(Entropy, UniformIsLogN) {
  EXPECT_NEAR(entropy(SoftmaxPolicy::uniform(3)), std::log(3.0), 1e-15);
  EXPECT_NEAR(entropy(SoftmaxPolicy::uniform(3)), 1.098612, 1e-6);
}

TEST(Entropy, NearDeterministic) { EXPECT_LT(entropy(SoftmaxPolicy({50.0, 0.0, 0.0})), 1e-10); }

TEST(Entropy, MatchesExtendedPrecision) {
  const std::vector<double> p{0.7, 0.2, 0.1};
  const double ref = static_cast<double>(oracle::entropy(oracle::to_real(p)));
  EXPECT_NEAR(entropy(SoftmaxPolicy::from_probabilities(p)), ref, 1e-14);
  EXPECT_NEAR(entropy_of(p), ref, 1e-15);
}

TEST(Entropy, Bounds) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(7);
    for (double& v : x) v = n(rng);
    const double h = entropy(SoftmaxPolicy(x));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(7.0) + 1e-12);
  }
}

TEST(EntropyGradient, ZeroAtUniform) {
  for (double g : entropy_gradient(SoftmaxPolicy::uniform(6))) EXPECT_NEAR(g, 0.0, 1e-15);
}

TEST(EntropyGradient, ComponentsSumToZero) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(6);
    for (double& v : x) v = u(rng);
    const auto g = entropy_gradient(SoftmaxPolicy(x));
    double s = 0.0;
    for (double v : g) s += v;
    EXPECT_NEAR(s, 0.0, 1e-14);
  }
}

TEST(EntropyGradient, MatchesFiniteDifferences) {
  const SoftmaxPolicy pol = SoftmaxPolicy::from_probabilities(std::vector<double>{0.7, 0.2, 0.1});
  const std::vector<double> x(pol.logits().begin(), pol.logits().end());
  const auto fd = oracle::central_gradient([](const std::vector<double>& t) { return oracle::entropy_of_logits(t); }, x);
  const auto g = entropy_gradient(pol);
  EXPECT_LT(oracle::relative_error(g, fd), 1e-8);
}

TEST(Ensemble, WeightedMeanAndValidation) {
  const PolicyEnsemble ens({SoftmaxPolicy::uniform(4), SoftmaxPolicy({50.0, 0.0, 0.0, 0.0})}, {0.25, 0.75});
  EXPECT_NEAR(ens.entropy(), 0.25 * std::log(4.0) + 0.75 * entropy(ens.policies()[1]), 1e-15);
  EXPECT_THROW(PolicyEnsemble({SoftmaxPolicy::uniform(2)}, {0.5}), Error);
  EXPECT_THROW(PolicyEnsemble({SoftmaxPolicy::uniform(2), SoftmaxPolicy::uniform(2)}, {1.5, -0.5}), Error);
  const PolicyEnsemble uni({SoftmaxPolicy::uniform(2), SoftmaxPolicy::uniform(3)});
  EXPECT_NEAR(uni.state_weights()[0], 0.5, 0.0);
}

TEST(Policy, ShiftedValidates) {
  const auto p = shifted(SoftmaxPolicy::uniform(3), std::vector<double>{1.0, 0.0, 0.0});
  EXPECT_EQ(p.logits()[0], 1.0);
  EXPECT_THROW(shifted(SoftmaxPolicy::uniform(3), std::vector<double>{1.0, 0.0}), Error);
  EXPECT_THROW(shifted(SoftmaxPolicy::uniform(3), std::vector<double>{NAN, 0.0, 0.0}), Error);
}
