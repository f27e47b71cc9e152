#pragma once

#include <array>
#include <complex>
#include <utility>

#include "entropic/advantages.hpp"
#include "entropic/losses.hpp"
#include "entropic/policy.hpp"

namespace entropic {

struct EntropyDynamics {
  double s_pos = 0.0;
  double s_neg = 0.0;
  double c0 = 0.0;
  double delta_bias = 0.0;
  double c_factor = 0.0;
  double predicted_dH = 0.0;
};

struct StabilityReport {
  std::array<std::array<double, 2>, 2> recurrence_matrix{};
  std::array<std::complex<double>, 2> eigenvalues{};
  std::array<double, 2> eigenvalue_moduli{};
  bool condition_p = false;
  bool condition_i = false;
  double lyapunov_b = 0.0;
  bool stable = false;
  double c0 = 0.0;
  /// True when c0 is a maximum over a trajectory rather than a single step.
  bool c0_is_trajectory_max = false;
};

/// −η Cov_π(log π, π·A), exact over the action set.
double covariance_entropy_change(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                 double eta);

struct STerms {
  double s_pos = 0.0;
  double s_neg = 0.0;
};

/// S = Σ_{a,a' same class} π(a)² π(a') (log π(a) − log π(a')).
STerms compute_s_terms(const SoftmaxPolicy& policy, const AdvantageProfile& adv);

/// S terms restricted to pairs with both probabilities above tau. For
/// tau ≥ 1/2 at most one action qualifies and both sums are zero.
STerms compute_s_terms_highprob(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                double tau);

/// Exact first-order entropy change ⟨∇H, Δθ⟩ of the weighted update:
/// −η[Cov_π(log π, π·cA) − E_π[cA]·Cov_π(log π, π)].
double predicted_entropy_change(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                double alpha, double eta);

/// Same-sign pair form −η(1+α)A_pos S_pos − η(1−α)A_neg S_neg. Drops the
/// cross-class pair terms, so it differs from predicted_entropy_change in
/// general.
double same_sign_pair_entropy_change(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                     double alpha, double eta);

/// ⟨entropy_gradient(policy), delta⟩.
double first_order_entropy_change(const SoftmaxPolicy& policy, std::span<const double> delta);

struct OffPolicyBias {
  double delta = 0.0;
  double c_factor = 0.0;
};

/// δ = E_μ[𝟙_clip ρ A] = Σ_a 𝟙_clip(a) π(a) A(a),
/// C = Σ π² log π − (Σ π log π)(Σ π²).
OffPolicyBias offpolicy_bias(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                             const AdvantageProfile& adv, const LossVariant& variant);

/// η A_pos (S_pos + h S_neg).
double loop_gain(const STerms& s, double a_pos, double h, double eta);

/// Bundles the quantities above for one state.
EntropyDynamics entropy_dynamics(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                                 const AdvantageProfile& adv, double alpha, double eta,
                                 const LossVariant& variant);

/// δ C / (A_pos K_p (S_pos + h S_neg)). Throws Error(kDegenerateDynamics) if the
/// denominator is below 1e-14 and Error(kInvalidParameter) for k_p ≤ 0.
double steady_state_error(const EntropyDynamics& dyn, double k_p, double h, double a_pos);

/// Recurrence (e, I) → (a e − b I, a e + (1−b) I) with a = 1 − c0 k_p,
/// b = c0 k_i. Throws Error(kInvalidParameter) for c0 ≤ 0.
StabilityReport stability_report(double c0, double k_p, double k_i,
                                 bool c0_is_trajectory_max = false);

/// One step of the linear error recurrence described by `report`.
std::pair<double, double> recurrence_step(const StabilityReport& report, double e, double integral);

/// e² + b/(1−b) I². Throws Error(kInvalidParameter) unless 0 < b < 1.
double lyapunov_value(double e, double integral, double b);

}  // namespace entropic
