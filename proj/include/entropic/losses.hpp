#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "entropic/advantages.hpp"
#include "entropic/policy.hpp"

namespace entropic {

enum class LossKind {
  kOnPolicyFull,
  kOffPolicyClipped,
  kOnPolicyHighprob,
  kOffPolicyHighprob,
  kUnifiedStopgrad,
};

std::string_view to_string(LossKind kind);
/// Throws Error(kConfig) for an unknown name.
LossKind loss_kind_from_string(std::string_view name);

/// True for kinds that train against a stale behavior policy.
bool is_off_policy(LossKind kind);

struct LossVariant {
  LossKind kind = LossKind::kOnPolicyFull;
  double tau = 0.95;
  double eps_low = 0.2;
  double eps_high = 0.2;

  /// Throws Error(kInvalidParameter) unless tau ∈ (0,1), eps ≥ 0 and
  /// 1 − eps_low > 0.
  void validate() const;
};

struct UpdateDirection {
  std::vector<double> delta_logits;
  double step_size = 0.0;
};

/// c(A) = 1+α for A > 0, 1−α for A < 0, 1 for A = 0.
double class_weight(double advantage, double alpha);

/// Strict clip band 1−eps_low < ρ < 1+eps_high.
bool inside_clip_band(double ratio, double eps_low, double eps_high);

/// Δθ_b = η(β_b − π_b Σ_a β_a): the update obtained from a loss
/// −Σ_a β_a log π_a with the coefficients β held fixed.
UpdateDirection update_from_coefficients(std::span<const double> probabilities,
                                         std::span<const double> beta, double eta);

/// Coefficients β for one loss kind.
///   weights   sampling weights of the data: the behavior probabilities in
///             exact mode, empirical action frequencies in sampled mode.
///   behavior  the distribution the data came from; ρ = π/μ.
/// On-policy kinds ignore `behavior` and use no ratio. A behavior
/// probability ≤ 1e-12 throws Error(kImportanceRatio) unless
/// `clip_tiny_behavior` is set, in which case that action carries no gradient.
std::vector<double> loss_coefficients(const LossVariant& variant,
                                      std::span<const double> probabilities,
                                      std::span<const double> behavior,
                                      std::span<const double> weights,
                                      const AdvantageProfile& adv, double alpha,
                                      bool clip_tiny_behavior = false);

/// Exact-expectation update for any kind. For on-policy kinds `behavior` is
/// ignored.
UpdateDirection loss_update(const LossVariant& variant, const SoftmaxPolicy& policy,
                            const SoftmaxPolicy& behavior, const AdvantageProfile& adv,
                            double alpha, double eta);

/// Δθ_a = η π(a)(c(A_a)A_a − Σ_a' π(a')c(A_a')A_a').
UpdateDirection weighted_pg_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                   double alpha, double eta);

/// Clipped importance-sampled update; only actions strictly inside the clip
/// band carry gradient.
UpdateDirection off_policy_update(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                                  const AdvantageProfile& adv, double alpha, double eta,
                                  const LossVariant& variant);

/// Plain update plus the α|A| correction on actions with π > τ.
UpdateDirection highprob_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                double alpha, double eta, double tau);

/// Clipped off-policy update (α = 0) plus the unclipped importance-weighted
/// high-probability correction.
UpdateDirection off_policy_highprob_update(const SoftmaxPolicy& policy,
                                           const SoftmaxPolicy& behavior,
                                           const AdvantageProfile& adv, double alpha,
                                           double eta, const LossVariant& variant);

/// Gradient (not update) of −α Σ_{π>τ} π̄(a)|A_a| log π_θ(a), the on-policy
/// correction term, with π̄ = π frozen.
std::vector<double> highprob_correction_gradient(const SoftmaxPolicy& policy,
                                                 const AdvantageProfile& adv, double alpha,
                                                 double tau);

/// Gradient of −α Σ_{π>τ} π_s(a)|A_a| π_θ(a)/sg(π_s(a)), the expectation over
/// data drawn from the sampling policy π_s of the stop-gradient correction.
/// Throws Error(kImportanceRatio) if a sampling probability is ≤ 1e-12.
std::vector<double> unified_stopgrad_term(const SoftmaxPolicy& policy,
                                          const SoftmaxPolicy& sampling_policy,
                                          const AdvantageProfile& adv, double alpha, double tau);

/// Plain update restricted to actions with keep[a] set.
UpdateDirection masked_pg_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                 const std::vector<bool>& keep, double alpha, double eta);

/// Δθ_a = η π(a) c(A_a) A_a without the softmax baseline term.
UpdateDirection uncentered_pg_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                     double alpha, double eta);

// Loss values. Arguments named `frozen_*` are held constant under
// differentiation with respect to the policy logits.

/// −Σ_a π̄(a) c(A_a) A_a log π_θ(a).
double weighted_pg_loss(const SoftmaxPolicy& policy, std::span<const double> frozen_weights,
                        const AdvantageProfile& adv, double alpha);

/// −Σ_a μ(a) c(A_a) A_a clip(ρ_a, 1−eps_low, 1+eps_high).
double clipped_ratio_loss(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                          const AdvantageProfile& adv, double alpha, const LossVariant& variant);

/// −Σ_a μ(a) c(A_a) min(ρ_a A_a, clip(ρ_a) A_a), the PPO surrogate.
double ppo_surrogate_loss(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                          const AdvantageProfile& adv, double alpha, const LossVariant& variant);

/// −Σ_a π̄(a) A_a log π_θ(a) − α Σ_{π_θ>τ} π̄(a)|A_a| log π_θ(a).
double highprob_loss(const SoftmaxPolicy& policy, std::span<const double> frozen_weights,
                     const AdvantageProfile& adv, double alpha, double tau);

/// −α Σ_{π_θ>τ} π_s(a)|A_a| π_θ(a)/π_s(a) with π_s frozen.
double unified_stopgrad_loss(const SoftmaxPolicy& policy,
                             std::span<const double> frozen_sampling,
                             const AdvantageProfile& adv, double alpha, double tau);

}  // namespace entropic
