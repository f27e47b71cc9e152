#include "entropic/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entropic/error.hpp"

namespace entropic {

namespace {

void require_alpha(double alpha) {
  if (!(std::abs(alpha) <= 1.0)) {
    std::ostringstream msg;
    msg << "alpha " << alpha << " outside [-1, 1]";
    throw Error(ErrorCode::kControllerRange, msg.str());
  }
}

void require_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidParameter, "step size eta must be > 0");
  }
}

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "tau must lie in (0, 1)");
  }
}

void require_size(std::size_t n, const AdvantageProfile& adv) {
  if (adv.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "advantage profile size does not match num_actions");
  }
}

void require_behavior(std::span<const double> mu) {
  for (std::size_t a = 0; a < mu.size(); ++a) {
    if (!(mu[a] > 1e-12)) {
      std::ostringstream msg;
      msg << "behavior probability " << mu[a] << " at action " << a << " below 1e-12";
      throw Error(ErrorCode::kImportanceRatio, msg.str());
    }
  }
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kOnPolicyFull: return "on_policy_full";
    case LossKind::kOffPolicyClipped: return "off_policy_clipped";
    case LossKind::kOnPolicyHighprob: return "on_policy_highprob";
    case LossKind::kOffPolicyHighprob: return "off_policy_highprob";
    case LossKind::kUnifiedStopgrad: return "unified_stopgrad";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  for (LossKind k : {LossKind::kOnPolicyFull, LossKind::kOffPolicyClipped,
                     LossKind::kOnPolicyHighprob, LossKind::kOffPolicyHighprob,
                     LossKind::kUnifiedStopgrad}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kConfig,
              "unknown loss kind '" + std::string(name) +
                  "' (expected on_policy_full, off_policy_clipped, on_policy_highprob, "
                  "off_policy_highprob, unified_stopgrad)");
}

bool is_off_policy(LossKind kind) {
  return kind == LossKind::kOffPolicyClipped || kind == LossKind::kOffPolicyHighprob ||
         kind == LossKind::kUnifiedStopgrad;
}

void LossVariant::validate() const {
  require_tau(tau);
  if (!(eps_low >= 0.0) || !(eps_high >= 0.0) || !(1.0 - eps_low > 0.0) ||
      !std::isfinite(eps_high)) {
    throw Error(ErrorCode::kInvalidParameter,
                "clip bounds need eps_low in [0, 1) and finite eps_high >= 0");
  }
}

double class_weight(double advantage, double alpha) {
  if (advantage > 0.0) return 1.0 + alpha;
  if (advantage < 0.0) return 1.0 - alpha;
  return 1.0;
}

bool inside_clip_band(double ratio, double eps_low, double eps_high) {
  return ratio > 1.0 - eps_low && ratio < 1.0 + eps_high;
}

UpdateDirection update_from_coefficients(std::span<const double> probabilities,
                                         std::span<const double> beta, double eta) {
  double total = 0.0;
  for (double b : beta) total += b;
  UpdateDirection out;
  out.step_size = eta;
  out.delta_logits.resize(beta.size());
  for (std::size_t a = 0; a < beta.size(); ++a) {
    out.delta_logits[a] = eta * (beta[a] - probabilities[a] * total);
  }
  return out;
}

std::vector<double> loss_coefficients(const LossVariant& variant,
                                      std::span<const double> probabilities,
                                      std::span<const double> behavior,
                                      std::span<const double> weights,
                                      const AdvantageProfile& adv, double alpha,
                                      bool clip_tiny_behavior) {
  const std::size_t n = probabilities.size();
  require_size(n, adv);
  if (weights.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "loss_coefficients: weights size mismatch");
  }
  const bool off = is_off_policy(variant.kind);
  if (off) {
    if (behavior.size() != n) {
      throw Error(ErrorCode::kInvalidInput, "loss_coefficients: behavior size mismatch");
    }
    if (!clip_tiny_behavior) require_behavior(behavior);
  }
  std::vector<double> beta(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (off && !(behavior[a] > 1e-12)) continue;
    const double A = adv.advantages[a];
    const double high = probabilities[a] > variant.tau ? 1.0 : 0.0;
    const double rho = off ? probabilities[a] / behavior[a] : 1.0;
    const double inside = off ? (inside_clip_band(rho, variant.eps_low, variant.eps_high) ? 1.0 : 0.0)
                              : 1.0;
    switch (variant.kind) {
      case LossKind::kOnPolicyFull:
        beta[a] = weights[a] * class_weight(A, alpha) * A;
        break;
      case LossKind::kOffPolicyClipped:
        beta[a] = weights[a] * inside * rho * class_weight(A, alpha) * A;
        break;
      case LossKind::kOnPolicyHighprob:
        beta[a] = weights[a] * (A + alpha * high * std::abs(A));
        break;
      case LossKind::kOffPolicyHighprob:
      case LossKind::kUnifiedStopgrad:
        beta[a] = weights[a] * rho * (inside * A + alpha * high * std::abs(A));
        break;
    }
  }
  return beta;
}

UpdateDirection loss_update(const LossVariant& variant, const SoftmaxPolicy& policy,
                            const SoftmaxPolicy& behavior, const AdvantageProfile& adv,
                            double alpha, double eta) {
  variant.validate();
  require_alpha(alpha);
  require_eta(eta);
  const auto pi = probs(policy);
  if (!is_off_policy(variant.kind)) {
    return update_from_coefficients(pi, loss_coefficients(variant, pi, pi, pi, adv, alpha), eta);
  }
  if (behavior.num_actions() != policy.num_actions()) {
    throw Error(ErrorCode::kInvalidInput, "behavior/policy action count mismatch");
  }
  const auto mu = probs(behavior);
  return update_from_coefficients(pi, loss_coefficients(variant, pi, mu, mu, adv, alpha), eta);
}

UpdateDirection weighted_pg_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                   double alpha, double eta) {
  return loss_update(LossVariant{}, policy, policy, adv, alpha, eta);
}

UpdateDirection off_policy_update(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                                  const AdvantageProfile& adv, double alpha, double eta,
                                  const LossVariant& variant) {
  LossVariant v = variant;
  v.kind = LossKind::kOffPolicyClipped;
  return loss_update(v, policy, behavior, adv, alpha, eta);
}

UpdateDirection highprob_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                double alpha, double eta, double tau) {
  LossVariant v;
  v.kind = LossKind::kOnPolicyHighprob;
  v.tau = tau;
  return loss_update(v, policy, policy, adv, alpha, eta);
}

UpdateDirection off_policy_highprob_update(const SoftmaxPolicy& policy,
                                           const SoftmaxPolicy& behavior,
                                           const AdvantageProfile& adv, double alpha,
                                           double eta, const LossVariant& variant) {
  LossVariant v = variant;
  v.kind = LossKind::kOffPolicyHighprob;
  return loss_update(v, policy, behavior, adv, alpha, eta);
}

std::vector<double> highprob_correction_gradient(const SoftmaxPolicy& policy,
                                                 const AdvantageProfile& adv, double alpha,
                                                 double tau) {
  require_tau(tau);
  const auto pi = probs(policy);
  require_size(pi.size(), adv);
  std::vector<double> coeff(pi.size(), 0.0);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] > tau) coeff[a] = alpha * pi[a] * std::abs(adv.advantages[a]);
  }
  // Gradient of −Σ coeff log π is −(coeff − π Σ coeff).
  auto step = update_from_coefficients(pi, coeff, 1.0);
  for (double& g : step.delta_logits) g = -g;
  return step.delta_logits;
}

std::vector<double> unified_stopgrad_term(const SoftmaxPolicy& policy,
                                          const SoftmaxPolicy& sampling_policy,
                                          const AdvantageProfile& adv, double alpha, double tau) {
  require_tau(tau);
  if (sampling_policy.num_actions() != policy.num_actions()) {
    throw Error(ErrorCode::kInvalidInput, "sampling/policy action count mismatch");
  }
  const auto pi = probs(policy);
  const auto ps = probs(sampling_policy);
  require_behavior(ps);
  require_size(pi.size(), adv);
  std::vector<double> coeff(pi.size(), 0.0);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] > tau) coeff[a] = alpha * ps[a] * std::abs(adv.advantages[a]) * (pi[a] / ps[a]);
  }
  auto step = update_from_coefficients(pi, coeff, 1.0);
  for (double& g : step.delta_logits) g = -g;
  return step.delta_logits;
}

UpdateDirection masked_pg_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                 const std::vector<bool>& keep, double alpha, double eta) {
  require_alpha(alpha);
  require_eta(eta);
  const auto pi = probs(policy);
  require_size(pi.size(), adv);
  if (keep.size() != pi.size()) {
    throw Error(ErrorCode::kInvalidInput, "masked_pg_update: mask size mismatch");
  }
  std::vector<double> beta(pi.size(), 0.0);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (keep[a]) beta[a] = pi[a] * class_weight(adv.advantages[a], alpha) * adv.advantages[a];
  }
  return update_from_coefficients(pi, beta, eta);
}

UpdateDirection uncentered_pg_update(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                     double alpha, double eta) {
  require_alpha(alpha);
  require_eta(eta);
  const auto pi = probs(policy);
  require_size(pi.size(), adv);
  UpdateDirection out;
  out.step_size = eta;
  out.delta_logits.resize(pi.size());
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double A = adv.advantages[a];
    out.delta_logits[a] = eta * pi[a] * class_weight(A, alpha) * A;
  }
  return out;
}

double weighted_pg_loss(const SoftmaxPolicy& policy, std::span<const double> frozen_weights,
                        const AdvantageProfile& adv, double alpha) {
  const auto pi = probs(policy);
  require_size(pi.size(), adv);
  double loss = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double A = adv.advantages[a];
    loss -= frozen_weights[a] * class_weight(A, alpha) * A * std::log(pi[a]);
  }
  return loss;
}

double clipped_ratio_loss(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                          const AdvantageProfile& adv, double alpha, const LossVariant& variant) {
  const auto pi = probs(policy);
  const auto mu = probs(behavior);
  require_size(pi.size(), adv);
  require_behavior(mu);
  double loss = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double A = adv.advantages[a];
    const double rho = std::clamp(pi[a] / mu[a], 1.0 - variant.eps_low, 1.0 + variant.eps_high);
    loss -= mu[a] * class_weight(A, alpha) * A * rho;
  }
  return loss;
}

double ppo_surrogate_loss(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                          const AdvantageProfile& adv, double alpha, const LossVariant& variant) {
  const auto pi = probs(policy);
  const auto mu = probs(behavior);
  require_size(pi.size(), adv);
  require_behavior(mu);
  double loss = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double A = adv.advantages[a];
    const double rho = pi[a] / mu[a];
    const double clipped = std::clamp(rho, 1.0 - variant.eps_low, 1.0 + variant.eps_high);
    loss -= mu[a] * class_weight(A, alpha) * std::min(rho * A, clipped * A);
  }
  return loss;
}

double highprob_loss(const SoftmaxPolicy& policy, std::span<const double> frozen_weights,
                     const AdvantageProfile& adv, double alpha, double tau) {
  const auto pi = probs(policy);
  require_size(pi.size(), adv);
  double loss = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double A = adv.advantages[a];
    const double logp = std::log(pi[a]);
    loss -= frozen_weights[a] * A * logp;
    if (pi[a] > tau) loss -= alpha * frozen_weights[a] * std::abs(A) * logp;
  }
  return loss;
}

double unified_stopgrad_loss(const SoftmaxPolicy& policy,
                             std::span<const double> frozen_sampling,
                             const AdvantageProfile& adv, double alpha, double tau) {
  const auto pi = probs(policy);
  require_size(pi.size(), adv);
  require_behavior(frozen_sampling);
  double loss = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] > tau) {
      loss -= alpha * frozen_sampling[a] * std::abs(adv.advantages[a]) * pi[a] / frozen_sampling[a];
    }
  }
  return loss;
}

}  // namespace entropic
