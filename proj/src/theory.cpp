#include "entropic/theory.hpp"

#include <cmath>
#include <sstream>

#include "entropic/error.hpp"

namespace entropic {

namespace {

void require_size(std::size_t n, const AdvantageProfile& adv) {
  if (adv.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "advantage profile size does not match num_actions");
  }
}

std::vector<double> log_probs(std::span<const double> p) {
  std::vector<double> out(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) out[a] = std::log(p[a]);
  return out;
}

// Cov_π(x, y) = E_π[xy] − E_π[x]E_π[y].
double covariance(std::span<const double> p, std::span<const double> x, std::span<const double> y) {
  double ex = 0.0, ey = 0.0, exy = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    ex += p[a] * x[a];
    ey += p[a] * y[a];
    exy += p[a] * x[a] * y[a];
  }
  return exy - ex * ey;
}

}  // namespace

double covariance_entropy_change(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                 double eta) {
  const auto p = probs(policy);
  require_size(p.size(), adv);
  const auto L = log_probs(p);
  std::vector<double> pa(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) pa[a] = p[a] * adv.advantages[a];
  return -eta * covariance(p, L, pa);
}

namespace {

STerms pair_sums(const SoftmaxPolicy& policy, const AdvantageProfile& adv, double tau) {
  const auto p = probs(policy);
  require_size(p.size(), adv);
  const auto L = log_probs(p);
  STerms s;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (!(p[a] > tau)) continue;
    for (std::size_t b = 0; b < p.size(); ++b) {
      if (!(p[b] > tau) || adv.is_positive[a] != adv.is_positive[b]) continue;
      const double term = p[a] * p[a] * p[b] * (L[a] - L[b]);
      (adv.is_positive[a] ? s.s_pos : s.s_neg) += term;
    }
  }
  return s;
}

}  // namespace

STerms compute_s_terms(const SoftmaxPolicy& policy, const AdvantageProfile& adv) {
  return pair_sums(policy, adv, -1.0);
}

STerms compute_s_terms_highprob(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "compute_s_terms_highprob: tau must lie in (0, 1)");
  }
  return pair_sums(policy, adv, tau);
}

double predicted_entropy_change(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                double alpha, double eta) {
  const auto p = probs(policy);
  require_size(p.size(), adv);
  const auto L = log_probs(p);
  std::vector<double> weighted(p.size());
  std::vector<double> pcA(p.size());
  double mean_cA = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    weighted[a] = class_weight(adv.advantages[a], alpha) * adv.advantages[a];
    pcA[a] = p[a] * weighted[a];
    mean_cA += p[a] * weighted[a];
  }
  return -eta * (covariance(p, L, pcA) - mean_cA * covariance(p, L, p));
}

double same_sign_pair_entropy_change(const SoftmaxPolicy& policy, const AdvantageProfile& adv,
                                     double alpha, double eta) {
  const STerms s = compute_s_terms(policy, adv);
  return -eta * (1.0 + alpha) * adv.a_pos * s.s_pos - eta * (1.0 - alpha) * adv.a_neg * s.s_neg;
}

double first_order_entropy_change(const SoftmaxPolicy& policy, std::span<const double> delta) {
  const auto grad = entropy_gradient(policy);
  if (delta.size() != grad.size()) {
    throw Error(ErrorCode::kInvalidInput, "first_order_entropy_change: size mismatch");
  }
  double dot = 0.0;
  for (std::size_t a = 0; a < grad.size(); ++a) dot += grad[a] * delta[a];
  return dot;
}

OffPolicyBias offpolicy_bias(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                             const AdvantageProfile& adv, const LossVariant& variant) {
  const auto p = probs(policy);
  const auto mu = probs(behavior);
  require_size(p.size(), adv);
  if (mu.size() != p.size()) {
    throw Error(ErrorCode::kInvalidInput, "offpolicy_bias: behavior size mismatch");
  }
  OffPolicyBias out;
  double sum_p2 = 0.0, sum_p2L = 0.0, sum_pL = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (!(mu[a] > 1e-12)) {
      throw Error(ErrorCode::kImportanceRatio, "offpolicy_bias: behavior probability below 1e-12");
    }
    const double rho = p[a] / mu[a];
    if (inside_clip_band(rho, variant.eps_low, variant.eps_high)) {
      out.delta += mu[a] * rho * adv.advantages[a];
    }
    const double L = std::log(p[a]);
    sum_p2 += p[a] * p[a];
    sum_p2L += p[a] * p[a] * L;
    sum_pL += p[a] * L;
  }
  out.c_factor = sum_p2L - sum_pL * sum_p2;
  return out;
}

double loop_gain(const STerms& s, double a_pos, double h, double eta) {
  return eta * a_pos * (s.s_pos + h * s.s_neg);
}

EntropyDynamics entropy_dynamics(const SoftmaxPolicy& policy, const SoftmaxPolicy& behavior,
                                 const AdvantageProfile& adv, double alpha, double eta,
                                 const LossVariant& variant) {
  EntropyDynamics dyn;
  const STerms s = compute_s_terms(policy, adv);
  dyn.s_pos = s.s_pos;
  dyn.s_neg = s.s_neg;
  dyn.c0 = loop_gain(s, adv.a_pos, adv.h, eta);
  const OffPolicyBias bias = offpolicy_bias(policy, behavior, adv, variant);
  dyn.delta_bias = bias.delta;
  dyn.c_factor = bias.c_factor;
  const auto step = loss_update(variant, policy, behavior, adv, alpha, eta);
  dyn.predicted_dH = first_order_entropy_change(policy, step.delta_logits);
  return dyn;
}

double steady_state_error(const EntropyDynamics& dyn, double k_p, double h, double a_pos) {
  if (!(k_p > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "steady_state_error: k_p must be > 0");
  }
  const double denom = a_pos * k_p * (dyn.s_pos + h * dyn.s_neg);
  if (!(std::abs(denom) >= 1e-14)) {
    std::ostringstream msg;
    msg << "steady_state_error: denominator " << denom << " below 1e-14";
    throw Error(ErrorCode::kDegenerateDynamics, msg.str());
  }
  return dyn.delta_bias * dyn.c_factor / denom;
}

StabilityReport stability_report(double c0, double k_p, double k_i, bool c0_is_trajectory_max) {
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw Error(ErrorCode::kInvalidParameter, "stability_report: c0 must be > 0");
  }
  StabilityReport r;
  r.c0 = c0;
  r.c0_is_trajectory_max = c0_is_trajectory_max;
  const double a = 1.0 - c0 * k_p;
  const double b = c0 * k_i;
  r.recurrence_matrix = {{{a, -b}, {a, 1.0 - b}}};
  r.lyapunov_b = b;
  // λ² − (2 − c0(k_p + k_i))λ + (1 − c0 k_p) = 0
  const double trace = 2.0 - c0 * (k_p + k_i);
  const double det = 1.0 - c0 * k_p;
  const std::complex<double> root = std::sqrt(std::complex<double>(trace * trace - 4.0 * det, 0.0));
  r.eigenvalues = {(trace + root) / 2.0, (trace - root) / 2.0};
  r.eigenvalue_moduli = {std::abs(r.eigenvalues[0]), std::abs(r.eigenvalues[1])};
  r.condition_p = (1.0 - c0 * k_p) * (1.0 - c0 * k_p) < 1.0 - c0 * k_i;
  r.condition_i = c0 * k_i < 1.0;
  r.stable = r.condition_p && r.condition_i;
  return r;
}

std::pair<double, double> recurrence_step(const StabilityReport& report, double e, double integral) {
  const auto& m = report.recurrence_matrix;
  return {m[0][0] * e + m[0][1] * integral, m[1][0] * e + m[1][1] * integral};
}

double lyapunov_value(double e, double integral, double b) {
  if (!(b > 0.0 && b < 1.0)) {
    std::ostringstream msg;
    msg << "lyapunov_value: b = " << b << " outside (0, 1)";
    throw Error(ErrorCode::kInvalidParameter, msg.str());
  }
  return e * e + b / (1.0 - b) * integral * integral;
}

}  // namespace entropic
