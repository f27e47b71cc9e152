#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace entropic {

/// Tabular softmax policy for one state. The logits are the trainable
/// parameters, one per action.
class SoftmaxPolicy {
 public:
  /// Throws Error(kInvalidInput) for fewer than two actions or a non-finite
  /// logit.
  explicit SoftmaxPolicy(std::vector<double> logits);

  /// Builds the policy whose softmax equals `probabilities` (logits = log p).
  /// Every entry must be strictly positive; the vector is renormalized.
  static SoftmaxPolicy from_probabilities(std::span<const double> probabilities);

  static SoftmaxPolicy uniform(std::size_t num_actions);

  std::span<const double> logits() const noexcept { return logits_; }
  std::size_t num_actions() const noexcept { return logits_.size(); }

  bool operator==(const SoftmaxPolicy&) const = default;

 private:
  std::vector<double> logits_;
};

/// Max-subtracted softmax of the logits.
std::vector<double> probs(const SoftmaxPolicy& policy);

/// Softmax of logits / temperature. Sampling-time only; entropy bookkeeping
/// always uses the untempered policy.
std::vector<double> tempered_probs(const SoftmaxPolicy& policy, double temperature);

/// Shannon entropy in nats.
double entropy(const SoftmaxPolicy& policy);
double entropy_of(std::span<const double> probabilities);

/// dH/dθ_a = −π(a)(ln π(a) + H).
std::vector<double> entropy_gradient(const SoftmaxPolicy& policy);

/// θ + delta, validated like any other policy.
SoftmaxPolicy shifted(const SoftmaxPolicy& policy, std::span<const double> delta);

/// One policy per state with a probability vector over states.
class PolicyEnsemble {
 public:
  PolicyEnsemble(std::vector<SoftmaxPolicy> policies, std::vector<double> state_weights);

  /// Uniform state weights.
  explicit PolicyEnsemble(std::vector<SoftmaxPolicy> policies);

  std::size_t num_states() const noexcept { return policies_.size(); }
  const std::vector<SoftmaxPolicy>& policies() const noexcept { return policies_; }
  std::vector<SoftmaxPolicy>& policies() noexcept { return policies_; }
  std::span<const double> state_weights() const noexcept { return weights_; }

  /// Weighted mean of per-state entropies.
  double entropy() const;

  /// Weighted mean of an arbitrary per-state quantity.
  double weighted_mean(std::span<const double> per_state) const;

  bool operator==(const PolicyEnsemble&) const = default;

 private:
  std::vector<SoftmaxPolicy> policies_;
  std::vector<double> weights_;
};

}  // namespace entropic
