#include "entropic/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "entropic/error.hpp"

namespace entropic {

namespace {

void require_valid_logits(std::span<const double> logits) {
  if (logits.size() < 2) {
    throw Error(ErrorCode::kInvalidInput, "SoftmaxPolicy: need at least two actions");
  }
  for (std::size_t a = 0; a < logits.size(); ++a) {
    if (!std::isfinite(logits[a])) {
      std::ostringstream msg;
      msg << "SoftmaxPolicy: non-finite logit at action " << a;
      throw Error(ErrorCode::kInvalidInput, msg.str());
    }
  }
}

std::vector<double> softmax(std::span<const double> logits, double inv_temperature) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    p[a] = std::exp((logits[a] - top) * inv_temperature);
    total += p[a];
  }
  for (double& x : p) x /= total;
  return p;
}

}  // namespace

SoftmaxPolicy::SoftmaxPolicy(std::vector<double> logits) : logits_(std::move(logits)) {
  require_valid_logits(logits_);
}

SoftmaxPolicy SoftmaxPolicy::from_probabilities(std::span<const double> probabilities) {
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  std::vector<double> logits(probabilities.size());
  for (std::size_t a = 0; a < probabilities.size(); ++a) {
    if (!(probabilities[a] > 0.0) || !std::isfinite(probabilities[a])) {
      throw Error(ErrorCode::kInvalidInput,
                  "SoftmaxPolicy::from_probabilities: probabilities must be positive");
    }
    logits[a] = std::log(probabilities[a] / total);
  }
  return SoftmaxPolicy(std::move(logits));
}

SoftmaxPolicy SoftmaxPolicy::uniform(std::size_t num_actions) {
  return SoftmaxPolicy(std::vector<double>(num_actions, 0.0));
}

std::vector<double> probs(const SoftmaxPolicy& policy) {
  return softmax(policy.logits(), 1.0);
}

std::vector<double> tempered_probs(const SoftmaxPolicy& policy, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kInvalidParameter, "tempered_probs: temperature must be > 0");
  }
  return softmax(policy.logits(), 1.0 / temperature);
}

double entropy_of(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const SoftmaxPolicy& policy) { return entropy_of(probs(policy)); }

std::vector<double> entropy_gradient(const SoftmaxPolicy& policy) {
  const auto p = probs(policy);
  const double h = entropy_of(p);
  std::vector<double> grad(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) {
    grad[a] = p[a] > 0.0 ? -p[a] * (std::log(p[a]) + h) : 0.0;
  }
  return grad;
}

SoftmaxPolicy shifted(const SoftmaxPolicy& policy, std::span<const double> delta) {
  if (delta.size() != policy.num_actions()) {
    throw Error(ErrorCode::kInvalidInput, "shifted: delta size does not match num_actions");
  }
  std::vector<double> logits(policy.logits().begin(), policy.logits().end());
  for (std::size_t a = 0; a < logits.size(); ++a) logits[a] += delta[a];
  return SoftmaxPolicy(std::move(logits));
}

PolicyEnsemble::PolicyEnsemble(std::vector<SoftmaxPolicy> policies,
                               std::vector<double> state_weights)
    : policies_(std::move(policies)), weights_(std::move(state_weights)) {
  if (policies_.empty() || policies_.size() != weights_.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "PolicyEnsemble: need one weight per state and at least one state");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidInput, "PolicyEnsemble: weights must be nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidInput, "PolicyEnsemble: state weights must sum to 1");
  }
}

PolicyEnsemble::PolicyEnsemble(std::vector<SoftmaxPolicy> policies)
    : PolicyEnsemble(policies,
                     std::vector<double>(policies.size(),
                                         policies.empty() ? 0.0 : 1.0 / policies.size())) {}

double PolicyEnsemble::entropy() const {
  double h = 0.0;
  for (std::size_t s = 0; s < policies_.size(); ++s) {
    h += weights_[s] * entropic::entropy(policies_[s]);
  }
  return h;
}

double PolicyEnsemble::weighted_mean(std::span<const double> per_state) const {
  if (per_state.size() != policies_.size()) {
    throw Error(ErrorCode::kInvalidInput, "PolicyEnsemble::weighted_mean: size mismatch");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < per_state.size(); ++s) total += weights_[s] * per_state[s];
  return total;
}

}  // namespace entropic
