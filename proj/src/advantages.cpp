#include "entropic/advantages.hpp"

#include <cmath>
#include <sstream>

#include "entropic/error.hpp"

namespace entropic {

void BinaryTask::validate() const {
  if (num_actions < 2) {
    throw Error(ErrorCode::kInvalidInput, "BinaryTask: need at least two actions");
  }
  if (positive_set.empty() || positive_set.size() >= num_actions) {
    throw Error(ErrorCode::kInvalidInput,
                "BinaryTask: positive_set must be nonempty and leave a negative action");
  }
  std::vector<bool> seen(num_actions, false);
  for (std::size_t a : positive_set) {
    if (a >= num_actions) {
      std::ostringstream msg;
      msg << "BinaryTask: positive action " << a << " out of range [0, " << num_actions << ")";
      throw Error(ErrorCode::kInvalidInput, msg.str());
    }
    if (seen[a]) {
      throw Error(ErrorCode::kInvalidInput, "BinaryTask: duplicate positive action");
    }
    seen[a] = true;
  }
  if (!(reward_pos > reward_neg)) {
    throw Error(ErrorCode::kInvalidInput, "BinaryTask: reward_pos must exceed reward_neg");
  }
}

std::vector<bool> BinaryTask::positive_mask() const {
  std::vector<bool> mask(num_actions, false);
  for (std::size_t a : positive_set) {
    if (a < num_actions) mask[a] = true;
  }
  return mask;
}

double BinaryTask::reward(std::size_t action) const {
  for (std::size_t a : positive_set) {
    if (a == action) return reward_pos;
  }
  return reward_neg;
}

std::vector<double> grpo_advantages(std::span<const double> rewards, double epsilon) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kInvalidGroup, "grpo_advantages: group size must be at least 2");
  }
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "grpo_advantages: epsilon must be > 0");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  bool all_equal = true;
  for (double r : rewards) {
    var += (r - mean) * (r - mean);
    if (r != rewards[0]) all_equal = false;
  }
  std::vector<double> out(rewards.size(), 0.0);
  if (all_equal) return out;
  const double denom = std::sqrt(var / n) + epsilon;
  for (std::size_t k = 0; k < rewards.size(); ++k) out[k] = (rewards[k] - mean) / denom;
  return out;
}

AdvantageProfile exact_advantages(const BinaryTask& task, const SoftmaxPolicy& policy,
                                  AdvantageScale scale) {
  task.validate();
  if (task.num_actions != policy.num_actions()) {
    throw Error(ErrorCode::kInvalidInput, "exact_advantages: task/policy action count mismatch");
  }
  const auto p = probs(policy);
  const auto mask = task.positive_mask();
  double p_pos = 0.0;
  double p_neg = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) (mask[a] ? p_pos : p_neg) += p[a];
  if (p_neg < 1e-12) {
    std::ostringstream msg;
    msg << "exact_advantages: negative mass " << p_neg << " below 1e-12";
    throw Error(ErrorCode::kDegenerateTask, msg.str());
  }
  AdvantageProfile out;
  out.h = p_pos / p_neg;
  if (scale == AdvantageScale::kUnit) {
    out.a_pos = 1.0;
    out.a_neg = -out.h;
  } else {
    out.a_pos = std::sqrt(p_neg / p_pos);
    out.a_neg = -std::sqrt(p_pos / p_neg);
  }
  out.is_positive = mask;
  out.advantages.resize(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) out.advantages[a] = mask[a] ? out.a_pos : out.a_neg;
  return out;
}

AdvantageProfile profile_from_vector(std::vector<double> advantages) {
  AdvantageProfile out;
  out.is_positive.resize(advantages.size());
  bool have_pos = false;
  bool have_neg = false;
  for (std::size_t a = 0; a < advantages.size(); ++a) {
    if (!std::isfinite(advantages[a])) {
      throw Error(ErrorCode::kInvalidInput, "profile_from_vector: non-finite advantage");
    }
    out.is_positive[a] = advantages[a] > 0.0;
    if (advantages[a] > 0.0 && !have_pos) {
      out.a_pos = advantages[a];
      have_pos = true;
    } else if (advantages[a] < 0.0 && !have_neg) {
      out.a_neg = advantages[a];
      have_neg = true;
    }
  }
  out.h = (have_pos && have_neg) ? -out.a_neg / out.a_pos : 0.0;
  out.advantages = std::move(advantages);
  return out;
}

double expected_advantage(const AdvantageProfile& adv, std::span<const double> probabilities) {
  if (probabilities.size() != adv.size()) {
    throw Error(ErrorCode::kInvalidInput, "expected_advantage: size mismatch");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < adv.size(); ++a) total += probabilities[a] * adv.advantages[a];
  return total;
}

}  // namespace entropic
