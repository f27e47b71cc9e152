#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entropic/policy.hpp"

namespace entropic {

/// Binary-reward bandit: actions in positive_set earn reward_pos, all other
/// actions earn reward_neg.
struct BinaryTask {
  std::size_t num_actions = 0;
  std::vector<std::size_t> positive_set;
  double reward_pos = 1.0;
  double reward_neg = 0.0;

  /// Throws Error(kInvalidInput) unless the positive set is nonempty, proper,
  /// in range and duplicate-free, and reward_pos > reward_neg.
  void validate() const;

  /// Membership mask of length num_actions.
  std::vector<bool> positive_mask() const;

  double reward(std::size_t action) const;
};

/// Per-action advantages with the constant-per-class structure
/// a_neg = −h·a_pos.
struct AdvantageProfile {
  std::vector<double> advantages;
  std::vector<bool> is_positive;
  double a_pos = 0.0;
  double a_neg = 0.0;
  double h = 0.0;

  std::size_t size() const noexcept { return advantages.size(); }
};

/// Normalization of the exact advantages. kUnit fixes a_pos = 1. kGrpoLimit
/// uses the large-group limit of group normalization,
/// a_pos = sqrt(p_neg/p_pos), a_neg = −sqrt(p_pos/p_neg).
enum class AdvantageScale { kUnit, kGrpoLimit };

inline constexpr double kGrpoEpsilon = 1e-6;

/// (r − mean)/(std + epsilon) with the population standard deviation.
/// All-equal groups return zeros. Throws Error(kInvalidGroup) for fewer than
/// two rewards and Error(kInvalidParameter) for epsilon ≤ 0.
std::vector<double> grpo_advantages(std::span<const double> rewards,
                                    double epsilon = kGrpoEpsilon);

/// Zero-mean advantages under `policy`. p_neg is summed directly over the
/// negative actions. Throws Error(kDegenerateTask) if p_neg < 1e-12.
AdvantageProfile exact_advantages(const BinaryTask& task, const SoftmaxPolicy& policy,
                                  AdvantageScale scale = AdvantageScale::kUnit);

/// Profile from an explicit advantage vector (sign decides the class). a_pos,
/// a_neg and h are filled from the first action of each class, or 0 for an
/// empty class.
AdvantageProfile profile_from_vector(std::vector<double> advantages);

/// Σ_a π(a) A(a).
double expected_advantage(const AdvantageProfile& adv, std::span<const double> probabilities);

}  // namespace entropic
