#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "entropic/advantages.hpp"
#include "entropic/controller.hpp"
#include "entropic/losses.hpp"
#include "entropic/policy.hpp"

namespace entropic {

struct TaskSpec {
  std::size_t num_actions = 32;
  /// Size of the random positive set drawn per state. Ignored when
  /// positive_set is given.
  std::size_t num_positive = 18;
  /// Explicit positive set shared by every state.
  std::vector<std::size_t> positive_set;
  double reward_pos = 1.0;
  double reward_neg = 0.0;
  /// Seed for the random positive sets; the scenario seed when absent.
  std::optional<std::uint64_t> seed;
};

enum class InitKind { kUniform, kRandom, kPeaked, kExplicit };

struct PolicyInitSpec {
  InitKind kind = InitKind::kRandom;
  /// Standard deviation of the Gaussian logits for kRandom.
  double scale = 1.0;
  /// Logit given to one random action per state for kPeaked.
  double concentration = 4.0;
  /// Logits shared by every state for kExplicit.
  std::vector<double> logits;
  /// Seed for the initial logits; the scenario seed when absent.
  std::optional<std::uint64_t> seed;
};

enum class ModeKind { kExact, kSampled };

struct ModeSpec {
  ModeKind kind = ModeKind::kExact;
  std::size_t group_size = 8;
  double temperature = 0.6;
};

/// Class filter on the advantages. The filtered modes give every action the
/// positive (or negative) advantage and take the uncentered step
/// Δθ = η π ⊙ A. Exact mode only.
enum class SampleFilter { kNone, kPositiveOnly, kNegativeOnly };

struct ControllerSpec {
  bool enabled = true;
  double k_p = 1.0;
  double k_i = 0.01;
  double target_entropy = 0.1;
  bool clamp = true;
  bool anti_windup = true;

  ControllerState initial_state() const;
};

/// Masks drop the gradient of whole action groups, split by advantage sign
/// and by π(a) against prob_split (high means π(a) > prob_split).
struct MaskSpec {
  bool p_hi = false;
  bool p_lo = false;
  bool n_hi = false;
  bool n_lo = false;
  /// 1/num_actions when absent.
  std::optional<double> prob_split;

  bool any() const noexcept { return p_hi || p_lo || n_hi || n_lo; }
};

struct ScenarioConfig {
  TaskSpec task;
  std::size_t num_states = 16;
  PolicyInitSpec policy_init;
  ModeSpec mode;
  LossVariant loss;
  ControllerSpec controller;
  std::size_t controller_start_step = 0;
  /// Optimizer steps per behavior refresh; used by off-policy kinds.
  std::size_t staleness = 4;
  double eta = 0.1;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  SampleFilter sample_filter = SampleFilter::kNone;
  AdvantageScale advantage_scale = AdvantageScale::kUnit;
  MaskSpec mask;

  /// Throws Error(kConfig) naming the offending field and its valid range.
  void validate() const;
};

struct StepRecord {
  std::int64_t step = 0;
  double entropy_exact = 0.0;
  double entropy_mc = 0.0;
  double alpha = 0.0;
  double error_e = 0.0;
  double integral_I = 0.0;
  double predicted_dH = 0.0;
  double observed_dH = 0.0;
  double lyapunov_V = 0.0;
  double delta_bias = 0.0;
  double accuracy_proxy = 0.0;

  bool operator==(const StepRecord&) const = default;
};

using Trace = std::vector<StepRecord>;

/// Read-only view of the plant handed to an observer before each update.
struct StepContext {
  std::size_t step = 0;
  const PolicyEnsemble* policies = nullptr;
  const std::vector<SoftmaxPolicy>* behaviors = nullptr;
  const std::vector<AdvantageProfile>* advantages = nullptr;
  const std::vector<BinaryTask>* tasks = nullptr;
  /// Per-state flag: false if the state was skipped for having no negative
  /// mass.
  const std::vector<bool>* active = nullptr;
  double alpha = 0.0;
  const ScenarioConfig* config = nullptr;
};

using StepObserver = std::function<void(const StepContext&)>;

/// Per-state tasks and initial policies, as run_scenario builds them.
std::vector<BinaryTask> build_tasks(const ScenarioConfig& config);
PolicyEnsemble build_initial_policies(const ScenarioConfig& config);

/// Deterministic given the config. Throws Error(kDivergence) with the step
/// index if a logit leaves [−1e3, 1e3] or becomes non-finite.
Trace run_scenario(const ScenarioConfig& config, const StepObserver& observer = {});

/// Runs `config` with its controller disabled and the given masks.
Trace run_masking_ablation(const ScenarioConfig& config, const MaskSpec& mask);

/// Runs `config` with α ≡ 0 before controller_start_step and a freshly reset
/// controller from then on. Requires 0 < controller_start_step ≤ steps.
Trace run_plug_and_play(const ScenarioConfig& config);

struct SweepResult {
  std::size_t index = 0;
  Trace trace;
  std::optional<std::string> error;
};

/// Runs every config on a worker pool. Results are ordered by config index.
/// A failing scenario records its error and does not stop the others.
std::vector<SweepResult> sweep(const std::vector<ScenarioConfig>& configs,
                               std::size_t max_workers = 0);

}  // namespace entropic
