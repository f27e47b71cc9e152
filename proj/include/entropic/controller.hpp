#pragma once

namespace entropic {

/// Discrete PI controller mapping entropy error to the reweighting
/// coefficient α.
struct ControllerState {
  double k_p = 1.0;
  double k_i = 0.01;
  double target_entropy = 0.1;
  double integral = 0.0;
  double last_alpha = 0.0;
  bool clamp_enabled = true;
  bool anti_windup = true;

  bool operator==(const ControllerState&) const = default;
};

struct ControllerOutput {
  double alpha = 0.0;
  ControllerState state;
  double error = 0.0;
  bool clamped = false;
};

/// e = H − target, α = k_p e + k_i·integral (integral over earlier steps),
/// then integral += e unless anti-windup suppresses it on a clamped step.
/// Throws Error(kMeasurement) for a negative or non-finite entropy.
ControllerOutput controller_step(const ControllerState& state, double measured_entropy);

/// Zeroes the integral and last α, keeping gains, target and flags.
ControllerState reset(const ControllerState& state);

}  // namespace entropic
