#include "entropic/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entropic/error.hpp"

namespace entropic {

ControllerOutput controller_step(const ControllerState& state, double measured_entropy) {
  if (!std::isfinite(measured_entropy) || measured_entropy < 0.0) {
    std::ostringstream msg;
    msg << "controller_step: invalid entropy measurement " << measured_entropy;
    throw Error(ErrorCode::kMeasurement, msg.str());
  }
  ControllerOutput out;
  out.state = state;
  out.error = measured_entropy - state.target_entropy;
  const double raw = state.k_p * out.error + state.k_i * state.integral;
  out.alpha = raw;
  if (state.clamp_enabled) {
    out.alpha = std::clamp(raw, -1.0, 1.0);
    out.clamped = out.alpha != raw;
  }
  if (!(state.anti_windup && out.clamped)) out.state.integral += out.error;
  out.state.last_alpha = out.alpha;
  return out;
}

ControllerState reset(const ControllerState& state) {
  ControllerState out = state;
  out.integral = 0.0;
  out.last_alpha = 0.0;
  return out;
}

}  // namespace entropic
