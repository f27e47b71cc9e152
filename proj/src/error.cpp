#include "entropic/error.hpp"

namespace entropic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kInvalidGroup: return "invalid-group";
    case ErrorCode::kDegenerateTask: return "degenerate-task";
    case ErrorCode::kControllerRange: return "controller-range";
    case ErrorCode::kImportanceRatio: return "importance-ratio";
    case ErrorCode::kMeasurement: return "measurement";
    case ErrorCode::kDegenerateDynamics: return "degenerate-dynamics";
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace entropic
