#include "cellscape/error.hpp"

namespace cellscape {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::degenerate_density: return "degenerate-density";
    case ErrorCode::malformed_structure: return "malformed-structure";
    case ErrorCode::orphan_curve: return "orphan-curve";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::overlap: return "overlap";
    case ErrorCode::unreachable: return "unreachable";
    case ErrorCode::invalid_basepoint: return "invalid-basepoint";
    case ErrorCode::numerical_failure: return "numerical-failure";
    case ErrorCode::inversion_failure: return "inversion-failure";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

}  // namespace cellscape
