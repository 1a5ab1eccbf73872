#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cellscape {

enum class ErrorCode {
  invalid_input,
  invalid_parameter,
  degenerate_density,
  malformed_structure,
  orphan_curve,
  conflict,
  overlap,
  unreachable,
  invalid_basepoint,
  numerical_failure,
  inversion_failure,
  divergence,
  io,
  config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above so
/// that callers (and the CLI exit path) can branch on the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Non-fatal conditions (near-boundary evaluation, zero-mass structures).
using Warnings = std::vector<std::string>;

}  // namespace cellscape
