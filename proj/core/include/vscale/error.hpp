#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vscale {

enum class ErrorCode {
  ParseError,
  NotClosed,
  NotOriented,
  DuplicateFace,
  DegenerateBaseMetric,
  MissingEdgeLength,
  NonPositiveLength,
  InvalidVertexIndex,
  Overflow,
  DegenerateTriangle,
  WrongGeometry,
  QuadratureFailure,
  TargetSumMismatch,
  InvalidTarget,
  NotConverged,
  DegenerateFace,
  SizeMismatch,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vscale
