#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdro {

enum class ErrorCode {
  NonFinite,
  DimensionMismatch,
  ShapeMismatch,
  DimensionTooLarge,
  WrongActivation,
  DegeneratePoint,
  EmptyInventory,
  AllDegenerate,
  NoRootSample,
  CellEscape,
  NonPositiveSlope,
  LabelMismatch,
  InvalidArgument,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the toolkit; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wdro
