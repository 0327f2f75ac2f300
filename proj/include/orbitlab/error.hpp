#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orbitlab {

enum class Errc {
  UnknownSpace,
  BadParameter,
  BadPoint,
  SpaceMismatch,
  EmptyInput,
  UnknownMap,
  IncompatibleSpace,
  NotNonexpansive,
  NumericEscape,
  AuditInconclusive,
  BudgetExceeded,
  NotInjective,
  WrongMonotonicity,
  NotShiftMonotone,
  CoverFailure,
  PreconditionUnmet,
  NoRecurrentAnchor,
  InternalContradiction,
  InvalidSemigroup,
  OnBoundary,
  BrokenChain,
  UnsupportedSpace,
  ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  Errc code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace orbitlab
