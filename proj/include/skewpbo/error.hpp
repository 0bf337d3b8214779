#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skewpbo {

enum class ErrorKind {
  NotPositiveDefinite,
  DimensionMismatch,
  InfeasibleStart,
  IndexOutOfRange,
  SelfDuel,
  PreferenceOnInvalidPoint,
  UnreferencedPoint,
  TooManyConstraints,
  BoundNonPositive,
  NoConvergence,
  ZeroVariance,
  TooFewSamples,
  InvalidArgument,
  UnknownBenchmark,
  OutOfBounds,
  IoError,
  InvalidConfig,
  PendingProposalExists,
  NoPendingProposal,
  NonValidNotEnabled,
  NotFound,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the HTTP layer) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace skewpbo

namespace skewpbo {

/// Non-fatal numerical notices. The default handler writes to stderr.
void log_warning(std::string_view message);
void set_warning_handler(std::function<void(std::string_view)> handler);

}  // namespace skewpbo
