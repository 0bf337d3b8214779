#include "skewpbo/error.hpp"

#include <iostream>
#include <mutex>

namespace skewpbo {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InfeasibleStart: return "InfeasibleStart";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SelfDuel: return "SelfDuel";
    case ErrorKind::PreferenceOnInvalidPoint: return "PreferenceOnInvalidPoint";
    case ErrorKind::UnreferencedPoint: return "UnreferencedPoint";
    case ErrorKind::TooManyConstraints: return "TooManyConstraints";
    case ErrorKind::BoundNonPositive: return "BoundNonPositive";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnknownBenchmark: return "UnknownBenchmark";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::PendingProposalExists: return "PendingProposalExists";
    case ErrorKind::NoPendingProposal: return "NoPendingProposal";
    case ErrorKind::NonValidNotEnabled: return "NonValidNotEnabled";
    case ErrorKind::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace skewpbo

namespace skewpbo {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(std::string_view)>& warning_handler() {
  static std::function<void(std::string_view)> handler = [](std::string_view message) {
    std::cerr << "skewpbo warning: " << message << '\n';
  };
  return handler;
}

}  // namespace

void log_warning(std::string_view message) {
  const std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

void set_warning_handler(std::function<void(std::string_view)> handler) {
  const std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

}  // namespace skewpbo
