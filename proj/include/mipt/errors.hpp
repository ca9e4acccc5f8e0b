#pragma once

#include <stdexcept>
#include <string>

namespace mipt {

/// Malformed or out-of-contract input (bad lattice size, wrong pattern
/// length, overlapping regions, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Roundoff has pushed a state or observable outside its physical range.
/// The trajectory that raised it cannot be trusted.
class NumericalDegradation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A forced measurement outcome whose Born probability is (numerically) zero.
class ForbiddenOutcome : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The one-loop flow has no critical point (d <= 1): every coupling flows
/// to the localized fixed point.
class NoTransition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mipt
