#pragma once

#include <stdexcept>
#include <string>

namespace gpk {

/// Invalid input from the caller: bad dimensions, zero vectors, bad options.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// A dense fallback was requested for a problem larger than the guard allows.
class SizeGuardError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finalized diagonal entry of a sliding LQ/QR factor vanished.
class SingularWindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense oracle input that violates its rank precondition.
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpk
