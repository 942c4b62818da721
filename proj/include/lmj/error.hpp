#pragma once

#include <stdexcept>
#include <string>

namespace lmj {

/// Input violated an operation's precondition (shape, range, missing data).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arithmetic left its domain: non-PSD covariance, singular system, non-finite values.
class NumericDomain : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Gradient training diverged.
class TrainingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persistence or file-format failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lmj
