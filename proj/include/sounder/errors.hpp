// SPDX-License-Identifier: MIT
//
// Exception taxonomy for the sounder library.
//
// Every failure mode surfaces as a subclass of sounder::error so callers can
// catch the whole family or a specific kind.  Messages always name the
// offending argument or quantity.

#pragma once

#include <stdexcept>
#include <string>

namespace sounder {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix/vector dimension mismatch or invalid shape.
class dimension_error : public error {
 public:
  using error::error;
};

/// Scalar argument outside its mathematical domain (negative variance,
/// probability outside [0,1], non-positive coherence time, ...).
class domain_error : public error {
 public:
  using error::error;
};

/// Structurally invalid model definition (covariance not PSD, correlation
/// matrix not Hermitian, inconsistent model fields).
class model_error : public error {
 public:
  using error::error;
};

/// Numerical failure: eigensolver did not converge, reconstruction residual
/// too large, eigenvalue clamping would hide a genuinely indefinite matrix.
class numeric_error : public error {
 public:
  using error::error;
};

/// Statistical preconditions violated (too few samples/trials).
class statistics_error : public error {
 public:
  using error::error;
};

/// Invalid shift-register configuration (taps not primitive: generated
/// sequence does not reach full period).
class sequence_error : public error {
 public:
  using error::error;
};

/// Estimation failure (degenerate fit, unusable trace).
class estimation_error : public error {
 public:
  using error::error;
};

/// Quantity outside the supported range of an exact algorithm
/// (e.g. exact integer binomials beyond the supported size).
class range_error : public error {
 public:
  using error::error;
};

/// File/stream input-output failure.
class io_error : public error {
 public:
  using error::error;
};

/// Invalid experiment configuration (reported with the offending field name).
class validation_error : public error {
 public:
  using error::error;
};

namespace detail {

/// Throw domain_error unless x > 0.
inline void check_positive(double x, const std::string& name) {
  if (!(x > 0.0)) {
    throw domain_error(name + " must be positive, got " + std::to_string(x));
  }
}

/// Throw domain_error unless x >= 0.
inline void check_nonnegative(double x, const std::string& name) {
  if (!(x >= 0.0)) {
    throw domain_error(name + " must be nonnegative, got " + std::to_string(x));
  }
}

/// Throw dimension_error unless n >= 1.
inline void check_positive_index(long long n, const std::string& name) {
  if (n < 1) {
    throw dimension_error(name + " must be >= 1, got " + std::to_string(n));
  }
}

}  // namespace detail

}  // namespace sounder
