#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace gptd {

/// Wrong matrix shape, non-square dimension, hermiticity violation beyond
/// tolerance, non-finite entries, or mismatched operand dimensions.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file (bad JSON, missing fields, wrong format_version).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An iterative kernel failed to converge; carries the final residual.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// A state, measurement, or cone failed its defining checks. Carries the
/// failing effect index (when applicable) and, for cone rejections, a
/// separating certificate as raw row-major complex entries so callers can
/// re-verify or serialize it without depending on the matrix type.
class ValidationError : public std::runtime_error {
public:
  enum class Kind {
    NotNormalized,
    NotInCone,
    MembershipUnknown,
    SumMismatch,
    EffectNotInDual,
    NotPointed,
    BadGenerator,
  };

  ValidationError(Kind kind, const std::string& what, int effect_index = -1)
      : std::runtime_error(what), kind_(kind), effect_index_(effect_index) {}

  Kind kind() const { return kind_; }
  int effect_index() const { return effect_index_; }

  void set_certificate(int dim, std::vector<std::complex<double>> entries) {
    certificate_dim_ = dim;
    certificate_entries_ = std::move(entries);
  }
  int certificate_dim() const { return certificate_dim_; }
  const std::vector<std::complex<double>>& certificate_entries() const {
    return certificate_entries_;
  }

private:
  Kind kind_;
  int effect_index_;
  int certificate_dim_ = 0;
  std::vector<std::complex<double>> certificate_entries_;
};

/// An operation's precondition does not hold (e.g. eigenvalue spread too
/// small for an advantage construction). Carries the offending value.
class PreconditionError : public std::runtime_error {
public:
  PreconditionError(const std::string& what, double value = 0.0)
      : std::runtime_error(what), value_(value) {}
  double value() const { return value_; }

private:
  double value_;
};

/// Interior-point certification failed for a cone.
class InteriorityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A search or solver oracle could not produce a sound answer (inconclusive
/// witness search, LP degeneracy, failed certificate re-verification).
class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace gptd
