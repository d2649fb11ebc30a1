#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gptd/cone.hpp"
#include "gptd/errors.hpp"
#include "gptd/hermitian.hpp"

namespace gptd {

/// A quantum-like model: Hermitian matrices of a fixed dimension, a positive
/// cone of states, and the trace functional as order unit (the identity
/// matrix under the Hilbert-Schmidt pairing).
struct GptModel {
  Eigen::Index dim;
  Cone cone;
  HermMatrix unit;

  static GptModel psd(Eigen::Index d, double tol = kDefaultTol) {
    return {d, Cone::psd(d, tol), identity(d)};
  }
  static GptModel sep22(double tol = kDefaultTol) {
    return {4, Cone::sep22(tol), identity(4)};
  }
  static GptModel from_generators(std::vector<HermMatrix> generators,
                                  double tol = kDefaultTol) {
    const Eigen::Index d = generators.front().dim();
    return {d, Cone::from_generators(std::move(generators), tol), identity(d)};
  }

  double tolerance() const { return cone.tolerance(); }
};

namespace detail {

inline void attach_certificate(ValidationError& err,
                               const MembershipVerdict& verdict) {
  if (verdict.witness) {
    const auto& w = *verdict.witness;
    std::vector<std::complex<double>> entries;
    entries.reserve(size_t(w.dim() * w.dim()));
    for (Eigen::Index i = 0; i < w.dim(); ++i)
      for (Eigen::Index j = 0; j < w.dim(); ++j) entries.push_back(w(i, j));
    err.set_certificate(int(w.dim()), std::move(entries));
  }
}

}  // namespace detail

/// A unit-trace cone member. Only obtainable through validate_state.
class State {
public:
  const HermMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.dim(); }

private:
  friend State validate_state(const GptModel&, const HermMatrix&);
  explicit State(HermMatrix m) : matrix_(std::move(m)) {}
  HermMatrix matrix_;
};

/// An effect family summing to the identity, each effect dual-feasible.
/// Only obtainable through validate_measurement.
class Measurement {
public:
  const std::vector<HermMatrix>& effects() const { return effects_; }
  size_t size() const { return effects_.size(); }
  Eigen::Index dim() const { return effects_.front().dim(); }

private:
  friend Measurement validate_measurement(const GptModel&,
                                          const std::vector<HermMatrix>&);
  explicit Measurement(std::vector<HermMatrix> effects)
      : effects_(std::move(effects)) {}
  std::vector<HermMatrix> effects_;
};

inline State validate_state(const GptModel& model, const HermMatrix& x) {
  if (x.dim() != model.dim) {
    throw ShapeError("validate_state: dimension mismatch");
  }
  if (std::abs(x.trace() - 1.0) > 1e-10) {
    throw ValidationError(ValidationError::Kind::NotNormalized,
                          "state trace " + std::to_string(x.trace()) +
                              " differs from 1");
  }
  const auto verdict = cone_membership(model.cone, x);
  if (verdict.out()) {
    ValidationError err(ValidationError::Kind::NotInCone,
                        "state rejected by cone membership: " + verdict.note);
    detail::attach_certificate(err, verdict);
    throw err;
  }
  if (!verdict.in()) {
    throw ValidationError(ValidationError::Kind::MembershipUnknown,
                          "state membership inconclusive: " + verdict.note);
  }
  return State(x);
}

inline Measurement validate_measurement(
    const GptModel& model, const std::vector<HermMatrix>& effects) {
  if (effects.size() < 2) {
    throw ValidationError(ValidationError::Kind::SumMismatch,
                          "measurement needs at least two effects");
  }
  ComplexMatrix<double> sum =
      ComplexMatrix<double>::Zero(model.dim, model.dim);
  for (const auto& e : effects) {
    if (e.dim() != model.dim) {
      throw ShapeError("validate_measurement: dimension mismatch");
    }
    sum += e.mat();
  }
  const double gap =
      (sum - ComplexMatrix<double>::Identity(model.dim, model.dim))
          .cwiseAbs()
          .maxCoeff();
  if (gap > 1e-10) {
    throw ValidationError(ValidationError::Kind::SumMismatch,
                          "effects sum differs from identity by " +
                              std::to_string(gap));
  }
  for (size_t i = 0; i < effects.size(); ++i) {
    const auto verdict = dual_membership(model.cone, effects[i]);
    if (verdict.out()) {
      ValidationError err(
          ValidationError::Kind::EffectNotInDual,
          "effect " + std::to_string(i) + " rejected: " + verdict.note,
          int(i));
      detail::attach_certificate(err, verdict);
      throw err;
    }
    if (!verdict.in()) {
      throw ValidationError(ValidationError::Kind::MembershipUnknown,
                            "effect " + std::to_string(i) +
                                " membership inconclusive: " + verdict.note,
                            int(i));
    }
  }
  return Measurement(effects);
}

/// Outcome probabilities p_i = Tr(M_i rho), clamped to [0, 1].
inline Eigen::VectorXd outcome_distribution(const State& state,
                                            const Measurement& meas) {
  if (state.dim() != meas.dim()) {
    throw ShapeError("outcome_distribution: dimension mismatch");
  }
  Eigen::VectorXd p(Eigen::Index(meas.size()));
  for (size_t i = 0; i < meas.size(); ++i) {
    const double raw = hs_inner(meas.effects()[i], state.matrix());
    p[Eigen::Index(i)] = std::clamp(raw, 0.0, 1.0);
  }
  return p;
}

}  // namespace gptd
