#pragma once

#include <random>

#include "gptd/hermitian.hpp"

namespace gptd {

using Rng = std::mt19937_64;

/// Hermitian matrix with Gaussian entries, symmetrized.
inline HermMatrix random_hermitian(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix<double> a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      a(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  return HermMatrix((a + a.adjoint()) / 2.0);
}

/// Hermitian direction of unit Hilbert-Schmidt norm.
inline HermMatrix random_direction(Eigen::Index d, Rng& rng) {
  HermMatrix h = random_hermitian(d, rng);
  const double norm = hs_norm(h);
  return norm > 0 ? HermMatrix(h.mat() / norm) : identity(d);
}

/// Haar-ish random unitary from the QR factorization of a Ginibre matrix.
inline ComplexMatrix<double> random_unitary(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix<double> g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<ComplexMatrix<double>> qr(g);
  ComplexMatrix<double> q = qr.householderQ();
  ComplexMatrix<double> r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto rkk = r(k, k);
    if (std::abs(rkk) > 0) q.col(k) *= rkk / std::abs(rkk);
  }
  return q;
}

inline ComplexVector<double> random_state_vector(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector<double> v(d);
  for (Eigen::Index i = 0; i < d; ++i)
    v[i] = std::complex<double>(gauss(rng), gauss(rng));
  v.normalize();
  return v;
}

inline HermMatrix random_pure_projector(Eigen::Index d, Rng& rng) {
  const auto v = random_state_vector(d, rng);
  return HermMatrix(v * v.adjoint());
}

/// PSD matrix with eigenvalues drawn uniformly from [lo, hi] in a random
/// eigenbasis; with the default range this is a valid POVM effect.
inline HermMatrix random_psd_effect(Eigen::Index d, Rng& rng, double lo = 0.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  const auto u = random_unitary(d, rng);
  RealVector<double> spec(d);
  for (Eigen::Index i = 0; i < d; ++i) spec[i] = unif(rng);
  return HermMatrix(u * spec.cast<std::complex<double>>().asDiagonal() *
                    u.adjoint());
}

/// Unit-trace PSD matrix (a density matrix) from a Ginibre factor.
inline HermMatrix random_density(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix<double> g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  ComplexMatrix<double> rho = g * g.adjoint();
  return HermMatrix(rho / rho.trace().real());
}

}  // namespace gptd
