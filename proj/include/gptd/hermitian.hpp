#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "gptd/errors.hpp"

namespace gptd {

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kHermiticityTol = 1e-12;

template <typename Scalar>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense Hermitian matrix. Construction symmetrizes inputs whose asymmetry
/// is below `hermiticity_tol` and rejects anything worse, so every instance
/// satisfies m == m.adjoint() exactly. Immutable after construction.
template <typename Scalar>
class HermMatrixT {
public:
  using Complex = std::complex<Scalar>;
  using Matrix = ComplexMatrix<Scalar>;

  template <typename Derived>
  explicit HermMatrixT(const Eigen::MatrixBase<Derived>& raw,
                       Scalar hermiticity_tol = Scalar(kHermiticityTol)) {
    Matrix a = raw.template cast<Complex>();
    if (a.rows() != a.cols() || a.rows() < 1) {
      throw ShapeError("HermMatrix: matrix must be square and non-empty");
    }
    if (!a.allFinite()) {
      throw ShapeError("HermMatrix: entries must be finite");
    }
    const Scalar asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (asym > hermiticity_tol) {
      throw ShapeError("HermMatrix: asymmetry " + std::to_string(asym) +
                       " exceeds tolerance");
    }
    m_ = ((a + a.adjoint()) / Scalar(2)).eval();
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  Scalar trace() const { return m_.trace().real(); }

private:
  Matrix m_;
};

using HermMatrix = HermMatrixT<double>;

template <typename Scalar>
HermMatrixT<Scalar> identity_herm(Eigen::Index d) {
  return HermMatrixT<Scalar>(ComplexMatrix<Scalar>::Identity(d, d));
}
inline HermMatrix identity(Eigen::Index d) { return identity_herm<double>(d); }

template <typename Scalar>
HermMatrixT<Scalar> zero_herm(Eigen::Index d) {
  return HermMatrixT<Scalar>(ComplexMatrix<Scalar>::Zero(d, d));
}

template <typename Scalar>
HermMatrixT<Scalar> operator+(const HermMatrixT<Scalar>& a,
                              const HermMatrixT<Scalar>& b) {
  return HermMatrixT<Scalar>(a.mat() + b.mat());
}
template <typename Scalar>
HermMatrixT<Scalar> operator-(const HermMatrixT<Scalar>& a,
                              const HermMatrixT<Scalar>& b) {
  return HermMatrixT<Scalar>(a.mat() - b.mat());
}
template <typename Scalar>
HermMatrixT<Scalar> operator-(const HermMatrixT<Scalar>& a) {
  return HermMatrixT<Scalar>(-a.mat());
}
template <typename Scalar>
HermMatrixT<Scalar> operator*(Scalar s, const HermMatrixT<Scalar>& a) {
  return HermMatrixT<Scalar>(s * a.mat());
}

/// Eigensystem of a Hermitian matrix: ascending eigenvalues, orthonormal
/// eigenvector columns, and index ranges [begin,end) grouping eigenvalues
/// that are closer than the degeneracy tolerance into one eigenspace.
template <typename Scalar>
struct SpectralDecompositionT {
  RealVector<Scalar> eigenvalues;
  ComplexMatrix<Scalar> eigenvectors;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;
};

using SpectralDecomposition = SpectralDecompositionT<double>;

namespace detail {

template <typename Scalar>
Scalar off_diagonal_norm(const ComplexMatrix<Scalar>& a) {
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j) sum += std::norm(a(i, j));
    }
  }
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for Hermitian matrices. Deterministic: fixed
/// sweep order, off-diagonal Frobenius threshold 1e-13 (relative to the
/// matrix scale), at most 100 sweeps. Intended for desk-scale dimensions.
template <typename Scalar>
SpectralDecompositionT<Scalar> spectral_decompose(
    const HermMatrixT<Scalar>& m, Scalar degeneracy_tol = Scalar(1e-9)) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index n = m.dim();
  ComplexMatrix<Scalar> a = m.mat();
  ComplexMatrix<Scalar> v = ComplexMatrix<Scalar>::Identity(n, n);

  const Scalar scale = std::max(Scalar(1), a.norm());
  const Scalar thresh = Scalar(1e-13) * scale;
  const Scalar skip = thresh / Scalar(10 * n * n);

  bool converged = n == 1;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    if (detail::off_diagonal_norm(a) <= thresh) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex beta = a(p, q);
        const Scalar ab = std::abs(beta);
        if (ab <= skip) continue;
        const Scalar alpha = a(p, p).real();
        const Scalar gamma = a(q, q).real();
        const Scalar tau = (gamma - alpha) / (Scalar(2) * ab);
        const Scalar sgn = tau >= Scalar(0) ? Scalar(1) : Scalar(-1);
        const Scalar t =
            sgn / (std::abs(tau) + std::sqrt(Scalar(1) + tau * tau));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Complex sigma = (t * c) * (beta / ab);
        // a <- G^H a G with the plane rotation G acting on columns p,q.
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - std::conj(sigma) * akq;
          a(k, q) = sigma * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sigma * aqk;
          a(q, k) = std::conj(sigma) * apk + c * aqk;
        }
        a(p, q) = Complex(0);
        a(q, p) = Complex(0);
        a(p, p) = Complex(a(p, p).real());
        a(q, q) = Complex(a(q, q).real());
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - std::conj(sigma) * vkq;
          v(k, q) = sigma * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && detail::off_diagonal_norm(a) > thresh) {
    throw NumericalError("spectral_decompose: Jacobi sweeps exhausted",
                         double(detail::off_diagonal_norm(a)));
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
    return a(i, i).real() < a(j, j).real();
  });

  SpectralDecompositionT<Scalar> sd;
  sd.eigenvalues.resize(n);
  sd.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    sd.eigenvalues[k] = a(order[size_t(k)], order[size_t(k)]).real();
    sd.eigenvectors.col(k) = v.col(order[size_t(k)]);
  }
  Eigen::Index begin = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k == n || sd.eigenvalues[k] - sd.eigenvalues[k - 1] > degeneracy_tol) {
      sd.groups.emplace_back(begin, k);
      begin = k;
    }
  }
  return sd;
}

template <typename Scalar>
HermMatrixT<Scalar> reconstruct(const SpectralDecompositionT<Scalar>& sd) {
  ComplexMatrix<Scalar> acc = ComplexMatrix<Scalar>::Zero(
      sd.eigenvectors.rows(), sd.eigenvectors.rows());
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    acc += sd.eigenvalues[k] * sd.eigenvectors.col(k) *
           sd.eigenvectors.col(k).adjoint();
  }
  return HermMatrixT<Scalar>(acc);
}

/// Projector onto the eigenspace given by one entry of `sd.groups`.
template <typename Scalar>
HermMatrixT<Scalar> eigenspace_projector(
    const SpectralDecompositionT<Scalar>& sd,
    std::pair<Eigen::Index, Eigen::Index> group) {
  const auto block =
      sd.eigenvectors.middleCols(group.first, group.second - group.first);
  return HermMatrixT<Scalar>(block * block.adjoint());
}

/// Splits m into (m_plus, m_minus) with m_plus PSD, m_minus negative
/// semidefinite, m_plus + m_minus = m and m_plus * m_minus = 0.
template <typename Scalar>
std::pair<HermMatrixT<Scalar>, HermMatrixT<Scalar>> positive_negative_parts(
    const HermMatrixT<Scalar>& m) {
  const auto sd = spectral_decompose(m);
  const Eigen::Index n = m.dim();
  ComplexMatrix<Scalar> plus = ComplexMatrix<Scalar>::Zero(n, n);
  ComplexMatrix<Scalar> minus = ComplexMatrix<Scalar>::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto term = sd.eigenvalues[k] * sd.eigenvectors.col(k) *
                      sd.eigenvectors.col(k).adjoint();
    if (sd.eigenvalues[k] > Scalar(0)) {
      plus += term;
    } else if (sd.eigenvalues[k] < Scalar(0)) {
      minus += term;
    }
  }
  return {HermMatrixT<Scalar>(plus), HermMatrixT<Scalar>(minus)};
}

template <typename Scalar>
Scalar trace_norm(const HermMatrixT<Scalar>& m) {
  return spectral_decompose(m).eigenvalues.cwiseAbs().sum();
}

template <typename Scalar>
Scalar min_eigenvalue(const HermMatrixT<Scalar>& m) {
  return spectral_decompose(m).eigenvalues.minCoeff();
}

template <typename Scalar>
Scalar max_eigenvalue(const HermMatrixT<Scalar>& m) {
  return spectral_decompose(m).eigenvalues.maxCoeff();
}

template <typename Scalar>
bool is_psd(const HermMatrixT<Scalar>& m, Scalar tol = Scalar(kDefaultTol)) {
  return min_eigenvalue(m) >= -tol;
}

template <typename Scalar>
HermMatrixT<Scalar> tensor_product(const HermMatrixT<Scalar>& a,
                                   const HermMatrixT<Scalar>& b) {
  return HermMatrixT<Scalar>(
      Eigen::kroneckerProduct(a.mat(), b.mat()).eval());
}

/// Transposes the second tensor factor: (i,k;j,l) -> (i,l;j,k).
template <typename Scalar>
HermMatrixT<Scalar> partial_transpose(const HermMatrixT<Scalar>& m,
                                      Eigen::Index dim_a,
                                      Eigen::Index dim_b) {
  if (dim_a * dim_b != m.dim()) {
    throw ShapeError("partial_transpose: dim_a * dim_b must equal dim");
  }
  ComplexMatrix<Scalar> out(m.dim(), m.dim());
  const auto idx = [dim_b](Eigen::Index sys_a, Eigen::Index sys_b) {
    return sys_a * dim_b + sys_b;
  };
  for (Eigen::Index i = 0; i < dim_a; ++i)
    for (Eigen::Index k = 0; k < dim_b; ++k)
      for (Eigen::Index j = 0; j < dim_a; ++j)
        for (Eigen::Index l = 0; l < dim_b; ++l)
          out(idx(i, k), idx(j, l)) = m(idx(i, l), idx(j, k));
  return HermMatrixT<Scalar>(out);
}

/// Hilbert-Schmidt pairing Tr(a b); real for Hermitian operands.
template <typename Scalar>
Scalar hs_inner(const HermMatrixT<Scalar>& a, const HermMatrixT<Scalar>& b) {
  if (a.dim() != b.dim()) {
    throw ShapeError("hs_inner: dimension mismatch");
  }
  return a.mat().cwiseProduct(b.mat().transpose()).sum().real();
}

template <typename Scalar>
Scalar hs_norm(const HermMatrixT<Scalar>& m) {
  return m.mat().norm();
}

/// Orthonormal basis of the real space of d x d Hermitian matrices under the
/// Hilbert-Schmidt inner product: the d diagonal units first, then for each
/// pair k < l the symmetric and antisymmetric off-diagonal elements.
template <typename Scalar>
std::vector<HermMatrixT<Scalar>> hermitian_onb(Eigen::Index d) {
  using Complex = std::complex<Scalar>;
  std::vector<HermMatrixT<Scalar>> basis;
  basis.reserve(size_t(d * d));
  ComplexMatrix<Scalar> e = ComplexMatrix<Scalar>::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    e.setZero();
    e(k, k) = Complex(1);
    basis.emplace_back(e);
  }
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = k + 1; l < d; ++l) {
      e.setZero();
      e(k, l) = Complex(inv_sqrt2);
      e(l, k) = Complex(inv_sqrt2);
      basis.emplace_back(e);
      e.setZero();
      e(k, l) = Complex(0, inv_sqrt2);
      e(l, k) = Complex(0, -inv_sqrt2);
      basis.emplace_back(e);
    }
  }
  return basis;
}

template <typename Scalar>
RealVector<Scalar> herm_to_coords(const HermMatrixT<Scalar>& m) {
  const auto basis = hermitian_onb<Scalar>(m.dim());
  RealVector<Scalar> coords(Eigen::Index(basis.size()));
  for (size_t k = 0; k < basis.size(); ++k) {
    coords[Eigen::Index(k)] = hs_inner(basis[k], m);
  }
  return coords;
}

template <typename Scalar>
HermMatrixT<Scalar> coords_to_herm(const RealVector<Scalar>& coords,
                                   Eigen::Index d) {
  if (coords.size() != d * d) {
    throw ShapeError("coords_to_herm: need d*d coordinates");
  }
  const auto basis = hermitian_onb<Scalar>(d);
  ComplexMatrix<Scalar> acc = ComplexMatrix<Scalar>::Zero(d, d);
  for (size_t k = 0; k < basis.size(); ++k) {
    acc += coords[Eigen::Index(k)] * basis[k].mat();
  }
  return HermMatrixT<Scalar>(acc);
}

}  // namespace gptd
