#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gptd/errors.hpp"
#include "gptd/hermitian.hpp"
#include "gptd/nnls.hpp"
#include "gptd/sampling.hpp"

namespace gptd {

/// Outcome of a primal or dual cone membership query. Certificates are
/// chosen so they re-verify numerically: an Out witness pairs strictly
/// negatively with the rejected element while staying (dual-)feasible, an
/// In verdict carries generator coefficients or a decomposition into a PSD
/// part plus a partial transpose of a PSD part.
struct MembershipVerdict {
  enum class Status { In, Out, Unknown };
  Status status = Status::Unknown;
  std::optional<HermMatrix> witness;
  std::optional<Eigen::VectorXd> coefficients;
  std::optional<std::pair<HermMatrix, HermMatrix>> decomposition;
  std::string note;

  bool in() const { return status == Status::In; }
  bool out() const { return status == Status::Out; }
};

struct InteriorPoint {
  HermMatrix x0;
  double radius = 0.0;
};

/// Explicit product vectors psi_i = a_i (x) b_i whose projectors sum to a
/// target operator.
struct ProductDecomposition {
  struct ProductVector {
    ComplexVector<double> a;
    ComplexVector<double> b;
  };
  std::vector<ProductVector> vectors;
};

/// A positive cone of Hermitian matrices with primal and dual membership
/// oracles. Three representations: Psd(d), the two-qubit separable cone
/// Sep22, and the conic hull of an explicit generator list.
class Cone {
public:
  enum class Variant { Psd, Sep22, Generator };

  static Cone psd(Eigen::Index dim, double tol = kDefaultTol) {
    return Cone(Variant::Psd, dim, {}, tol);
  }

  static Cone sep22(double tol = kDefaultTol) {
    return Cone(Variant::Sep22, 4, {}, tol);
  }

  static Cone from_generators(std::vector<HermMatrix> generators,
                              double tol = kDefaultTol);

  Variant variant() const { return variant_; }
  Eigen::Index dim() const { return dim_; }
  double tolerance() const { return tol_; }
  const std::vector<HermMatrix>& generators() const { return generators_; }
  const std::vector<HermMatrix>& unit_generators() const {
    return unit_generators_;
  }
  const Eigen::MatrixXd& generator_gram() const { return gram_; }

private:
  Cone(Variant variant, Eigen::Index dim, std::vector<HermMatrix> generators,
       double tol)
      : variant_(variant),
        dim_(dim),
        tol_(tol),
        generators_(std::move(generators)) {}

  Variant variant_;
  Eigen::Index dim_;
  double tol_;
  std::vector<HermMatrix> generators_;
  std::vector<HermMatrix> unit_generators_;  // HS-normalized copies
  Eigen::MatrixXd gram_;                     // Gram of the normalized set
};

MembershipVerdict cone_membership(const Cone& cone, const HermMatrix& x);

namespace detail {

inline HermMatrix outer_projector(const ComplexVector<double>& v) {
  return HermMatrix(v * v.adjoint());
}

inline NnlsResult generator_fit(const Cone& cone, const HermMatrix& x,
                                double target_residual) {
  const auto& gens = cone.unit_generators();
  Eigen::VectorXd beta(Eigen::Index(gens.size()));
  for (size_t i = 0; i < gens.size(); ++i) {
    beta[Eigen::Index(i)] = hs_inner(gens[i], x);
  }
  const auto exact_residual = [&](const Eigen::VectorXd& c) {
    ComplexMatrix<double> r = -x.mat();
    for (size_t i = 0; i < gens.size(); ++i) {
      r += c[Eigen::Index(i)] * gens[i].mat();
    }
    return r.norm();
  };
  return nonneg_lsq_pgd(cone.generator_gram(), beta, exact_residual,
                        target_residual);
}

/// Minimum of <a(x)b| m |a(x)b> over two-qubit product states: coarse grid
/// over two angles per side, then alternating closed-form eigenvector
/// updates from the best grid cells plus seeded random restarts.
struct ProductMinimum {
  double value = 0.0;
  ComplexVector<double> a;
  ComplexVector<double> b;
};

inline ProductMinimum product_state_minimum(const HermMatrix& m,
                                            std::uint64_t seed = 0) {
  const auto qubit = [](double theta, double phi) {
    ComplexVector<double> v(2);
    v[0] = std::cos(theta);
    v[1] = std::polar(std::sin(theta), phi);
    return v;
  };
  const auto pair_value = [&](const ComplexVector<double>& a,
                              const ComplexVector<double>& b) {
    ComplexVector<double> v(4);
    v << a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1];
    return (v.adjoint() * m.mat() * v)(0, 0).real();
  };

  // Contraction of m against one side, leaving a 2x2 operator on the other.
  const auto contract_a = [&](const ComplexVector<double>& a) {
    ComplexMatrix<double> out(2, 2);
    for (Eigen::Index k = 0; k < 2; ++k)
      for (Eigen::Index l = 0; l < 2; ++l) {
        std::complex<double> s = 0;
        for (Eigen::Index i = 0; i < 2; ++i)
          for (Eigen::Index j = 0; j < 2; ++j)
            s += std::conj(a[i]) * a[j] * m(2 * i + k, 2 * j + l);
        out(k, l) = s;
      }
    return HermMatrix((out + out.adjoint()) / 2.0);
  };
  const auto contract_b = [&](const ComplexVector<double>& b) {
    ComplexMatrix<double> out(2, 2);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) {
        std::complex<double> s = 0;
        for (Eigen::Index k = 0; k < 2; ++k)
          for (Eigen::Index l = 0; l < 2; ++l)
            s += std::conj(b[k]) * b[l] * m(2 * i + k, 2 * j + l);
        out(i, j) = s;
      }
    return HermMatrix((out + out.adjoint()) / 2.0);
  };

  const auto refine = [&](ComplexVector<double> a, ComplexVector<double> b) {
    double value = pair_value(a, b);
    for (int it = 0; it < 40; ++it) {
      const auto sb = spectral_decompose(contract_a(a));
      b = sb.eigenvectors.col(0);
      const auto sa = spectral_decompose(contract_b(b));
      a = sa.eigenvectors.col(0);
      const double next = pair_value(a, b);
      if (value - next < 1e-14) {
        value = next;
        break;
      }
      value = next;
    }
    return ProductMinimum{value, a, b};
  };

  constexpr int kSteps = 12;
  ProductMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  for (int ta = 0; ta < kSteps; ++ta)
    for (int pa = 0; pa < kSteps; ++pa)
      for (int tb = 0; tb < kSteps; ++tb)
        for (int pb = 0; pb < kSteps; ++pb) {
          const auto a =
              qubit(ta * M_PI / (2 * kSteps), pa * 2 * M_PI / kSteps);
          const auto b =
              qubit(tb * M_PI / (2 * kSteps), pb * 2 * M_PI / kSteps);
          const double v = pair_value(a, b);
          if (v < best.value) best = ProductMinimum{v, a, b};
        }

  best = refine(best.a, best.b);
  Rng rng(seed);
  for (int restart = 0; restart < 8; ++restart) {
    const auto cand =
        refine(random_state_vector(2, rng), random_state_vector(2, rng));
    if (cand.value < best.value) best = cand;
  }
  return best;
}

/// Tries to write m = P + partial_transpose(Q) with P, Q PSD by alternating
/// PSD projections of the two blocks. Exact coverage of the two-qubit dual
/// cone: every block-positive operator there is decomposable.
inline std::optional<std::pair<HermMatrix, HermMatrix>> decompose_ppt_sum(
    const HermMatrix& m, double tol, int max_iter = 600) {
  const double scale = std::max(1.0, hs_norm(m));
  HermMatrix q = positive_negative_parts(partial_transpose(m, 2, 2)).first;
  HermMatrix p = zero_herm<double>(4);
  for (int it = 0; it < max_iter; ++it) {
    p = positive_negative_parts(m - partial_transpose(q, 2, 2)).first;
    q = positive_negative_parts(partial_transpose(m - p, 2, 2)).first;
    const double res = hs_norm(m - p - partial_transpose(q, 2, 2));
    if (res <= tol * scale) {
      return std::make_pair(p, q);
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline Cone Cone::from_generators(std::vector<HermMatrix> generators,
                                  double tol) {
  if (generators.empty()) {
    throw ValidationError(ValidationError::Kind::BadGenerator,
                          "generator cone needs at least one generator");
  }
  const Eigen::Index d = generators.front().dim();
  Cone cone(Variant::Generator, d, std::move(generators), tol);
  cone.unit_generators_.reserve(cone.generators_.size());
  for (size_t i = 0; i < cone.generators_.size(); ++i) {
    const auto& g = cone.generators_[i];
    if (g.dim() != d) {
      throw ShapeError("generator cone: mixed dimensions");
    }
    const double norm = hs_norm(g);
    if (norm <= 1e-14) {
      throw ValidationError(ValidationError::Kind::BadGenerator,
                            "generator " + std::to_string(i) + " is zero");
    }
    cone.unit_generators_.emplace_back(g.mat() / norm);
  }
  const Eigen::Index ng = Eigen::Index(cone.unit_generators_.size());
  cone.gram_.resize(ng, ng);
  for (Eigen::Index i = 0; i < ng; ++i)
    for (Eigen::Index j = 0; j < ng; ++j)
      cone.gram_(i, j) = hs_inner(cone.unit_generators_[size_t(i)],
                                  cone.unit_generators_[size_t(j)]);

  // Pointedness spot check: no probe may be a member together with its
  // negation. Probes are the generators themselves plus their mean.
  std::vector<HermMatrix> probes;
  for (size_t i = 0; i < cone.unit_generators_.size() && i < 8; ++i) {
    probes.push_back(cone.unit_generators_[i]);
  }
  ComplexMatrix<double> mean = ComplexMatrix<double>::Zero(d, d);
  for (const auto& g : cone.unit_generators_) mean += g.mat();
  probes.emplace_back(mean / double(cone.unit_generators_.size()));
  for (const auto& probe : probes) {
    if (cone_membership(cone, HermMatrix(-probe.mat())).in()) {
      throw ValidationError(ValidationError::Kind::NotPointed,
                            "generator cone is not pointed");
    }
  }
  return cone;
}

/// Primal membership. Psd: spectral test, exact. Sep22: PSD plus positive
/// partial transpose, exact at 2x2. Generator: nonnegative least-squares
/// fit; small-but-nonzero residuals give Unknown rather than Out unless a
/// separating functional certifies the rejection.
inline MembershipVerdict cone_membership(const Cone& cone,
                                         const HermMatrix& x) {
  if (x.dim() != cone.dim()) {
    throw ShapeError("cone_membership: dimension mismatch");
  }
  const double tol = cone.tolerance();
  const double scale = std::max(1.0, hs_norm(x));
  MembershipVerdict verdict;

  switch (cone.variant()) {
    case Cone::Variant::Psd: {
      const auto sd = spectral_decompose(x);
      if (sd.eigenvalues.minCoeff() >= -tol * scale) {
        verdict.status = MembershipVerdict::Status::In;
      } else {
        verdict.status = MembershipVerdict::Status::Out;
        verdict.witness = detail::outer_projector(sd.eigenvectors.col(0));
        verdict.note = "negative eigenvalue";
      }
      return verdict;
    }
    case Cone::Variant::Sep22: {
      const auto sd = spectral_decompose(x);
      if (sd.eigenvalues.minCoeff() < -tol * scale) {
        verdict.status = MembershipVerdict::Status::Out;
        verdict.witness = detail::outer_projector(sd.eigenvectors.col(0));
        verdict.note = "negative eigenvalue";
        return verdict;
      }
      const auto pt = partial_transpose(x, 2, 2);
      const auto sd_pt = spectral_decompose(pt);
      if (sd_pt.eigenvalues.minCoeff() < -tol * scale) {
        verdict.status = MembershipVerdict::Status::Out;
        verdict.witness = partial_transpose(
            detail::outer_projector(sd_pt.eigenvectors.col(0)), 2, 2);
        verdict.note = "partial transpose has a negative eigenvalue";
        return verdict;
      }
      verdict.status = MembershipVerdict::Status::In;
      verdict.note = "ppt";
      return verdict;
    }
    case Cone::Variant::Generator: {
      const auto fit = detail::generator_fit(cone, x, tol * scale);
      if (fit.residual <= tol * scale) {
        verdict.status = MembershipVerdict::Status::In;
        verdict.coefficients = fit.coefficients;
        return verdict;
      }
      // Residual direction is the candidate separating functional.
      ComplexMatrix<double> r = -x.mat();
      const auto& gens = cone.unit_generators();
      for (size_t i = 0; i < gens.size(); ++i) {
        r += fit.coefficients[Eigen::Index(i)] * gens[i].mat();
      }
      if (r.norm() <= tol * scale) {
        verdict.status = MembershipVerdict::Status::Unknown;
        verdict.note = "degenerate residual";
        return verdict;
      }
      const HermMatrix rhat(r / r.norm());
      bool separates = hs_inner(rhat, x) < -tol * scale &&
                       fit.residual > 10.0 * tol * scale;
      for (const auto& g : gens) {
        separates = separates && hs_inner(rhat, g) >= -tol;
      }
      if (separates) {
        verdict.status = MembershipVerdict::Status::Out;
        verdict.witness = rhat;
        verdict.note = "separating functional";
      } else {
        verdict.status = MembershipVerdict::Status::Unknown;
        verdict.note = "fit residual " + std::to_string(fit.residual);
      }
      return verdict;
    }
  }
  return verdict;
}

/// Dual membership. Psd is self-dual. Generator duals reduce to finitely
/// many pairings, exact. For Sep22 the In side looks for a decomposable
/// certificate (PSD + partial transpose of PSD) and the Out side for a
/// product state with negative pairing; anything else is Unknown.
inline MembershipVerdict dual_membership(const Cone& cone,
                                         const HermMatrix& m,
                                         std::uint64_t seed = 0) {
  if (m.dim() != cone.dim()) {
    throw ShapeError("dual_membership: dimension mismatch");
  }
  const double tol = cone.tolerance();
  const double scale = std::max(1.0, hs_norm(m));
  MembershipVerdict verdict;

  switch (cone.variant()) {
    case Cone::Variant::Psd:
      return cone_membership(cone, m);
    case Cone::Variant::Generator: {
      const auto& gens = cone.unit_generators();
      for (size_t i = 0; i < gens.size(); ++i) {
        const double pairing = hs_inner(m, gens[i]);
        if (pairing < -tol * scale) {
          verdict.status = MembershipVerdict::Status::Out;
          verdict.witness = gens[i];
          verdict.note = "negative pairing with generator " +
                         std::to_string(i);
          return verdict;
        }
      }
      verdict.status = MembershipVerdict::Status::In;
      return verdict;
    }
    case Cone::Variant::Sep22: {
      const auto sd = spectral_decompose(m);
      if (sd.eigenvalues.minCoeff() >= -tol * scale) {
        verdict.status = MembershipVerdict::Status::In;
        verdict.decomposition = std::make_pair(m, zero_herm<double>(4));
        verdict.note = "psd";
        return verdict;
      }
      const auto pt = partial_transpose(m, 2, 2);
      if (min_eigenvalue(pt) >= -tol * scale) {
        verdict.status = MembershipVerdict::Status::In;
        verdict.decomposition = std::make_pair(zero_herm<double>(4), pt);
        verdict.note = "partial transpose of psd";
        return verdict;
      }
      if (auto dec = detail::decompose_ppt_sum(m, tol)) {
        verdict.status = MembershipVerdict::Status::In;
        verdict.decomposition = dec;
        verdict.note = "decomposable";
        return verdict;
      }
      const auto minimum = detail::product_state_minimum(m, seed);
      if (minimum.value < -tol * scale) {
        ComplexVector<double> v(4);
        v << minimum.a[0] * minimum.b[0], minimum.a[0] * minimum.b[1],
            minimum.a[1] * minimum.b[0], minimum.a[1] * minimum.b[1];
        verdict.status = MembershipVerdict::Status::Out;
        verdict.witness = detail::outer_projector(v);
        verdict.note = "product state with negative pairing";
        return verdict;
      }
      verdict.status = MembershipVerdict::Status::Unknown;
      verdict.note = "no decomposable certificate, no negative product state";
      return verdict;
    }
  }
  return verdict;
}

namespace detail {

inline bool ball_probe_passes(const Cone& cone, const HermMatrix& x0,
                              double radius,
                              const std::vector<HermMatrix>& directions) {
  for (const auto& dir : directions) {
    if (!cone_membership(cone, HermMatrix(x0.mat() + radius * dir.mat()))
             .in()) {
      return false;
    }
    if (!cone_membership(cone, HermMatrix(x0.mat() - radius * dir.mat()))
             .in()) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Certified interior point: a cone element x0 and a radius eps such that
/// the Hilbert-Schmidt ball of radius eps around x0 stays in the cone. The
/// Psd radius is exact (the smallest eigenvalue); Sep22 and generator cones
/// use probe-set certification over seeded directions.
inline InteriorPoint interior_point(const Cone& cone, std::uint64_t seed = 0,
                                    int probes = 24) {
  const Eigen::Index d = cone.dim();
  switch (cone.variant()) {
    case Cone::Variant::Psd: {
      return {HermMatrix(ComplexMatrix<double>::Identity(d, d) / double(d)),
              1.0 / double(d)};
    }
    case Cone::Variant::Sep22: {
      Rng rng(seed);
      std::vector<HermMatrix> directions;
      for (int k = 0; k < probes; ++k) {
        directions.push_back(random_direction(4, rng));
      }
      // The hardest directions lean toward entangled projectors.
      for (int k = 0; k < 8; ++k) {
        const auto p = random_pure_projector(4, rng);
        const HermMatrix lean(p.mat() -
                              ComplexMatrix<double>::Identity(4, 4) / 4.0);
        directions.emplace_back(lean.mat() / hs_norm(lean));
      }
      const HermMatrix x0(ComplexMatrix<double>::Identity(4, 4));
      double radius = 0.45;
      for (int attempt = 0; attempt < 30; ++attempt) {
        if (detail::ball_probe_passes(cone, x0, radius, directions)) {
          return {x0, radius};
        }
        radius *= 0.5;
      }
      throw InteriorityError("interior_point: certification failed (sep22)");
    }
    case Cone::Variant::Generator: {
      const auto& gens = cone.unit_generators();
      // Span check first: a cone whose generators do not span the space has
      // empty interior and every probe set would fail.
      Eigen::MatrixXd coords(d * d, Eigen::Index(gens.size()));
      for (size_t i = 0; i < gens.size(); ++i) {
        coords.col(Eigen::Index(i)) = herm_to_coords(gens[i]);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(coords);
      const auto& sing = svd.singularValues();
      if (sing.size() < d * d || sing[d * d - 1] < 1e-10 * sing[0]) {
        throw InteriorityError(
            "interior_point: generators do not span the space");
      }
      ComplexMatrix<double> mean = ComplexMatrix<double>::Zero(d, d);
      for (const auto& g : gens) mean += g.mat();
      const HermMatrix x0(mean / double(gens.size()));
      Rng rng(seed);
      std::vector<HermMatrix> directions;
      for (int k = 0; k < probes; ++k) {
        directions.push_back(random_direction(d, rng));
      }
      double radius = 0.5 * hs_norm(x0);
      for (int attempt = 0; attempt < 40; ++attempt) {
        if (detail::ball_probe_passes(cone, x0, radius, directions)) {
          return {x0, radius};
        }
        radius *= 0.5;
      }
      throw InteriorityError(
          "interior_point: probe certification failed (generator cone)");
    }
  }
  throw InteriorityError("interior_point: unreachable");
}

/// True iff the projectors of the decomposition's product vectors sum to x.
inline bool verify_product_decomposition(const HermMatrix& x,
                                         const ProductDecomposition& dec) {
  if (dec.vectors.empty()) return false;
  ComplexMatrix<double> acc =
      ComplexMatrix<double>::Zero(x.dim(), x.dim());
  for (const auto& pv : dec.vectors) {
    if (pv.a.size() * pv.b.size() != x.dim()) {
      throw ShapeError("product decomposition: factor dimensions mismatch");
    }
    ComplexVector<double> v(x.dim());
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < pv.a.size(); ++i)
      for (Eigen::Index k = 0; k < pv.b.size(); ++k) v[idx++] = pv.a[i] * pv.b[k];
    acc += v * v.adjoint();
  }
  return (acc - x.mat()).norm() <= 1e-10;
}

}  // namespace gptd
