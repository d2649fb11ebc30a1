#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "gptd/cone.hpp"
#include "gptd/errors.hpp"
#include "gptd/hermitian.hpp"
#include "gptd/model.hpp"
#include "gptd/simplex.hpp"

namespace gptd {

/// A binary hypothesis: rho0 with prior p, rho1 with prior 1-p.
struct DiscriminationInstance {
  State rho0;
  State rho1;
  double p;

  DiscriminationInstance(State r0, State r1, double prior)
      : rho0(std::move(r0)), rho1(std::move(r1)), p(prior) {
    if (rho0.dim() != rho1.dim()) {
      throw ShapeError("instance: states of different dimension");
    }
    if (!(p > 0.0 && p < 1.0)) {
      throw PreconditionError("instance: prior must lie strictly in (0,1)",
                              p);
    }
  }

  HermMatrix weighted_difference() const {
    return HermMatrix(p * rho0.matrix().mat() -
                      (1.0 - p) * rho1.matrix().mat());
  }
};

struct SpectralStats {
  double r = 0.0;         // lambda_max(M0) - lambda_min(M0)
  double r_prime0 = 0.0;  // lambda_max(M0) + lambda_min(M0)
  double r_prime1 = 0.0;  // lambda_max(M1) + lambda_min(M1)
};

struct BoundReport {
  double err = 0.0;
  double helstrom_rhs = 0.0;
  double general_rhs = 0.0;
  double r = 0.0;
  double r_prime0 = 0.0;
  double r_prime1 = 0.0;
  bool equality_holds = false;
  bool violates_quantum = false;
  double margin = 0.0;  // helstrom_rhs - err
};

/// Diagnostics for the tightness condition of the general bound: both range
/// inclusions with their subspace residuals.
struct EqualityReport {
  bool holds = false;
  ComplexMatrix<double> psi_plus_dirs;   // range basis of the positive part
  ComplexMatrix<double> psi_minus_dirs;  // range basis of the negative part
  ComplexMatrix<double> max_eigenspace;  // top eigenspace of M0
  ComplexMatrix<double> min_eigenspace;  // bottom eigenspace of M0
  double residual_plus = 0.0;
  double residual_minus = 0.0;
};

/// An explicit tuple beating the quantum bound: states, measurement, both
/// bound values, the step delta along the extreme-eigenvector direction and
/// the certified interior point it was taken from.
struct AdvantageCertificate {
  State rho0;
  State rho1;
  Measurement meas;
  double err = 0.0;
  double helstrom_rhs = 0.0;
  double delta = 0.0;
  HermMatrix x0;
  double margin = 0.0;
};

struct NormResult {
  double value = 0.0;
  bool exact = false;
  std::optional<HermMatrix> effect;  // maximizer, when available
};

namespace detail {

inline void require_two_outcomes(const Measurement& meas) {
  if (meas.size() != 2) {
    throw PreconditionError("operation requires a two-outcome measurement",
                            double(meas.size()));
  }
}

}  // namespace detail

/// Total error probability p Tr(rho0 M1) + (1-p) Tr(rho1 M0).
inline double error_probability(const DiscriminationInstance& inst,
                                const Measurement& meas) {
  detail::require_two_outcomes(meas);
  const double raw =
      inst.p * hs_inner(inst.rho0.matrix(), meas.effects()[1]) +
      (1.0 - inst.p) * hs_inner(inst.rho1.matrix(), meas.effects()[0]);
  if (raw < -1e-10 || raw > 1.0 + 1e-10) {
    throw OracleError("error_probability outside [0,1]");
  }
  return std::clamp(raw, 0.0, 1.0);
}

/// Minimum-error bound for positive-operator measurements:
/// 1/2 - 1/2 ||p rho0 - (1-p) rho1||_1.
inline double helstrom_bound(const DiscriminationInstance& inst) {
  return 0.5 - 0.5 * trace_norm(inst.weighted_difference());
}

/// Two-outcome positive-operator measurement attaining the minimum-error
/// bound: accept on the complement of the strictly negative subspace of the
/// weighted difference, so identical hypotheses yield {I, 0}. Validated
/// against the Psd model of the instance dimension.
inline Measurement helstrom_optimal_measurement(
    const DiscriminationInstance& inst) {
  const auto sd = spectral_decompose(inst.weighted_difference());
  const Eigen::Index d = inst.rho0.dim();
  ComplexMatrix<double> neg = ComplexMatrix<double>::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (sd.eigenvalues[k] < 0.0) {
      neg += sd.eigenvectors.col(k) * sd.eigenvectors.col(k).adjoint();
    }
  }
  const HermMatrix m0(ComplexMatrix<double>::Identity(d, d) - neg);
  const HermMatrix m1(neg);
  return validate_measurement(GptModel::psd(d), {m0, m1});
}

/// Eigenvalue spread and sums of a two-outcome measurement. The spread is
/// the same computed from either effect; the sums obey r'(0) + r'(1) = 2.
inline SpectralStats measurement_spectral_stats(const Measurement& meas) {
  detail::require_two_outcomes(meas);
  const auto sd0 = spectral_decompose(meas.effects()[0]);
  const auto sd1 = spectral_decompose(meas.effects()[1]);
  SpectralStats stats;
  const double lo0 = sd0.eigenvalues.minCoeff();
  const double hi0 = sd0.eigenvalues.maxCoeff();
  const double lo1 = sd1.eigenvalues.minCoeff();
  const double hi1 = sd1.eigenvalues.maxCoeff();
  stats.r = hi0 - lo0;
  stats.r_prime0 = hi0 + lo0;
  stats.r_prime1 = hi1 + lo1;
  if (std::abs((hi1 - lo1) - stats.r) > 1e-10) {
    throw OracleError("spectral spread differs between the two effects");
  }
  return stats;
}

/// Error bound valid for arbitrary cone measurements:
/// 1/2 - 1/2 ||p rho0 - (1-p) rho1||_1 r - 1/2 (2p-1) (r'(0) - 1).
inline double general_bound(const DiscriminationInstance& inst,
                            const Measurement& meas) {
  const auto stats = measurement_spectral_stats(meas);
  return 0.5 - 0.5 * trace_norm(inst.weighted_difference()) * stats.r -
         0.5 * (2.0 * inst.p - 1.0) * (stats.r_prime0 - 1.0);
}

/// Checks the tightness condition of the general bound: the range of the
/// positive part of the weighted difference must lie in the top eigenspace
/// of M0 and the range of the negative part in the bottom eigenspace.
inline EqualityReport equality_condition(const DiscriminationInstance& inst,
                                         const Measurement& meas,
                                         double tol = 1e-8) {
  detail::require_two_outcomes(meas);
  const auto diff = inst.weighted_difference();
  const auto sd_diff = spectral_decompose(diff);
  const auto sd_m0 = spectral_decompose(meas.effects()[0]);
  const Eigen::Index d = diff.dim();

  const double rank_tol = 1e-9 * std::max(1.0, hs_norm(diff));
  std::vector<Eigen::Index> plus_idx, minus_idx;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (sd_diff.eigenvalues[k] > rank_tol) plus_idx.push_back(k);
    if (sd_diff.eigenvalues[k] < -rank_tol) minus_idx.push_back(k);
  }

  EqualityReport report;
  report.psi_plus_dirs.resize(d, Eigen::Index(plus_idx.size()));
  for (size_t c = 0; c < plus_idx.size(); ++c) {
    report.psi_plus_dirs.col(Eigen::Index(c)) =
        sd_diff.eigenvectors.col(plus_idx[c]);
  }
  report.psi_minus_dirs.resize(d, Eigen::Index(minus_idx.size()));
  for (size_t c = 0; c < minus_idx.size(); ++c) {
    report.psi_minus_dirs.col(Eigen::Index(c)) =
        sd_diff.eigenvectors.col(minus_idx[c]);
  }

  const auto top_group = sd_m0.groups.back();
  const auto bottom_group = sd_m0.groups.front();
  report.max_eigenspace = sd_m0.eigenvectors.middleCols(
      top_group.first, top_group.second - top_group.first);
  report.min_eigenspace = sd_m0.eigenvectors.middleCols(
      bottom_group.first, bottom_group.second - bottom_group.first);

  const auto containment_residual = [](const ComplexMatrix<double>& dirs,
                                       const ComplexMatrix<double>& space) {
    if (dirs.cols() == 0) return 0.0;
    const ComplexMatrix<double> proj = space * space.adjoint();
    double worst = 0.0;
    for (Eigen::Index c = 0; c < dirs.cols(); ++c) {
      worst = std::max(worst, (dirs.col(c) - proj * dirs.col(c)).norm());
    }
    return worst;
  };
  report.residual_plus =
      containment_residual(report.psi_plus_dirs, report.max_eigenspace);
  report.residual_minus =
      containment_residual(report.psi_minus_dirs, report.min_eigenspace);
  report.holds = report.residual_plus <= tol && report.residual_minus <= tol;
  return report;
}

/// Evaluates both bounds, the spectral statistics and the equality
/// condition, and flags a strict violation of the quantum bound.
inline BoundReport check_violation(const DiscriminationInstance& inst,
                                   const Measurement& meas) {
  const auto stats = measurement_spectral_stats(meas);
  BoundReport report;
  report.err = error_probability(inst, meas);
  report.helstrom_rhs = helstrom_bound(inst);
  report.general_rhs = general_bound(inst, meas);
  report.r = stats.r;
  report.r_prime0 = stats.r_prime0;
  report.r_prime1 = stats.r_prime1;
  report.equality_holds = equality_condition(inst, meas).holds;
  report.margin = report.helstrom_rhs - report.err;
  report.violates_quantum = report.err < report.helstrom_rhs - 1e-10;
  if (report.general_rhs > report.err + 1e-9) {
    throw OracleError("general bound exceeded the evaluated error");
  }
  return report;
}

/// Builds a state pair beating the quantum bound for a measurement with
/// eigenvalue spread above 1. Starting from a certified interior point x0,
/// steps along D = P_max - P_min (projectors onto extreme eigenvectors of
/// M0) as far as both x0 +/- delta D stay in the cone, shrinks by `safety`
/// and normalizes. At p = 1/2 the resulting margin is delta (r-1) / Tr x0.
inline AdvantageCertificate construct_advantage(const GptModel& model,
                                                const Measurement& meas,
                                                double safety = 0.99,
                                                std::uint64_t seed = 0) {
  detail::require_two_outcomes(meas);
  const auto stats = measurement_spectral_stats(meas);
  if (!(stats.r > 1.0 + 1e-9)) {
    throw PreconditionError(
        "construct_advantage: eigenvalue spread must exceed 1", stats.r);
  }
  if (!(safety > 0.0 && safety < 1.0)) {
    throw PreconditionError("construct_advantage: safety must be in (0,1)",
                            safety);
  }

  const auto ip = interior_point(model.cone, seed);
  const auto sd = spectral_decompose(meas.effects()[0]);
  const auto v_min = sd.eigenvectors.col(sd.groups.front().first);
  const auto v_max = sd.eigenvectors.col(sd.groups.back().first);
  const HermMatrix direction(v_max * v_max.adjoint() -
                             v_min * v_min.adjoint());

  const auto both_members = [&](double delta) {
    return cone_membership(model.cone,
                           HermMatrix(ip.x0.mat() + delta * direction.mat()))
               .in() &&
           cone_membership(model.cone,
                           HermMatrix(ip.x0.mat() - delta * direction.mat()))
               .in();
  };

  // The certified ball guarantees feasibility at delta = radius / ||D||.
  double lo = ip.radius / hs_norm(direction);
  if (!both_members(lo)) {
    throw OracleError("construct_advantage: certified radius not confirmed");
  }
  double hi = lo;
  for (int k = 0; k < 60 && both_members(hi * 2.0); ++k) hi *= 2.0;
  hi *= 2.0;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (both_members(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double delta = lo * safety;

  const double trace_x0 = ip.x0.trace();
  AdvantageCertificate cert{
      validate_state(model, HermMatrix((ip.x0.mat() +
                                        delta * direction.mat()) /
                                       trace_x0)),
      validate_state(model, HermMatrix((ip.x0.mat() -
                                        delta * direction.mat()) /
                                       trace_x0)),
      meas,
      0.0,
      0.0,
      delta,
      ip.x0,
      0.0};
  const DiscriminationInstance inst(cert.rho0, cert.rho1, 0.5);
  cert.err = error_probability(inst, meas);
  cert.helstrom_rhs = helstrom_bound(inst);
  cert.margin = cert.helstrom_rhs - cert.err;
  if (cert.margin < 1e-12) {
    throw OracleError("construct_advantage: margin vanished numerically");
  }
  return cert;
}

/// Discrimination norm: the largest effect-value gap max Tr e (rho0 - rho1)
/// over two-outcome measurements {e, I-e} of the model. Exact for Psd
/// (half the trace norm of the difference) and for generator cones (linear
/// program over the polyhedral dual slab); a certified lower bound from
/// candidate effects otherwise.
inline NormResult distinguishability_norm(const GptModel& model,
                                          const State& rho0,
                                          const State& rho1) {
  const HermMatrix diff(rho0.matrix().mat() - rho1.matrix().mat());
  const Eigen::Index d = model.dim;

  switch (model.cone.variant()) {
    case Cone::Variant::Psd: {
      return {positive_negative_parts(diff).first.trace(), true,
              std::nullopt};
    }
    case Cone::Variant::Generator: {
      const auto basis = hermitian_onb<double>(d);
      const Eigen::Index n = d * d;
      const auto& gens = model.cone.unit_generators();
      const Eigen::Index m = Eigen::Index(gens.size());
      Eigen::MatrixXd pair_rows(m, n);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
          pair_rows(i, k) = hs_inner(basis[size_t(k)], gens[size_t(i)]);
      Eigen::MatrixXd a(2 * m, n);
      a.topRows(m) = -pair_rows;   // <e, g_i> >= 0
      a.bottomRows(m) = pair_rows;  // <e, g_i> <= <I, g_i>
      Eigen::VectorXd b(2 * m);
      b.head(m).setZero();
      for (Eigen::Index i = 0; i < m; ++i) {
        b[m + i] = gens[size_t(i)].trace();
      }
      if (b.minCoeff() < 0.0) {
        throw OracleError(
            "distinguishability_norm: generator with negative trace");
      }
      Eigen::VectorXd c(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        c[k] = hs_inner(basis[size_t(k)], diff);
      }
      const auto lp = simplex_maximize(c, a, b);
      if (lp.status != LpResult::Status::Optimal) {
        throw OracleError(
            "distinguishability_norm: dual slab is unbounded or degenerate");
      }
      return {lp.objective, true, coords_to_herm(lp.x, d)};
    }
    case Cone::Variant::Sep22: {
      // Candidate effects, each checked for feasibility through the dual
      // oracle; the best feasible pairing is a certified lower bound.
      const auto feasible = [&](const HermMatrix& e) {
        return dual_membership(model.cone, e).in() &&
               dual_membership(model.cone,
                               HermMatrix(identity(d).mat() - e.mat()))
                   .in();
      };
      NormResult best{0.0, false, std::nullopt};
      const auto consider = [&](const HermMatrix& e) {
        if (!feasible(e)) return;
        const double value = hs_inner(e, diff);
        if (value > best.value) {
          best.value = value;
          best.effect = e;
        }
      };

      const auto sd_diff = spectral_decompose(diff);
      ComplexMatrix<double> plus_range = ComplexMatrix<double>::Zero(d, d);
      ComplexMatrix<double> minus_range = ComplexMatrix<double>::Zero(d, d);
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto proj = (sd_diff.eigenvectors.col(k) *
                           sd_diff.eigenvectors.col(k).adjoint())
                              .eval();
        if (sd_diff.eigenvalues[k] > 1e-12) plus_range += proj;
        if (sd_diff.eigenvalues[k] < -1e-12) minus_range += proj;
      }
      consider(HermMatrix(plus_range));

      // Rays from a feasible base: bisect the largest feasible step.
      const auto ray_search = [&](const HermMatrix& base,
                                  const HermMatrix& dir) {
        const auto at = [&](double t) {
          return HermMatrix(base.mat() + t * dir.mat());
        };
        if (!feasible(at(0.0))) return;
        double lo = 0.0, hi = 1.0;
        while (feasible(at(hi)) && hi < 64.0) hi *= 2.0;
        for (int k = 0; k < 40; ++k) {
          const double mid = 0.5 * (lo + hi);
          (feasible(at(mid)) ? lo : hi) = mid;
        }
        consider(at(lo));
      };

      Eigen::Matrix4cd swap;
      swap << 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1;
      consider(HermMatrix(swap));
      consider(HermMatrix((swap + Eigen::Matrix4cd::Identity()) / 2.0));
      const HermMatrix zero4 = zero_herm<double>(4);
      ray_search(zero4, HermMatrix(swap));
      ray_search(zero4, HermMatrix(-swap));
      // Spectral clipping of the sign observable of the difference.
      const HermMatrix half_identity(Eigen::Matrix4cd::Identity() / 2.0);
      ray_search(half_identity, HermMatrix(plus_range - minus_range));
      return best;
    }
  }
  throw OracleError("distinguishability_norm: unreachable");
}

struct SepExample {
  GptModel model;
  DiscriminationInstance instance;
  Measurement meas;
};

/// The built-in two-qubit separable tuple: rho0 with the 1/8-scaled central
/// block, rho1 the maximally mixed state, prior 1/2, and the swap-structured
/// two-outcome measurement. Every validation passes and the tuple beats the
/// quantum bound with margin 1/16.
inline SepExample sep_example(double tol = kDefaultTol) {
  GptModel model = GptModel::sep22(tol);
  Eigen::Matrix4cd r0;
  r0 << 2, 0, 0, 0,
        0, 2, 1, 0,
        0, 1, 2, 0,
        0, 0, 0, 2;
  const State rho0 = validate_state(model, HermMatrix(r0 / 8.0));
  const State rho1 =
      validate_state(model, HermMatrix(Eigen::Matrix4cd::Identity() / 4.0));
  Eigen::Matrix4cd m0;
  m0 << 1, 0, 0, 0,
        0, 0, 1, 0,
        0, 1, 0, 0,
        0, 0, 0, 1;
  Eigen::Matrix4cd m1;
  m1 << 0, 0, 0, 0,
        0, 1, -1, 0,
        0, -1, 1, 0,
        0, 0, 0, 0;
  Measurement meas =
      validate_measurement(model, {HermMatrix(m0), HermMatrix(m1)});
  return SepExample{std::move(model),
                    DiscriminationInstance(rho0, rho1, 0.5),
                    std::move(meas)};
}

}  // namespace gptd
