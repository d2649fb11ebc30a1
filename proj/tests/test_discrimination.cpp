#include <doctest.h>

#include <cmath>
#include <vector>

#include "gptd/discrimination.hpp"
#include "gptd/sampling.hpp"
#include "test_matrices.hpp"

using namespace gptd;

namespace {

HermMatrix diag2(double a, double b) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return HermMatrix(m);
}

// Balanced contraction of a spanning qubit projector family; the resulting
// cone sits strictly inside the positive semidefinite cone.
GptModel contracted_qubit_model(double lambda) {
  Eigen::Matrix2cd plus;
  plus << 0.5, 0.5, 0.5, 0.5;
  Eigen::Matrix2cd yplus;
  yplus << 0.5, std::complex<double>(0, -0.5), std::complex<double>(0, 0.5),
      0.5;
  std::vector<HermMatrix> gens = {diag2(1, 0), diag2(0, 1), HermMatrix(plus),
                                  HermMatrix(yplus)};
  std::vector<HermMatrix> contracted;
  for (const auto& g : gens) {
    contracted.emplace_back((1.0 - lambda) * g.mat() +
                            lambda * g.trace() *
                                Eigen::Matrix2cd::Identity() / 2.0);
  }
  return GptModel::from_generators(contracted);
}

Measurement random_qubit_povm(Rng& rng, const GptModel& psd2) {
  const auto e = random_psd_effect(2, rng);
  return validate_measurement(
      psd2, {e, HermMatrix(identity(2).mat() - e.mat())});
}

// Projective two-outcome qubit measurement along a Bloch direction.
Measurement bloch_projective(double theta, double phi, const GptModel& psd2) {
  ComplexVector<double> v(2);
  v << std::cos(theta / 2.0),
      std::polar(std::sin(theta / 2.0), phi);
  const HermMatrix p(v * v.adjoint());
  return validate_measurement(
      psd2, {p, HermMatrix(identity(2).mat() - p.mat())});
}

}  // namespace

TEST_CASE("built-in separable example reproduces its published values") {
  const auto ex = sep_example();
  CHECK(std::abs(error_probability(ex.instance, ex.meas) - 3.0 / 8.0) <
        1e-12);
  CHECK(std::abs(helstrom_bound(ex.instance) - 7.0 / 16.0) < 1e-12);
  const auto stats = measurement_spectral_stats(ex.meas);
  CHECK(std::abs(stats.r - 2.0) < 1e-12);
  CHECK(std::abs(stats.r_prime0 - 0.0) < 1e-12);
  CHECK(std::abs(stats.r_prime1 - 2.0) < 1e-12);
  CHECK(std::abs(general_bound(ex.instance, ex.meas) - 3.0 / 8.0) < 1e-12);
  CHECK(equality_condition(ex.instance, ex.meas).holds);

  const auto report = check_violation(ex.instance, ex.meas);
  CHECK(report.violates_quantum);
  CHECK(std::abs(report.margin - 1.0 / 16.0) < 1e-12);
}

TEST_CASE("error probability basics") {
  const auto psd2 = GptModel::psd(2);
  const auto rho = validate_state(psd2, diag2(0.5, 0.5));
  const DiscriminationInstance same(rho, rho, 0.5);
  const auto trivial =
      validate_measurement(psd2, {identity(2), zero_herm<double>(2)});
  CHECK(error_probability(same, trivial) == doctest::Approx(0.5));

  const auto r0 = validate_state(psd2, diag2(1.0, 0.0));
  const auto r1 = validate_state(psd2, diag2(0.0, 1.0));
  const auto projective = validate_measurement(
      psd2, {diag2(1.0, 0.0), diag2(0.0, 1.0)});
  CHECK(error_probability(DiscriminationInstance(r0, r1, 0.5), projective) ==
        doctest::Approx(0.0));

  const auto three = validate_measurement(
      psd2, {diag2(0.5, 0.0), diag2(0.5, 0.0), diag2(0.0, 1.0)});
  CHECK_THROWS_AS(error_probability(same, three), PreconditionError);

  CHECK_THROWS_AS(DiscriminationInstance(r0, r1, 0.0), PreconditionError);
  CHECK_THROWS_AS(DiscriminationInstance(r0, r1, 1.0), PreconditionError);
}

TEST_CASE("helstrom bound against a projective grid") {
  const auto psd2 = GptModel::psd(2);
  const auto rho = validate_state(psd2, diag2(0.3, 0.7));
  CHECK(helstrom_bound(DiscriminationInstance(rho, rho, 0.5)) ==
        doctest::Approx(0.5));

  Rng rng(61);
  std::uniform_real_distribution<double> prior(0.2, 0.8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r0 = validate_state(psd2, random_density(2, rng));
    const auto r1 = validate_state(psd2, random_density(2, rng));
    const DiscriminationInstance inst(r0, r1, prior(rng));
    const double bound = helstrom_bound(inst);

    // Plain-arithmetic oracle over a fine grid of accept projectors, with
    // the two trivial measurements included for skewed priors.
    const auto grid_error = [&](const HermMatrix& p) {
      return inst.p * (1.0 - hs_inner(r0.matrix(), p)) +
             (1.0 - inst.p) * hs_inner(r1.matrix(), p);
    };
    double best = std::min(grid_error(identity(2)),
                           grid_error(zero_herm<double>(2)));
    for (int a = 0; a <= 300; ++a) {
      for (int b = 0; b < 300; ++b) {
        const double theta = a * M_PI / 300.0;
        const double phi = b * 2.0 * M_PI / 300.0;
        ComplexVector<double> v(2);
        v << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
        const HermMatrix p(v * v.adjoint());
        best = std::min({best, grid_error(p),
                         grid_error(HermMatrix(identity(2).mat() - p.mat()))});
      }
    }
    CHECK(best >= bound - 1e-12);
    CHECK(best <= bound + 1e-4);
  }
}

TEST_CASE("helstrom-optimal measurement") {
  const auto psd2 = GptModel::psd(2);
  const auto r0 = validate_state(psd2, diag2(0.9, 0.1));
  const auto r1 = validate_state(psd2, diag2(0.1, 0.9));
  const DiscriminationInstance inst(r0, r1, 0.5);
  const auto meas = helstrom_optimal_measurement(inst);
  CHECK(hs_norm(meas.effects()[0] - diag2(1.0, 0.0)) <= 1e-10);
  CHECK(error_probability(inst, meas) == doctest::Approx(0.1));

  SUBCASE("identical full-rank hypotheses give the trivial measurement") {
    const auto rho = validate_state(psd2, diag2(0.6, 0.4));
    const DiscriminationInstance same(rho, rho, 0.5);
    const auto trivial = helstrom_optimal_measurement(same);
    CHECK(hs_norm(trivial.effects()[0] - identity(2)) <= 1e-12);
    CHECK(error_probability(same, trivial) == doctest::Approx(0.5));
  }

  SUBCASE("identical hypotheses at skewed priors still attain min(p,1-p)") {
    const auto rho = validate_state(psd2, diag2(0.6, 0.4));
    for (double p : {0.2, 0.7}) {
      const DiscriminationInstance same(rho, rho, p);
      const auto m = helstrom_optimal_measurement(same);
      CHECK(error_probability(same, m) ==
            doctest::Approx(std::min(p, 1.0 - p)));
    }
  }

  SUBCASE("separable example instance inside the psd model") {
    const auto psd4 = GptModel::psd(4);
    const auto r0p = validate_state(psd4, fixtures::rho0_sep());
    const auto r1p = validate_state(psd4, fixtures::rho1_sep());
    const DiscriminationInstance inst4(r0p, r1p, 0.5);
    const auto opt = helstrom_optimal_measurement(inst4);
    CHECK(std::abs(error_probability(inst4, opt) - 7.0 / 16.0) < 1e-12);
  }

  SUBCASE("random instances attain the bound") {
    Rng rng(67);
    std::uniform_real_distribution<double> prior(0.1, 0.9);
    for (int trial = 0; trial < 40; ++trial) {
      const Eigen::Index d = 2 + trial % 3;
      const auto model = GptModel::psd(d);
      const auto a = validate_state(model, random_density(d, rng));
      const auto b = validate_state(model, random_density(d, rng));
      const DiscriminationInstance random_inst(a, b, prior(rng));
      const auto m = helstrom_optimal_measurement(random_inst);
      CHECK(std::abs(error_probability(random_inst, m) -
                     helstrom_bound(random_inst)) <= 1e-10);
    }
  }
}

TEST_CASE("measurement spectral statistics") {
  const auto ex = sep_example();
  CHECK(measurement_spectral_stats(ex.meas).r == doctest::Approx(2.0));

  const auto psd2 = GptModel::psd(2);
  const auto trivial =
      validate_measurement(psd2, {identity(2), zero_herm<double>(2)});
  const auto stats = measurement_spectral_stats(trivial);
  CHECK(stats.r == doctest::Approx(0.0));
  CHECK(stats.r_prime0 == doctest::Approx(2.0));

  const auto projector = validate_measurement(
      psd2, {diag2(1.0, 0.0), diag2(0.0, 1.0)});
  const auto pstats = measurement_spectral_stats(projector);
  CHECK(pstats.r == doctest::Approx(1.0));
  CHECK(pstats.r_prime0 == doctest::Approx(1.0));
  CHECK(pstats.r_prime1 == doctest::Approx(1.0));

  Rng rng(71);
  const auto psd3 = GptModel::psd(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = random_psd_effect(3, rng);
    const auto meas = validate_measurement(
        psd3, {e, HermMatrix(identity(3).mat() - e.mat())});
    const auto swapped = validate_measurement(
        psd3, {meas.effects()[1], meas.effects()[0]});
    const auto s = measurement_spectral_stats(meas);
    const auto t = measurement_spectral_stats(swapped);
    CHECK(std::abs(s.r - t.r) <= 1e-10);
    CHECK(std::abs(s.r_prime0 + s.r_prime1 - 2.0) <= 1e-10);
  }
}

TEST_CASE("general bound") {
  SUBCASE("trivial measurement is tight at every prior") {
    Rng rng(73);
    const auto psd2 = GptModel::psd(2);
    const auto trivial =
        validate_measurement(psd2, {identity(2), zero_herm<double>(2)});
    for (double p : {0.1, 0.4, 0.5, 0.8}) {
      const auto a = validate_state(psd2, random_density(2, rng));
      const auto b = validate_state(psd2, random_density(2, rng));
      const DiscriminationInstance inst(a, b, p);
      CHECK(std::abs(general_bound(inst, trivial) - (1.0 - p)) <= 1e-10);
      CHECK(std::abs(error_probability(inst, trivial) - (1.0 - p)) <= 1e-10);
    }
  }

  SUBCASE("positive-operator measurements never beat the quantum bound") {
    // With spectra in [0, 1] the spread stays at most 1, so at even prior
    // the chain err >= general rhs >= quantum rhs holds link by link.
    Rng rng(79);
    const auto psd2 = GptModel::psd(2);
    for (int trial = 0; trial < 50; ++trial) {
      const auto meas = random_qubit_povm(rng, psd2);
      CHECK(measurement_spectral_stats(meas).r <= 1.0 + 1e-10);
      const auto a = validate_state(psd2, random_density(2, rng));
      const auto b = validate_state(psd2, random_density(2, rng));
      const DiscriminationInstance inst(a, b, 0.5);
      CHECK(error_probability(inst, meas) >=
            general_bound(inst, meas) - 1e-10);
      CHECK(general_bound(inst, meas) >= helstrom_bound(inst) - 1e-10);
    }
  }
}

TEST_CASE("theorem-style soundness sweep") {
  Rng rng(83);
  std::uniform_real_distribution<double> prior(0.05, 0.95);
  const auto sep = GptModel::sep22();

  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    if (trial % 2 == 0) {
      const Eigen::Index d = 2 + trial % 3;
      const auto model = GptModel::psd(d);
      const auto a = validate_state(model, random_density(d, rng));
      const auto b = validate_state(model, random_density(d, rng));
      const auto e = random_psd_effect(d, rng);
      const auto meas = validate_measurement(
          model, {e, HermMatrix(identity(d).mat() - e.mat())});
      const DiscriminationInstance inst(a, b, prior(rng));
      CHECK(general_bound(inst, meas) <=
            error_probability(inst, meas) + 1e-9);
      ++checked;
    } else {
      // Separable model with a decomposable effect: a convex mix of a
      // positive operator and a partial transpose of one.
      const auto a = validate_state(
          sep, tensor_product(random_density(2, rng), random_density(2, rng)));
      const auto b = validate_state(
          sep, HermMatrix(0.5 * tensor_product(random_density(2, rng),
                                               random_density(2, rng))
                                    .mat() +
                          0.5 * tensor_product(random_density(2, rng),
                                               random_density(2, rng))
                                    .mat()));
      std::uniform_real_distribution<double> weight(0.0, 1.0);
      const double w = weight(rng);
      const auto p0 = random_psd_effect(4, rng);
      const auto q0 = random_psd_effect(4, rng);
      const HermMatrix raw(w * p0.mat() +
                           (1.0 - w) * partial_transpose(q0, 2, 2).mat());
      // Rescale into the dual slab so {m0, I - m0} is a measurement.
      const double hi = max_eigenvalue(HermMatrix(raw.mat()));
      const HermMatrix m0(raw.mat() / std::max(1.0, hi));
      const auto meas = validate_measurement(
          sep, {m0, HermMatrix(identity(4).mat() - m0.mat())});
      const DiscriminationInstance inst(a, b, prior(rng));
      CHECK(general_bound(inst, meas) <=
            error_probability(inst, meas) + 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 120);
}

TEST_CASE("equality condition") {
  const auto psd2 = GptModel::psd(2);
  const auto r0 = validate_state(psd2, diag2(0.9, 0.1));
  const auto r1 = validate_state(psd2, diag2(0.2, 0.8));
  const DiscriminationInstance inst(r0, r1, 0.5);

  SUBCASE("holds for the attaining measurement") {
    const auto opt = helstrom_optimal_measurement(inst);
    const auto report = equality_condition(inst, opt);
    CHECK(report.holds);
    CHECK(std::abs(general_bound(inst, opt) -
                   error_probability(inst, opt)) <= 1e-8);
  }

  SUBCASE("uninformative measurement: single eigenspace, bound tight") {
    // M0 = I/2 has one eigenvalue, so both range inclusions hold in the
    // full space and direct evaluation confirms equality at every prior.
    const auto flat = validate_measurement(
        psd2, {HermMatrix(identity(2).mat() / 2.0),
               HermMatrix(identity(2).mat() / 2.0)});
    const auto report = equality_condition(inst, flat);
    CHECK(report.holds);
    CHECK(std::abs(general_bound(inst, flat) -
                   error_probability(inst, flat)) <= 1e-12);
  }

  SUBCASE("fails for a misaligned projector and the bound is strict") {
    Eigen::Matrix2cd x0, x1;
    x0 << 0.5, 0.4, 0.4, 0.5;
    x1 << 0.5, -0.4, -0.4, 0.5;
    const auto a = validate_state(psd2, HermMatrix(x0));
    const auto b = validate_state(psd2, HermMatrix(x1));
    const DiscriminationInstance skew(a, b, 0.5);
    const auto meas = validate_measurement(
        psd2, {diag2(1.0, 0.0), diag2(0.0, 1.0)});
    const auto report = equality_condition(skew, meas);
    CHECK_FALSE(report.holds);
    CHECK(report.residual_plus > 1e-3);
    CHECK(general_bound(skew, meas) <
          error_probability(skew, meas) - 1e-8);
  }

  SUBCASE("biconditional on sampled qubit tuples") {
    Rng rng(89);
    const auto model = GptModel::psd(2);
    for (int trial = 0; trial < 60; ++trial) {
      const auto a = validate_state(model, random_density(2, rng));
      const auto b = validate_state(model, random_density(2, rng));
      const DiscriminationInstance sample(a, b, 0.5);
      const auto meas = trial % 2 == 0
                            ? helstrom_optimal_measurement(sample)
                            : random_qubit_povm(rng, model);
      const bool holds = equality_condition(sample, meas).holds;
      const bool tight = std::abs(general_bound(sample, meas) -
                                  error_probability(sample, meas)) <= 1e-8;
      CHECK(holds == tight);
    }
  }
}

TEST_CASE("violation reports") {
  const auto ex = sep_example();
  const auto report = check_violation(ex.instance, ex.meas);
  CHECK(report.violates_quantum);
  CHECK(report.r > 1.0 - 1e-9);

  SUBCASE("identical states never yield positive margin") {
    const auto psd2 = GptModel::psd(2);
    Rng rng(97);
    const auto rho = validate_state(psd2, random_density(2, rng));
    const DiscriminationInstance same(rho, rho, 0.5);
    const auto meas = random_qubit_povm(rng, psd2);
    const auto r = check_violation(same, meas);
    CHECK(r.margin <= 1e-12);
    CHECK_FALSE(r.violates_quantum);
  }

  SUBCASE("positive-operator measurements never violate at even prior") {
    Rng rng(101);
    const auto psd2 = GptModel::psd(2);
    for (int trial = 0; trial < 40; ++trial) {
      const auto meas = random_qubit_povm(rng, psd2);
      const auto a = validate_state(psd2, random_density(2, rng));
      const auto b = validate_state(psd2, random_density(2, rng));
      const auto rep =
          check_violation(DiscriminationInstance(a, b, 0.5), meas);
      CHECK_FALSE(rep.violates_quantum);
    }
  }
}

TEST_CASE("advantage construction") {
  SUBCASE("separable model with the swap measurement") {
    const auto ex = sep_example();
    const auto cert = construct_advantage(ex.model, ex.meas);
    CHECK(cert.margin > 0.0);
    CHECK(cert.err < cert.helstrom_rhs - 1e-10);
    // Certificate members re-validate and re-evaluate.
    const DiscriminationInstance inst(cert.rho0, cert.rho1, 0.5);
    CHECK(std::abs(error_probability(inst, ex.meas) - cert.err) <= 1e-12);
  }

  SUBCASE("positive-operator measurements are rejected") {
    Rng rng(103);
    const auto psd2 = GptModel::psd(2);
    const auto meas = random_qubit_povm(rng, psd2);
    CHECK_THROWS_AS(construct_advantage(psd2, meas), PreconditionError);
  }

  SUBCASE("margin follows the closed-form chain on a generator model") {
    const auto model = contracted_qubit_model(0.5);
    const auto meas = validate_measurement(
        model, {diag2(1.5, -0.5), diag2(-0.5, 1.5)});
    const auto stats = measurement_spectral_stats(meas);
    CHECK(stats.r == doctest::Approx(2.0));
    const auto cert = construct_advantage(model, meas);
    CHECK(cert.margin > 0.0);
    const double predicted =
        cert.delta * (stats.r - 1.0) / cert.x0.trace();
    CHECK(std::abs(cert.margin - predicted) <= 1e-8);
  }
}

TEST_CASE("distinguishability norm") {
  SUBCASE("diagonal qubits in the quantum model") {
    const auto psd2 = GptModel::psd(2);
    const auto r0 = validate_state(psd2, diag2(0.9, 0.1));
    const auto r1 = validate_state(psd2, diag2(0.1, 0.9));
    const auto norm = distinguishability_norm(psd2, r0, r1);
    CHECK(norm.exact);
    CHECK(norm.value == doctest::Approx(0.8).epsilon(1e-10));

    const auto zero = distinguishability_norm(psd2, r0, r0);
    CHECK(zero.value == doctest::Approx(0.0));
  }

  SUBCASE("quantum model matches half the trace norm") {
    Rng rng(107);
    for (int trial = 0; trial < 30; ++trial) {
      const Eigen::Index d = 2 + trial % 3;
      const auto model = GptModel::psd(d);
      const auto a = validate_state(model, random_density(d, rng));
      const auto b = validate_state(model, random_density(d, rng));
      const auto norm = distinguishability_norm(model, a, b);
      const double half_tn =
          0.5 * trace_norm(HermMatrix(a.matrix().mat() - b.matrix().mat()));
      CHECK(std::abs(norm.value - half_tn) <= 1e-8);
    }
  }

  SUBCASE("generator cone linear program is exact") {
    const auto model = GptModel::from_generators(
        {diag2(1.0, 0.0), diag2(0.0, 1.0)});
    const auto r0 = validate_state(model, diag2(0.9, 0.1));
    const auto r1 = validate_state(model, diag2(0.1, 0.9));
    const auto norm = distinguishability_norm(model, r0, r1);
    CHECK(norm.exact);
    CHECK(norm.value == doctest::Approx(0.8).epsilon(1e-9));
  }

  SUBCASE("separable model beats the quantum value on the example pair") {
    const auto ex = sep_example();
    const auto norm = distinguishability_norm(ex.model, ex.instance.rho0,
                                              ex.instance.rho1);
    CHECK_FALSE(norm.exact);
    CHECK(norm.value >= 1.0 / 8.0);
    CHECK(norm.value >= 1.0 / 8.0 + 0.05);  // swap witness lifts the bound
    REQUIRE(norm.effect.has_value());
    CHECK(dual_membership(ex.model.cone, *norm.effect).in());
  }
}
