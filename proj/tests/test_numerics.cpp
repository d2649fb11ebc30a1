#include <doctest.h>

#include <bitset>

#include "gptd/nnls.hpp"
#include "gptd/sampling.hpp"
#include "gptd/simplex.hpp"

using namespace gptd;

namespace {

// Exact NNLS by enumerating active sets; usable for small problems only.
double nnls_bruteforce(const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta,
                       double x_norm_sq) {
  const int m = int(gram.rows());
  double best = x_norm_sq;  // c = 0
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) idx.push_back(i);
    }
    Eigen::MatrixXd sub(idx.size(), idx.size());
    Eigen::VectorXd rhs(idx.size());
    for (size_t a = 0; a < idx.size(); ++a) {
      rhs[Eigen::Index(a)] = beta[idx[a]];
      for (size_t b = 0; b < idx.size(); ++b) {
        sub(Eigen::Index(a), Eigen::Index(b)) = gram(idx[a], idx[b]);
      }
    }
    const Eigen::VectorXd sol = sub.fullPivLu().solve(rhs);
    if ((sol.array() < 0).any()) continue;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    for (size_t a = 0; a < idx.size(); ++a) c[idx[a]] = sol[Eigen::Index(a)];
    best = std::min(best, c.dot(gram * c) - 2.0 * c.dot(beta) + x_norm_sq);
  }
  return std::sqrt(std::max(0.0, best));
}

}  // namespace

TEST_CASE("projected-gradient nnls matches active-set enumeration") {
  Rng rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 2;
    const int n = 4;
    Eigen::MatrixXd a(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = gauss(rng);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(rng);

    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::VectorXd beta = a.transpose() * x;
    const double xx = x.squaredNorm();

    const auto residual_fn = [&](const Eigen::VectorXd& c) {
      return (a * c - x).norm();
    };
    const auto result = nonneg_lsq_pgd(gram, beta, residual_fn, 1e-12);
    const double reference = nnls_bruteforce(gram, beta, xx);
    CHECK(result.residual <= reference + 1e-6);
    CHECK((result.coefficients.array() >= 0).all());
  }
}

TEST_CASE("nnls reaches zero residual for interior targets") {
  Rng rng(103);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(3, 3);
  a.setIdentity();
  Eigen::VectorXd coeff(3);
  coeff << 0.3, 1.2, 0.7;
  const Eigen::VectorXd x = a * coeff;
  const auto result = nonneg_lsq_pgd(
      a.transpose() * a, a.transpose() * x,
      [&](const Eigen::VectorXd& c) { return (a * c - x).norm(); }, 1e-10);
  CHECK(result.residual <= 1e-10);
  CHECK((result.coefficients - coeff).norm() <= 1e-8);
  (void)gauss;
}

TEST_CASE("simplex solves a small bounded program") {
  Eigen::VectorXd c(2);
  c << 1.0, 1.0;
  Eigen::MatrixXd a(3, 2);
  a << 1, 0,
       0, 1,
       1, 1;
  Eigen::VectorXd b(3);
  b << 1.0, 2.0, 2.5;
  const auto lp = simplex_maximize(c, a, b);
  CHECK(lp.status == LpResult::Status::Optimal);
  CHECK(lp.objective == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("simplex finds optima at negative coordinates") {
  Eigen::VectorXd c(1);
  c << -1.0;
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  const auto lp = simplex_maximize(c, a, b);
  CHECK(lp.status == LpResult::Status::Optimal);
  CHECK(lp.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lp.x[0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("simplex reports unbounded programs") {
  Eigen::VectorXd c(1);
  c << 1.0;
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  Eigen::VectorXd b(1);
  b << 0.0;
  const auto lp = simplex_maximize(c, a, b);
  CHECK(lp.status == LpResult::Status::Unbounded);
}

TEST_CASE("simplex terminates on fully degenerate rows") {
  Eigen::VectorXd c(2);
  c << 1.0, 0.0;
  Eigen::MatrixXd a(3, 2);
  a << 1, -1,
       1, 1,
       1, 0;
  Eigen::VectorXd b(3);
  b << 0.0, 0.0, 0.0;
  const auto lp = simplex_maximize(c, a, b);
  CHECK(lp.status == LpResult::Status::Optimal);
  CHECK(lp.objective == doctest::Approx(0.0));
}

TEST_CASE("simplex agrees with enumeration on random dense programs") {
  Rng rng(107);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // Box [-1, 1]^2 plus random cutting planes with nonnegative offsets.
    Eigen::MatrixXd a(6, 2);
    a << 1, 0,
         -1, 0,
         0, 1,
         0, -1,
         unif(rng), unif(rng),
         unif(rng), unif(rng);
    Eigen::VectorXd b(6);
    b << 1, 1, 1, 1, std::abs(unif(rng)) + 0.1, std::abs(unif(rng)) + 0.1;
    Eigen::VectorXd c(2);
    c << unif(rng), unif(rng);

    const auto lp = simplex_maximize(c, a, b);
    REQUIRE(lp.status == LpResult::Status::Optimal);

    // Dense grid reference.
    double best = -1e9;
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) {
        Eigen::Vector2d x(-1.0 + i * 0.005, -1.0 + j * 0.005);
        if (((a * x - b).array() <= 1e-12).all()) {
          best = std::max(best, c.dot(x));
        }
      }
    }
    CHECK(lp.objective >= best - 1e-9);
    CHECK((a * lp.x - b).maxCoeff() <= 1e-9);
  }
}
