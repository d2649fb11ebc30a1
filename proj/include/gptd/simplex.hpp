#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gptd/errors.hpp"

namespace gptd {

struct LpResult {
  enum class Status { Optimal, Unbounded, IterationLimit };
  Status status = Status::Optimal;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// Maximizes c.x over { x free : A x <= b } with b >= 0, so x = 0 is a basic
/// feasible start. Free variables split into positive and negative parts,
/// slack variables complete the basis; pivoting uses Bland's rule, which
/// cannot cycle on the degenerate b = 0 rows this is used with.
inline LpResult simplex_maximize(const Eigen::VectorXd& c,
                                 const Eigen::MatrixXd& a,
                                 const Eigen::VectorXd& b,
                                 double pivot_tol = 1e-9,
                                 int max_pivots = 20000) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.minCoeff() < 0.0) {
    throw OracleError("simplex_maximize: negative bound, origin infeasible");
  }

  // Tableau columns: [x+ (n) | x- (n) | slack (m) | rhs].
  const Eigen::Index cols = 2 * n + m;
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  tab.block(0, 0, m, n) = a;
  tab.block(0, n, m, n) = -a;
  tab.block(0, 2 * n, m, m) = Eigen::MatrixXd::Identity(m, m);
  tab.block(0, cols, m, 1) = b;
  tab.block(m, 0, 1, n) = -c.transpose();
  tab.block(m, n, 1, n) = c.transpose();

  std::vector<Eigen::Index> basis(static_cast<size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[size_t(i)] = 2 * n + i;

  LpResult result;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    // Bland: entering = lowest-index column with negative reduced cost.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (tab(m, j) < -pivot_tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    Eigen::Index leave = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab(i, enter) > pivot_tol) {
        const double ratio = tab(i, cols) / tab(i, enter);
        if (leave < 0 || ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 &&
             basis[size_t(i)] < basis[size_t(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) {
      result.status = LpResult::Status::Unbounded;
      return result;
    }

    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = tab(i, enter);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave);
    }
    basis[size_t(leave)] = enter;
    if (pivot + 1 == max_pivots) {
      result.status = LpResult::Status::IterationLimit;
      return result;
    }
  }

  Eigen::VectorXd full = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index i = 0; i < m; ++i) {
    full[basis[size_t(i)]] = tab(i, cols);
  }
  result.x = full.head(n) - full.segment(n, n);
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace gptd
