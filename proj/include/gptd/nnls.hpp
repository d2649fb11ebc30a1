#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace gptd {

struct NnlsResult {
  Eigen::VectorXd coefficients;
  double residual = 0.0;  // Euclidean norm of (sum_i c_i g_i - x)
  int iterations = 0;
  bool hit_iteration_cap = false;
};

/// Nonnegative least squares in coefficient space by projected gradient
/// descent. Gradients come from the Gram matrix G_ij = <g_i, g_j> and the
/// pairings beta_i = <g_i, x>; the step size from a power-iteration bound on
/// the Lipschitz constant. Termination is judged on `residual_fn`, which
/// must evaluate || sum_i c_i g_i - x || exactly in the ambient space (the
/// Gram quadratic form cancels catastrophically near zero and cannot tell
/// residual 1e-12 from 1e-8). Stops at `target_residual`, on stalls, or at
/// the iteration cap.
inline NnlsResult nonneg_lsq_pgd(
    const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta,
    const std::function<double(const Eigen::VectorXd&)>& residual_fn,
    double target_residual, int max_iter = 100000) {
  const Eigen::Index m = gram.rows();
  NnlsResult result;
  result.coefficients = Eigen::VectorXd::Zero(m);

  // Lipschitz bound lambda_max(G) via deterministic power iterations.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
  double lip = gram.trace();
  for (int k = 0; k < 40; ++k) {
    Eigen::VectorXd gw = gram * w;
    const double norm = gw.norm();
    if (norm <= 0) break;
    lip = w.dot(gw) / w.squaredNorm();
    w = gw / norm;
  }
  lip = std::max(lip * 1.01, 1e-300);

  Eigen::VectorXd c = result.coefficients;
  double res = residual_fn(c);
  double last_checkpoint = res;
  int it = 0;
  for (; it < max_iter && res > target_residual; ++it) {
    c = (c - (gram * c - beta) / lip).cwiseMax(0.0);
    if (it % 128 == 127) {
      res = residual_fn(c);
      if (last_checkpoint - res < 1e-8 * res) {
        ++it;
        break;  // stalled at a positive optimum
      }
      last_checkpoint = res;
    }
  }
  result.coefficients = c;
  result.residual = residual_fn(c);
  result.iterations = it;
  result.hit_iteration_cap = it >= max_iter;
  return result;
}

}  // namespace gptd
