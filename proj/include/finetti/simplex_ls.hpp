#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace finetti {

struct SimplexLsResult {
  Eigen::VectorXd weights;
  double residual = 0.0;  // ||M w - y||
  std::size_t iterations = 0;
  bool converged = false;
};

/// minimize ||M w - y||  subject to  w >= 0, sum(w) = 1.
///
/// Primal active-set method (Lawson-Hanson adapted to the simplex) started
/// from uniform weights. Each free-set subproblem eliminates the sum
/// constraint and is solved by a complete orthogonal decomposition, so rank
/// deficient supports are handled. Among equally good entering candidates
/// the lowest index wins.
SimplexLsResult solve_simplex_ls(const Eigen::MatrixXd& m, const Eigen::VectorXd& y,
                                 std::size_t max_iterations = 100'000);

}  // namespace finetti
