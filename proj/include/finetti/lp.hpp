#pragma once

#include <Eigen/Dense>

namespace finetti::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

/// Dense two-phase simplex for
///
///   minimize  cost . x   subject to  A x = b,  x >= 0.
///
/// Entering and leaving variables follow Bland's rule, so the pivot sequence
/// and the returned vertex are fully determined by the input. Redundant
/// equality rows are tolerated.
Result minimize(const Eigen::VectorXd& cost, const Eigen::MatrixXd& equalities, const Eigen::VectorXd& rhs,
                double pivot_tol = 1e-12, double feasibility_tol = 1e-9);

}  // namespace finetti::lp
