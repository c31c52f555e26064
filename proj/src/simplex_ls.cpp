#include "finetti/simplex_ls.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "finetti/errors.hpp"

namespace finetti {

namespace {

// argmin ||M_P z - y|| with sum z = 1 over the free set P.
Eigen::VectorXd solve_free(const Eigen::MatrixXd& m, const Eigen::VectorXd& y, const std::vector<Eigen::Index>& free) {
  const auto k = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
  if (k == 1) {
    z(0) = 1.0;
    return z;
  }
  const Eigen::VectorXd last = m.col(free.back());
  Eigen::MatrixXd a(m.rows(), k - 1);
  for (Eigen::Index i = 0; i + 1 < k; ++i) a.col(i) = m.col(free[static_cast<std::size_t>(i)]) - last;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-11);
  const Eigen::VectorXd head = cod.solve(y - last);
  z.head(k - 1) = head;
  z(k - 1) = 1.0 - head.sum();
  return z;
}

double objective(const Eigen::MatrixXd& m, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  return 0.5 * (m * w - y).squaredNorm();
}

}  // namespace

SimplexLsResult solve_simplex_ls(const Eigen::MatrixXd& m, const Eigen::VectorXd& y, std::size_t max_iterations) {
  const Eigen::Index n = m.cols();
  if (n == 0) throw InvalidArgument("solve_simplex_ls: empty support");
  if (m.rows() != y.size()) throw DimensionMismatch("solve_simplex_ls: row count mismatch");

  constexpr double kZero = 1e-14;
  const double kkt_tol = 1e-13 * std::max(1.0, m.squaredNorm());

  SimplexLsResult result;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  std::vector<bool> is_free(static_cast<std::size_t>(n), true);
  std::vector<bool> blocked(static_cast<std::size_t>(n), false);
  double best = objective(m, y, w);

  std::size_t iter = 0;
  while (iter < max_iterations) {
    // Inner loop: move toward the free-set optimum, dropping variables that hit zero.
    while (iter++ < max_iterations) {
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (is_free[static_cast<std::size_t>(i)]) free.push_back(i);
      const Eigen::VectorXd z = solve_free(m, y, free);
      if ((z.array() > kZero).all()) {
        for (std::size_t k = 0; k < free.size(); ++k) w(free[k]) = z(static_cast<Eigen::Index>(k));
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < free.size(); ++k) {
        const double wi = w(free[k]), zi = z(static_cast<Eigen::Index>(k));
        if (zi <= kZero) alpha = std::min(alpha, wi / (wi - zi));
      }
      for (std::size_t k = 0; k < free.size(); ++k) {
        auto& wi = w(free[k]);
        wi += alpha * (z(static_cast<Eigen::Index>(k)) - wi);
      }
      for (auto i : free) {
        if (w(i) <= kZero) {
          w(i) = 0.0;
          is_free[static_cast<std::size_t>(i)] = false;
        }
      }
      w /= w.sum();
    }

    const double current = objective(m, y, w);
    if (current < best - 1e-15) {
      std::fill(blocked.begin(), blocked.end(), false);
      best = current;
    }

    // KKT: with gradient g, the sum constraint multiplier is fixed by the free
    // set; a bound variable may enter when its reduced gradient is negative.
    const Eigen::VectorXd g = m.transpose() * (m * w - y);
    double level = 0.0;
    std::size_t nfree = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (is_free[static_cast<std::size_t>(i)]) {
        level += g(i);
        ++nfree;
      }
    level /= static_cast<double>(std::max<std::size_t>(nfree, 1));

    Eigen::Index enter = -1;
    double most_negative = -kkt_tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_free[static_cast<std::size_t>(i)] || blocked[static_cast<std::size_t>(i)]) continue;
      const double lambda = g(i) - level;
      if (lambda < most_negative) {
        most_negative = lambda;
        enter = i;
      }
    }
    if (enter < 0) {
      result.converged = true;
      break;
    }
    // A variable that re-enters without improving the objective would cycle.
    blocked[static_cast<std::size_t>(enter)] = true;
    is_free[static_cast<std::size_t>(enter)] = true;
  }

  result.weights = w;
  result.residual = (m * w - y).norm();
  result.iterations = iter;
  return result;
}

}  // namespace finetti
