#include "finetti/lp.hpp"

#include <vector>

namespace finetti::lp {

namespace {

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) : m_(a.rows()), n_(a.cols()) {
    // Columns: [original | artificial | rhs]. Rows 0..m-1 constraints, row m costs.
    t_ = Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs_col()) = sign * b(i);
    }
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    active_.assign(static_cast<std::size_t>(m_), true);
  }

  Eigen::Index rhs_col() const { return n_ + m_; }

  void set_costs(const Eigen::VectorXd& full_cost) {
    // Reduced costs r_j = c_j - c_B^T B^{-1} A_j; rhs cell holds -objective.
    t_.row(m_).setZero();
    t_.row(m_).head(n_ + m_) = full_cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const double cb = full_cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Bland's rule. Returns false on unboundedness.
  Status run(Eigen::Index allowed_cols, double pivot_tol, std::size_t max_iter) {
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -pivot_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) continue;
        const double coef = t_(i, enter);
        if (coef <= pivot_tol) continue;
        const double ratio = t_(i, rhs_col()) / coef;
        if (leave < 0 || ratio < best - 1e-15 ||
            (ratio <= best + 1e-15 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
    }
    return Status::IterationLimit;
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Pivots basic artificials out; rows where that is impossible are redundant.
  void expel_artificials(double pivot_tol) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > pivot_tol) {
          col = j;
          break;
        }
      }
      if (col >= 0)
        pivot(i, col);
      else
        active_[static_cast<std::size_t>(i)] = false;
    }
  }

  double objective() const { return -t_(m_, rhs_col()); }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const auto var = basis_[static_cast<std::size_t>(i)];
      if (active_[static_cast<std::size_t>(i)] && var < n_) x(var) = t_(i, rhs_col());
    }
    return x;
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

}  // namespace

Result minimize(const Eigen::VectorXd& cost, const Eigen::MatrixXd& equalities, const Eigen::VectorXd& rhs,
                double pivot_tol, double feasibility_tol) {
  const Eigen::Index n = equalities.cols();
  const Eigen::Index m = equalities.rows();
  // Bland's rule cannot cycle; the bound only guards against numerical drift.
  const std::size_t max_iter = 50 * static_cast<std::size_t>(n + m + 10) * static_cast<std::size_t>(m + 1);

  Tableau tab(equalities, rhs);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.set_costs(phase1);
  Result result;
  if (auto st = tab.run(n + m, pivot_tol, max_iter); st != Status::Optimal) {
    result.status = st == Status::Unbounded ? Status::Infeasible : st;
    return result;
  }
  if (tab.objective() > feasibility_tol) {
    result.status = Status::Infeasible;
    return result;
  }
  tab.expel_artificials(pivot_tol);

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = cost;
  tab.set_costs(phase2);
  result.status = tab.run(n, pivot_tol, max_iter);
  result.x = tab.solution();
  result.objective = cost.dot(result.x);
  return result;
}

}  // namespace finetti::lp
