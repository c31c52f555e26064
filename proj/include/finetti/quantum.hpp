#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "finetti/composite.hpp"
#include "finetti/test_space.hpp"

namespace finetti::quantum {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Self-adjoint, unit-trace, positive semidefinite (eigenvalues >= -tol).
class DensityOperator {
 public:
  explicit DensityOperator(Matrix matrix, double tol = 1e-9);
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const noexcept { return matrix_; }

 private:
  Matrix matrix_;
};

/// Orthogonal projectors resolving the identity.
class ProjectiveTest {
 public:
  explicit ProjectiveTest(std::vector<Matrix> projectors, double tol = 1e-9);
  const std::vector<Matrix>& projectors() const noexcept { return projectors_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(projectors_.front().rows()); }
  std::size_t size() const noexcept { return projectors_.size(); }

 private:
  std::vector<Matrix> projectors_;
};

Matrix identity(std::size_t dim);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix kron(const Matrix& a, const Matrix& b);
Matrix kron_power(const Matrix& a, std::size_t n);

/// Projective test onto the eigenbasis of a Pauli operator (+1 eigenvector first).
ProjectiveTest pauli_basis(char axis);
/// Rank-one projectors onto the computational basis of C^dim.
ProjectiveTest computational_basis(std::size_t dim);

/// Tr(rho P_i) for each projector.
Eigen::VectorXd born(const DensityOperator& rho, const ProjectiveTest& test);

/// Trace out `discard` (0-based) from an n-system operator of local dimension
/// `local_dim`. Throws InvalidArgument on bad indices.
DensityOperator partial_trace(const DensityOperator& rho, std::size_t local_dim, const std::vector<std::size_t>& discard);

/// Unitary permuting tensor factors: system i is moved to position pi[i].
Matrix permutation_operator(std::size_t local_dim, const std::vector<std::size_t>& pi);

/// S rho S^dagger == rho for all adjacent transpositions.
bool is_symmetric_quantum(const DensityOperator& rho, std::size_t local_dim, double tol = 1e-9);

/// Local test space with one outcome per (test, projector); outcomes of
/// different tests stay distinct.
TestSpace local_test_space(const std::vector<ProjectiveTest>& tests);

/// Product-projector statistics of rho on power(local_test_space(tests), n).
JointState embed_local(const DensityOperator& rho, const std::vector<ProjectiveTest>& tests);

/// 1/2 ((I+sy)/2)^{(x)n} + 1/2 ((I-sy)/2)^{(x)n}
DensityOperator rebit_mixture_state(std::size_t n);

struct RebitReport {
  std::size_t n = 0;
  std::size_t grid = 0;
  double max_imaginary = 0.0;        // |Im| of the n-system operator
  bool real_symmetric = false;       // rho == rho^T and real
  bool permutation_symmetric = false;
  double trace_consistency = 0.0;    // max |Tr_n rho^n - rho^{n-1}| over the chain
  double restricted_embedding_gap = 0.0;  // max |embed(rho^n) - embed((I/2)^{(x)n})| with x/z tests
  double recovery_residual = 0.0;    // fit of restricted statistics
  double recovered_mixed_weight = 0.0;
  bool recovered_delta_on_mixed = false;
  double correlator = 0.0;           // Tr((sy x sy) rho^2)
  double best_real_product_correlator = 0.0;
  double gap = 0.0;
};

/// Real-quantum counterexample: exchangeable real states whose y-y correlator
/// no mixture of real product states can reproduce. n even >= 2, grid >= 8.
RebitReport rebit_counterexample(std::size_t n, std::size_t grid);

}  // namespace finetti::quantum
