#include "finetti/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finetti/definetti.hpp"
#include "finetti/errors.hpp"
#include "tensor_ops.hpp"

namespace finetti::quantum {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Number of systems n with local_dim^n == dim.
std::size_t system_count(std::size_t dim, std::size_t local_dim) {
  if (local_dim < 2) throw InvalidArgument("local dimension must be at least 2");
  std::size_t n = 0, d = 1;
  while (d < dim) {
    d *= local_dim;
    ++n;
  }
  if (d != dim || n == 0)
    throw DimensionMismatch("dimension " + std::to_string(dim) + " is not a power of " + std::to_string(local_dim));
  return n;
}

}  // namespace

DensityOperator::DensityOperator(Matrix matrix, double tol) : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) throw DimensionMismatch("DensityOperator: not square");
  if (max_abs(matrix_ - matrix_.adjoint()) > tol) throw InvalidArgument("DensityOperator: not self-adjoint");
  const cplx tr = matrix_.trace();
  if (std::abs(tr - cplx(1.0, 0.0)) > tol)
    throw InvalidArgument("DensityOperator: trace is " + std::to_string(tr.real()) + ", not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol)
    throw InvalidArgument("DensityOperator: negative eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()));
}

ProjectiveTest::ProjectiveTest(std::vector<Matrix> projectors, double tol) : projectors_(std::move(projectors)) {
  if (projectors_.empty()) throw InvalidArgument("ProjectiveTest: no projectors");
  const auto dim = projectors_.front().rows();
  Matrix total = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < projectors_.size(); ++i) {
    const auto& p = projectors_[i];
    if (p.rows() != dim || p.cols() != dim) throw DimensionMismatch("ProjectiveTest: projector shapes differ");
    if (max_abs(p * p - p) > tol || max_abs(p - p.adjoint()) > tol)
      throw InvalidArgument("ProjectiveTest: element " + std::to_string(i) + " is not an orthogonal projector");
    for (std::size_t j = 0; j < i; ++j)
      if (max_abs(p * projectors_[j]) > tol) throw InvalidArgument("ProjectiveTest: projectors are not orthogonal");
    total += p;
  }
  if (max_abs(total - Matrix::Identity(dim, dim)) > tol)
    throw InvalidArgument("ProjectiveTest: projectors do not sum to the identity");
}

Matrix identity(std::size_t dim) { return Matrix::Identity(ix(dim), ix(dim)); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_power(const Matrix& a, std::size_t n) {
  if (n == 0) return Matrix::Identity(1, 1);
  Matrix out = a;
  for (std::size_t k = 1; k < n; ++k) out = kron(out, a);
  return out;
}

ProjectiveTest pauli_basis(char axis) {
  Matrix s;
  switch (axis) {
    case 'x': s = pauli_x(); break;
    case 'y': s = pauli_y(); break;
    case 'z': s = pauli_z(); break;
    default: throw InvalidArgument(std::string("pauli_basis: unknown axis '") + axis + "'");
  }
  const Matrix id = identity(2);
  return ProjectiveTest({(id + s) / 2.0, (id - s) / 2.0});
}

ProjectiveTest computational_basis(std::size_t dim) {
  std::vector<Matrix> ps;
  for (std::size_t i = 0; i < dim; ++i) {
    Matrix p = Matrix::Zero(ix(dim), ix(dim));
    p(ix(i), ix(i)) = 1.0;
    ps.push_back(std::move(p));
  }
  return ProjectiveTest(std::move(ps));
}

Eigen::VectorXd born(const DensityOperator& rho, const ProjectiveTest& test) {
  if (rho.dim() != test.dim()) throw DimensionMismatch("born: state and test dimensions differ");
  Eigen::VectorXd p(ix(test.size()));
  for (std::size_t i = 0; i < test.size(); ++i) p(ix(i)) = (rho.matrix() * test.projectors()[i]).trace().real();
  return p;
}

DensityOperator partial_trace(const DensityOperator& rho, std::size_t local_dim, const std::vector<std::size_t>& discard) {
  const std::size_t n = system_count(rho.dim(), local_dim);
  std::vector<bool> gone(n, false);
  for (auto s : discard) {
    if (s >= n) throw InvalidArgument("partial_trace: system index " + std::to_string(s) + " out of range");
    if (gone[s]) throw InvalidArgument("partial_trace: system listed twice");
    gone[s] = true;
  }
  std::vector<std::size_t> keep, drop;
  for (std::size_t i = 0; i < n; ++i) (gone[i] ? drop : keep).push_back(i);
  if (keep.empty()) throw InvalidArgument("partial_trace: cannot discard every system");

  const detail::Shape keep_radix(keep.size(), local_dim), drop_radix(drop.size(), local_dim);
  std::size_t out_dim = 1;
  for (std::size_t i = 0; i < keep.size(); ++i) out_dim *= local_dim;
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n - 1; i-- > 0;) stride[i] = stride[i + 1] * local_dim;

  auto offset = [&](const std::vector<std::size_t>& digits, const std::vector<std::size_t>& systems) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < systems.size(); ++k) off += digits[k] * stride[systems[k]];
    return off;
  };

  Matrix out = Matrix::Zero(ix(out_dim), ix(out_dim));
  std::vector<std::size_t> r(keep.size(), 0);
  std::size_t ri = 0;
  do {
    std::vector<std::size_t> c(keep.size(), 0);
    std::size_t ci = 0;
    do {
      cplx sum = 0.0;
      std::vector<std::size_t> t(drop.size(), 0);
      do {
        const std::size_t toff = offset(t, drop);
        sum += rho.matrix()(ix(offset(r, keep) + toff), ix(offset(c, keep) + toff));
      } while (detail::next_tuple(t, drop_radix));
      out(ix(ri), ix(ci)) = sum;
      ++ci;
    } while (detail::next_tuple(c, keep_radix));
    ++ri;
  } while (detail::next_tuple(r, keep_radix));
  return DensityOperator(std::move(out), 1e-8);
}

Matrix permutation_operator(std::size_t local_dim, const std::vector<std::size_t>& pi) {
  const std::size_t n = pi.size();
  std::vector<bool> seen(n, false);
  for (auto v : pi) {
    if (v >= n || seen[v]) throw InvalidArgument("permutation_operator: not a permutation");
    seen[v] = true;
  }
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) dim *= local_dim;
  const detail::Shape radix(n, local_dim);
  Matrix s = Matrix::Zero(ix(dim), ix(dim));
  std::vector<std::size_t> in(n, 0), out(n);
  std::size_t col = 0;
  do {
    for (std::size_t i = 0; i < n; ++i) out[pi[i]] = in[i];
    std::size_t row = 0;
    for (auto d : out) row = row * local_dim + d;
    s(ix(row), ix(col++)) = 1.0;
  } while (detail::next_tuple(in, radix));
  return s;
}

bool is_symmetric_quantum(const DensityOperator& rho, std::size_t local_dim, double tol) {
  const std::size_t n = system_count(rho.dim(), local_dim);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::vector<std::size_t> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = i;
    std::swap(pi[k], pi[k + 1]);
    const Matrix s = permutation_operator(local_dim, pi);
    if (max_abs(s * rho.matrix() * s.adjoint() - rho.matrix()) > tol) return false;
  }
  return true;
}

TestSpace local_test_space(const std::vector<ProjectiveTest>& tests) {
  if (tests.empty()) throw InvalidArgument("local_test_space: no tests");
  std::vector<std::string> labels;
  std::vector<Test> family;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    if (tests[t].dim() != tests.front().dim()) throw DimensionMismatch("local_test_space: tests act on different dimensions");
    Test block;
    for (std::size_t j = 0; j < tests[t].size(); ++j) {
      block.push_back(labels.size());
      labels.push_back("t" + std::to_string(t + 1) + "p" + std::to_string(j + 1));
    }
    family.push_back(std::move(block));
  }
  return TestSpace(std::move(labels), std::move(family));
}

JointState embed_local(const DensityOperator& rho, const std::vector<ProjectiveTest>& tests) {
  const auto space = share(local_test_space(tests));
  const std::size_t local = tests.front().dim();
  const std::size_t n = system_count(rho.dim(), local);
  std::vector<const Matrix*> projectors;
  for (const auto& t : tests)
    for (const auto& p : t.projectors()) projectors.push_back(&p);

  ProductSpace prod = power(space, n);
  if (prod.size() > kTensorEntryLimit) throw SizeLimitExceeded("embed_local: tensor too large");
  std::vector<double> tensor(prod.size());
  const detail::Shape radix(n, projectors.size());
  std::vector<std::size_t> idx(n, 0);
  std::size_t flat = 0;
  do {
    Matrix k = *projectors[idx[0]];
    for (std::size_t i = 1; i < n; ++i) k = kron(k, *projectors[idx[i]]);
    const double v = (k.cwiseProduct(rho.matrix().transpose())).sum().real();  // Tr(K rho)
    tensor[flat++] = std::abs(v) < 1e-14 ? 0.0 : v;
  } while (detail::next_tuple(idx, radix));
  return JointState(std::move(prod), std::move(tensor));
}

DensityOperator rebit_mixture_state(std::size_t n) {
  const Matrix plus = (identity(2) + pauli_y()) / 2.0;
  const Matrix minus = (identity(2) - pauli_y()) / 2.0;
  return DensityOperator(0.5 * kron_power(plus, n) + 0.5 * kron_power(minus, n));
}

RebitReport rebit_counterexample(std::size_t n, std::size_t grid) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("rebit_counterexample: n must be even and at least 2");
  if (grid < 8) throw InvalidArgument("rebit_counterexample: grid must be at least 8");
  RebitReport report;
  report.n = n;
  report.grid = grid;

  // (a) real, symmetric, consistent under partial trace.
  const auto omega = rebit_mixture_state(n);
  report.max_imaginary = omega.matrix().imag().cwiseAbs().maxCoeff();
  report.real_symmetric = report.max_imaginary <= 1e-12 && max_abs(omega.matrix() - omega.matrix().transpose()) <= 1e-12;
  report.permutation_symmetric = is_symmetric_quantum(omega, 2);
  for (std::size_t k = n; k >= 2; --k) {
    const auto reduced = partial_trace(rebit_mixture_state(k), 2, {k - 1});
    report.trace_consistency =
        std::max(report.trace_consistency, max_abs(reduced.matrix() - rebit_mixture_state(k - 1).matrix()));
  }

  // (b) x/z statistics coincide with those of the maximally mixed state and
  // have a de Finetti representation.
  const std::vector<ProjectiveTest> rebit_tests{pauli_basis('x'), pauli_basis('z')};
  const auto embedded = embed_local(omega, rebit_tests);
  const auto mixed = embed_local(DensityOperator(kron_power(identity(2) / 2.0, n)), rebit_tests);
  for (std::size_t i = 0; i < embedded.tensor().size(); ++i)
    report.restricted_embedding_gap =
        std::max(report.restricted_embedding_gap, std::abs(embedded.tensor()[i] - mixed.tensor()[i]));

  const auto& local = embedded.product().factors().front();
  const State mixed_single(local, Eigen::VectorXd::Constant(4, 0.5));
  RecoveryOptions opts;
  opts.extra_support = {mixed_single};
  const auto rec = recover_mixture(embedded, opts);
  report.recovery_residual = rec.residual;
  for (const auto& c : rec.mixture.components())
    if ((c.state.probs() - mixed_single.probs()).cwiseAbs().maxCoeff() <= 1e-9) report.recovered_mixed_weight = c.weight;
  report.recovered_delta_on_mixed = rec.mixture.size() == 1 && std::abs(report.recovered_mixed_weight - 1.0) <= 1e-9;

  // (c) the y-y correlator separates omega from every mixture of real products.
  const Matrix yy = kron(pauli_y(), pauli_y());
  std::vector<std::size_t> rest;
  for (std::size_t i = 2; i < n; ++i) rest.push_back(i);
  const auto pair = rest.empty() ? omega : partial_trace(omega, 2, rest);
  report.correlator = (yy * pair.matrix()).trace().real();

  std::vector<Matrix> real_states{identity(2) / 2.0};
  for (std::size_t j = 0; j < grid; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid);
    real_states.push_back((identity(2) + std::cos(theta) * pauli_x() + std::sin(theta) * pauli_z()) / 2.0);
  }
  // The correlator is linear in the mixing weights, so its maximum over
  // mixtures is attained on a single product.
  report.best_real_product_correlator = -std::numeric_limits<double>::infinity();
  for (const auto& r : real_states)
    report.best_real_product_correlator =
        std::max(report.best_real_product_correlator, (yy * kron(r, r)).trace().real());
  report.gap = report.correlator - report.best_real_product_correlator;
  return report;
}

}  // namespace finetti::quantum
