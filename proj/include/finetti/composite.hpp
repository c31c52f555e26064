#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "finetti/state_space.hpp"
#include "finetti/test_space.hpp"

namespace finetti {

/// Hard cap on dense joint tensors.
inline constexpr std::size_t kTensorEntryLimit = 10'000'000;

/// Cartesian product A_1 x ... x A_n kept as a flat factor list, so
/// nested products are associative by construction.
class ProductSpace {
 public:
  explicit ProductSpace(std::vector<SpaceHandle> factors);

  const std::vector<SpaceHandle>& factors() const noexcept { return factors_; }
  const TestSpace& factor(std::size_t i) const { return *factors_.at(i); }
  std::size_t n() const noexcept { return factors_.size(); }
  /// Outcome count of each factor.
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  /// Number of product outcomes.
  std::size_t size() const noexcept { return size_; }
  /// Number of product tests (s_1 x ... x s_n).
  std::size_t test_count() const noexcept;
  /// Row-major strides, system 1 slowest.
  const std::vector<std::size_t>& strides() const noexcept { return strides_; }
  bool homogeneous() const noexcept;

  std::size_t flat_index(const std::vector<std::size_t>& outcomes) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  friend bool operator==(const ProductSpace& a, const ProductSpace& b);

 private:
  std::vector<SpaceHandle> factors_;
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

ProductSpace product(const std::vector<SpaceHandle>& factors);
ProductSpace product(const std::vector<ProductSpace>& parts);
ProductSpace power(const SpaceHandle& space, std::size_t n);

/// A state on a product space: dense row-major tensor, system 1 slowest.
/// Entries lie in [0,1] and every product test sums to 1; signalling states
/// are allowed.
class JointState {
 public:
  JointState(ProductSpace product, std::vector<double> tensor, double tol = kTol);

  const ProductSpace& product() const noexcept { return product_; }
  const std::vector<double>& tensor() const noexcept { return tensor_; }
  std::size_t n() const noexcept { return product_.n(); }
  double at(const std::vector<std::size_t>& outcomes) const { return tensor_[product_.flat_index(outcomes)]; }

 private:
  ProductSpace product_;
  std::vector<double> tensor_;
};

/// Wraps a single-system state as a one-factor joint state.
JointState as_joint(const State& state);
/// Inverse of as_joint for n == 1.
State as_state(const JointState& js, double tol = kTol);

JointState direct_product(const std::vector<State>& states);

/// Deviation of one system's test choice on the statistics of the rest.
struct SplitViolation {
  std::vector<std::size_t> source;    // systems whose test choice was varied (0-based)
  std::vector<std::size_t> affected;  // systems whose statistics moved
  double magnitude = 0.0;
};

struct NonsignallingReport {
  bool pass = true;
  double worst = 0.0;
  /// One entry per split that exceeds the tolerance.
  std::vector<SplitViolation> violations;
  /// Worst deviation for every examined split (violating or not).
  std::vector<SplitViolation> splits;
};

/// Checks nonsignalling via single-system deviations: for every system j and
/// every fixed outcome tuple of the others, the sum over a test of j must not
/// depend on the test. Summing one system at a time shows this is equivalent
/// to requiring it for every subset of systems.
NonsignallingReport check_nonsignalling(const JointState& js, double tol = kTol);

/// The full subset-wise condition: every nonempty subset of systems, every
/// outcome tuple outside it, every pair of test tuples on it. Exponential;
/// used to cross-check check_nonsignalling on small cases.
NonsignallingReport check_nonsignalling_exhaustive(const JointState& js, double tol = kTol);

/// Marginal on `keep` (0-based, sorted, nonempty). The discarded systems are
/// summed over every combination of their tests; if the results disagree by
/// more than `tol` the state signals across the split and SignallingState is
/// thrown.
JointState marginal(const JointState& js, const std::vector<std::size_t>& keep, double tol = kTol);

/// Conditional state of system 2 given outcome `e` of system 1.
/// Throws SignallingState, ZeroProbabilityOutcome.
State conditional(const JointState& js, OutcomeRef e, double tol = kTol);

/// Dense real tensor with shape; row-major, first index slowest.
struct CoordinateTensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

/// Entry (i_1..i_n) = (a_{i_1} x ... x a_{i_n})(js). One frame per factor.
/// Throws SignallingState.
CoordinateTensor tensor_coordinates(const std::vector<Frame>& frames, const JointState& js, double tol = kTol);
/// Single frame applied to every factor of a power space.
CoordinateTensor tensor_coordinates(const Frame& frame, const JointState& js, double tol = kTol);

/// Raw inverse of tensor_coordinates (may lie outside the state set).
std::vector<double> reconstruct_tensor(const std::vector<Frame>& frames, const CoordinateTensor& coords);
JointState tensor_reconstruct(const std::vector<Frame>& frames, const CoordinateTensor& coords, double tol = kTol);

using Permutation = std::vector<std::size_t>;

/// Result entry at (e_1..e_n) equals the input entry at (e_{pi(1)}..e_{pi(n)}).
/// Requires identical factors.
JointState permute(const JointState& js, const Permutation& pi);
/// (a o b)(i) = a(b(i)). permute(permute(js, p), q) == permute(js, compose(q, p)).
Permutation compose(const Permutation& a, const Permutation& b);

struct SymmetryReport {
  bool symmetric = true;
  double deviation = 0.0;
};

/// Max deviation under adjacent transpositions (they generate S_n).
SymmetryReport is_symmetric(const JointState& js, double tol = kTol);

/// Average over all n! permutations; n <= 6.
JointState symmetrize(const JointState& js);

/// Sums the entries with pairwise (fan-in 2) reduction; fixed order.
double pairwise_sum(const double* data, std::size_t count);

}  // namespace finetti
