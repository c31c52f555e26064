#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "finetti/test_space.hpp"

namespace finetti {

inline constexpr double kTol = 1e-9;

/// A probability assignment normalized on every test.
///
/// Entries within 1e-12 of [0,1] are clamped into it; anything further out, or
/// a test sum off by more than `tol`, throws InvalidArgument.
class State {
 public:
  State(SpaceHandle space, Eigen::VectorXd probs, double tol = kTol);

  const SpaceHandle& space() const noexcept { return space_; }
  const Eigen::VectorXd& probs() const noexcept { return probs_; }
  double operator[](std::size_t outcome) const { return probs_(static_cast<Eigen::Index>(outcome)); }

 private:
  SpaceHandle space_;
  Eigen::VectorXd probs_;
};

/// Linear description of the state polytope: equalities (one row per test,
/// right-hand side 1) plus coordinate-wise nonnegativity.
struct PolytopeConstraints {
  Eigen::MatrixXd equalities;
  Eigen::VectorXd rhs;
  std::size_t nonnegativity = 0;

  bool contains(const Eigen::VectorXd& x, double tol = kTol) const;
};

PolytopeConstraints polytope_constraints(const TestSpace& space);

/// The linear span of the states inside outcome coordinates.
///
/// span = { x : x_e = 0 for every always-zero outcome e, all test sums equal }.
/// `basis` has orthonormal columns spanning it.
struct SpanInfo {
  std::vector<std::size_t> always_zero;
  Eigen::MatrixXd basis;
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(basis.cols()); }
  /// Distance from x to the span (Euclidean).
  double distance(const Eigen::VectorXd& x) const;
};

/// Throws EmptyStateSpace when no state exists.
SpanInfo analyze_span(const TestSpace& space);

/// dim V(A). Throws EmptyStateSpace.
std::size_t dimension(const TestSpace& space);

inline constexpr std::size_t kVertexOutcomeLimit = 24;

/// Exact vertex list of the state polytope, sorted lexicographically.
/// Throws EmptyStateSpace, or SizeLimitExceeded above kVertexOutcomeLimit outcomes.
std::vector<State> vertices(const SpaceHandle& space);

/// An element of V(A), i.e. a vector in the span of the states.
class SpanVector {
 public:
  /// Verifies membership in the span to `tol`; throws InvalidArgument otherwise.
  SpanVector(SpaceHandle space, Eigen::VectorXd coeffs, const SpanInfo& span, double tol = kTol);
  SpanVector(SpaceHandle space, Eigen::VectorXd coeffs, double tol = kTol);
  explicit SpanVector(const State& state) : space_(state.space()), coeffs_(state.probs()) {}

  const SpaceHandle& space() const noexcept { return space_; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }

 private:
  SpaceHandle space_;
  Eigen::VectorXd coeffs_;
};

/// Element of V*(A) represented by a covector over all outcomes. Two
/// covectors that agree on the span are the same functional.
struct Functional {
  Eigen::VectorXd covector;
  double operator()(const Eigen::VectorXd& v) const { return covector.dot(v); }
  double operator()(const SpanVector& v) const { return covector.dot(v.coeffs()); }
};

/// Informationally complete set a_1..a_d: independent on V(A), each within
/// [0,1] on states, summing to the unit functional.
class Frame {
 public:
  const SpaceHandle& space() const noexcept { return space_; }
  std::size_t d() const noexcept { return static_cast<std::size_t>(covectors_.rows()); }
  /// The constant c subtracted before rescaling.
  double shift() const noexcept { return shift_; }
  /// d x |E| matrix; row i is a_i.
  const Eigen::MatrixXd& covectors() const noexcept { return covectors_; }
  Functional member(std::size_t i) const { return {covectors_.row(static_cast<Eigen::Index>(i)).transpose()}; }
  const SpanInfo& span() const noexcept { return span_; }
  /// |E| x d matrix mapping frame coordinates back to V(A).
  const Eigen::MatrixXd& reconstruction() const noexcept { return reconstruction_; }

  /// Builds a frame from explicit covectors (used when reading frame files).
  /// Throws NumericalFailure when the members are dependent on V(A).
  static Frame from_covectors(SpaceHandle space, Eigen::MatrixXd covectors, double shift);

 private:
  friend Frame build_frame(const SpaceHandle& space, double tol);
  Frame(SpaceHandle space, SpanInfo span, Eigen::MatrixXd covectors, double shift);

  SpaceHandle space_;
  SpanInfo span_;
  Eigen::MatrixXd covectors_;
  Eigen::MatrixXd reconstruction_;
  double shift_ = 0.0;
};

/// Constructs an informationally complete frame:
///  1. outcome indicators chosen greedily by pivoted elimination form a basis b_i;
///  2. one member is replaced by u - sum of the others so the set sums to u;
///  3. c = min_i min_states b~_i, each minimum an LP over the polytope;
///  4. a_i = (b~_i - c u) / (1 - d c).
/// Throws EmptyStateSpace, or NumericalFailure when no well-conditioned basis exists.
Frame build_frame(const SpaceHandle& space, double tol = kTol);

Eigen::VectorXd frame_coordinates(const Frame& frame, const SpanVector& v);
Eigen::VectorXd frame_coordinates(const Frame& frame, const State& state);

/// The unique element of V(A) with the given frame coordinates. It need not be
/// a state; check with is_state().
SpanVector inverse_coordinates(const Frame& frame, const Eigen::VectorXd& coords);

struct StateCheck {
  bool ok = true;
  std::optional<std::size_t> negative_outcome;
  std::optional<std::size_t> violated_test;
  /// Most negative entry, or worst test-sum error.
  double magnitude = 0.0;
  explicit operator bool() const noexcept { return ok; }
};

/// True iff every coordinate is >= -tol and every test sums to 1 within tol.
/// On failure reports the most negative outcome and/or the worst test.
StateCheck is_state(const TestSpace& space, const Eigen::VectorXd& v, double tol = kTol);
inline StateCheck is_state(const SpanVector& v, double tol = kTol) { return is_state(*v.space(), v.coeffs(), tol); }

}  // namespace finetti
