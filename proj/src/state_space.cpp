#include "finetti/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "finetti/errors.hpp"
#include "finetti/lp.hpp"

namespace finetti {

namespace {

constexpr double kClamp = 1e-12;
constexpr double kConditionLimit = 1e10;
constexpr double kLpTol = 1e-7;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

Eigen::MatrixXd test_matrix(const TestSpace& space) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ix(space.test_count()), ix(space.outcome_count()));
  for (std::size_t t = 0; t < space.test_count(); ++t)
    for (auto e : space.tests()[t]) a(ix(t), ix(e)) = 1.0;
  return a;
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smallest = s(s.size() - 1);
  return smallest <= 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smallest;
}

}  // namespace

State::State(SpaceHandle space, Eigen::VectorXd probs, double tol) : space_(std::move(space)), probs_(std::move(probs)) {
  if (!space_) throw InvalidArgument("State: null test space");
  require_valid(*space_);
  if (static_cast<std::size_t>(probs_.size()) != space_->outcome_count())
    throw DimensionMismatch("State: expected " + std::to_string(space_->outcome_count()) + " probabilities, got " +
                            std::to_string(probs_.size()));
  for (Eigen::Index e = 0; e < probs_.size(); ++e) {
    const double p = probs_(e);
    if (!std::isfinite(p) || p < -kClamp || p > 1.0 + kClamp)
      throw InvalidArgument("State: probability of outcome \"" + space_->outcomes()[static_cast<std::size_t>(e)] +
                            "\" is " + std::to_string(p) + ", outside [0,1]");
    probs_(e) = std::clamp(p, 0.0, 1.0);
  }
  for (std::size_t t = 0; t < space_->test_count(); ++t) {
    double sum = 0.0;
    for (auto e : space_->tests()[t]) sum += probs_(ix(e));
    if (std::abs(sum - 1.0) > tol)
      throw InvalidArgument("State: test " + std::to_string(t) + " sums to " + std::to_string(sum) + ", not 1");
  }
}

bool PolytopeConstraints::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != equalities.cols()) return false;
  if ((x.array() < -tol).any()) return false;
  return ((equalities * x - rhs).array().abs() <= tol).all();
}

PolytopeConstraints polytope_constraints(const TestSpace& space) {
  require_valid(space);
  PolytopeConstraints pc;
  pc.equalities = test_matrix(space);
  pc.rhs = Eigen::VectorXd::Ones(ix(space.test_count()));
  pc.nonnegativity = space.outcome_count();
  return pc;
}

double SpanInfo::distance(const Eigen::VectorXd& x) const {
  if (basis.cols() == 0) return x.norm();
  return (x - basis * (basis.transpose() * x)).norm();
}

SpanInfo analyze_span(const TestSpace& space) {
  const auto pc = polytope_constraints(space);
  const std::size_t n = space.outcome_count();

  // Outcomes that vanish on every state: maximize x_e for each e not yet seen
  // positive. Every LP optimum also certifies its own positive coordinates.
  std::vector<bool> positive(n, false);
  std::vector<std::size_t> zero;
  bool feasible_checked = false;
  for (std::size_t e = 0; e < n; ++e) {
    if (positive[e]) continue;
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(ix(n));
    cost(ix(e)) = -1.0;
    const auto res = lp::minimize(cost, pc.equalities, pc.rhs);
    if (res.status == lp::Status::Infeasible) throw EmptyStateSpace();
    if (res.status != lp::Status::Optimal) throw NumericalFailure("analyze_span: LP did not converge");
    feasible_checked = true;
    for (std::size_t f = 0; f < n; ++f)
      if (res.x(ix(f)) > kLpTol) positive[f] = true;
    if (!positive[e]) zero.push_back(e);
  }
  if (!feasible_checked) {
    const auto res = lp::minimize(Eigen::VectorXd::Zero(ix(n)), pc.equalities, pc.rhs);
    if (res.status == lp::Status::Infeasible) throw EmptyStateSpace();
  }

  // span = { x : x_z = 0 for z in zero, (s_t - s_0) . x = 0 for t > 0 }.
  const std::size_t rows = zero.size() + space.test_count() - 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ix(rows), ix(n));
  std::size_t r = 0;
  for (auto z : zero) c(ix(r++), ix(z)) = 1.0;
  for (std::size_t t = 1; t < space.test_count(); ++t, ++r)
    c.row(ix(r)) = pc.equalities.row(ix(t)) - pc.equalities.row(0);

  SpanInfo info;
  info.always_zero = std::move(zero);
  if (rows == 0) {
    info.basis = Eigen::MatrixXd::Identity(ix(n), ix(n));
    return info;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  info.basis = svd.matrixV().rightCols(ix(n) - rank);
  return info;
}

std::size_t dimension(const TestSpace& space) { return analyze_span(space).dimension(); }

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-9) return a(i) < b(i);
  }
  return false;
}

// Depth-first search over linearly independent column sets of the test
// matrix. Each independent set S whose system A_S x = 1 has a strictly
// positive solution is the support of exactly one vertex.
void enumerate_supports(const Eigen::MatrixXd& a, std::vector<Eigen::Index>& chosen, Eigen::Index next,
                        std::vector<Eigen::VectorXd>& out) {
  const Eigen::Index n = a.cols();
  for (Eigen::Index j = next; j < n; ++j) {
    chosen.push_back(j);
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k) sub.col(ix(k)) = a.col(chosen[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    if (qr.rank() == sub.cols()) {
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(a.rows());
      const Eigen::VectorXd x = qr.solve(ones);
      if ((sub * x - ones).norm() <= 1e-9 && (x.array() > 1e-12).all()) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < chosen.size(); ++k) v(chosen[k]) = x(ix(k));
        out.push_back(std::move(v));
      }
      if (sub.cols() < a.rows()) enumerate_supports(a, chosen, j + 1, out);
    }
    chosen.pop_back();
  }
}

}  // namespace

std::vector<State> vertices(const SpaceHandle& space) {
  require_valid(*space);
  if (space->outcome_count() > kVertexOutcomeLimit)
    throw SizeLimitExceeded("vertices: " + std::to_string(space->outcome_count()) + " outcomes exceed the limit of " +
                            std::to_string(kVertexOutcomeLimit));
  const Eigen::MatrixXd a = test_matrix(*space);
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::Index> chosen;
  enumerate_supports(a, chosen, 0, points);
  if (points.empty()) throw EmptyStateSpace();
  std::sort(points.begin(), points.end(), lex_less);
  std::vector<State> result;
  result.reserve(points.size());
  for (auto& p : points) result.emplace_back(space, std::move(p));
  return result;
}

SpanVector::SpanVector(SpaceHandle space, Eigen::VectorXd coeffs, const SpanInfo& span, double tol)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (!space_) throw InvalidArgument("SpanVector: null test space");
  if (static_cast<std::size_t>(coeffs_.size()) != space_->outcome_count())
    throw DimensionMismatch("SpanVector: coefficient count does not match outcome count");
  const double dist = span.distance(coeffs_);
  if (dist > tol) throw InvalidArgument("SpanVector: vector lies " + std::to_string(dist) + " outside span of states");
}

SpanVector::SpanVector(SpaceHandle space, Eigen::VectorXd coeffs, double tol)
    : SpanVector(space, std::move(coeffs), analyze_span(*space), tol) {}

Frame::Frame(SpaceHandle space, SpanInfo span, Eigen::MatrixXd covectors, double shift)
    : space_(std::move(space)), span_(std::move(span)), covectors_(std::move(covectors)), shift_(shift) {
  const Eigen::MatrixXd restricted = covectors_ * span_.basis;  // d x d
  if (restricted.rows() != restricted.cols())
    throw NumericalFailure("Frame: member count " + std::to_string(restricted.rows()) + " differs from dimension " +
                           std::to_string(restricted.cols()));
  if (condition_number(restricted) > kConditionLimit)
    throw NumericalFailure("Frame: members are linearly dependent on the span of states");
  reconstruction_ = span_.basis * restricted.inverse();
}

Frame Frame::from_covectors(SpaceHandle space, Eigen::MatrixXd covectors, double shift) {
  auto span = analyze_span(*space);
  if (static_cast<std::size_t>(covectors.cols()) != space->outcome_count())
    throw DimensionMismatch("Frame: covector length does not match outcome count");
  return Frame(std::move(space), std::move(span), std::move(covectors), shift);
}

Frame build_frame(const SpaceHandle& space, double tol) {
  (void)tol;
  SpanInfo span = analyze_span(*space);
  const Eigen::Index d = span.basis.cols();
  const Eigen::Index n = span.basis.rows();
  const auto pc = polytope_constraints(*space);
  const Eigen::VectorXd unit = pc.equalities.row(0).transpose();  // equals 1 on every state

  if (d == 1) {
    // A single state: u alone is the frame and the shift is vacuous.
    return Frame(space, std::move(span), unit.transpose(), 0.0);
  }

  // (1) Outcome indicators: column-pivoted QR of Q^T picks d outcomes whose
  // restrictions to the span are independent and well spread.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span.basis.transpose());
  std::vector<Eigen::Index> picked;
  for (Eigen::Index k = 0; k < d; ++k) picked.push_back(qr.colsPermutation().indices()(k));
  std::sort(picked.begin(), picked.end());
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, n);
  for (Eigen::Index k = 0; k < d; ++k) basis(k, picked[static_cast<std::size_t>(k)]) = 1.0;

  // (2) Replace one member by u minus the rest. Expanding u in the basis
  // shows which replacements keep independence; try the last member first.
  const Eigen::MatrixXd restricted = basis * span.basis;
  const Eigen::VectorXd alpha = restricted.transpose().fullPivLu().solve(span.basis.transpose() * unit);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end() - 1,
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(alpha(a)) > std::abs(alpha(b)); });
  std::rotate(order.begin(), order.end() - 1, order.end());

  Eigen::MatrixXd tilde;
  bool found = false;
  for (auto j : order) {
    if (std::abs(alpha(j)) < 1e-12) continue;
    tilde = basis;
    Eigen::VectorXd rest = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < d; ++k)
      if (k != j) rest += basis.row(k).transpose();
    tilde.row(j) = (unit - rest).transpose();
    if (condition_number(tilde * span.basis) < kConditionLimit) {
      found = true;
      break;
    }
  }
  if (!found) throw NumericalFailure("build_frame: no well-conditioned completion of the basis to the unit functional");

  // (3) c = min over members and states, one LP per member.
  double c = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto res = lp::minimize(tilde.row(i).transpose(), pc.equalities, pc.rhs);
    if (res.status == lp::Status::Infeasible) throw EmptyStateSpace();
    if (res.status != lp::Status::Optimal) throw NumericalFailure("build_frame: LP for member minimum failed");
    c = std::min(c, res.objective);
  }

  // (4) a_i = (b~_i - c u) / (1 - d c).
  const double scale = 1.0 - static_cast<double>(d) * c;
  if (!(scale > 0.0)) throw NumericalFailure("build_frame: 1 - d c is not positive");
  Eigen::MatrixXd members = (tilde - Eigen::VectorXd::Ones(d) * (c * unit.transpose())) / scale;
  return Frame(space, std::move(span), std::move(members), c);
}

Eigen::VectorXd frame_coordinates(const Frame& frame, const SpanVector& v) {
  if (!same_space(frame.space(), v.space())) throw InvalidArgument("frame_coordinates: vector lives on another space");
  return frame.covectors() * v.coeffs();
}

Eigen::VectorXd frame_coordinates(const Frame& frame, const State& state) {
  if (!same_space(frame.space(), state.space()))
    throw InvalidArgument("frame_coordinates: state lives on another space");
  return frame.covectors() * state.probs();
}

SpanVector inverse_coordinates(const Frame& frame, const Eigen::VectorXd& coords) {
  if (static_cast<std::size_t>(coords.size()) != frame.d())
    throw DimensionMismatch("inverse_coordinates: expected " + std::to_string(frame.d()) + " coordinates");
  return SpanVector(frame.space(), frame.reconstruction() * coords, frame.span());
}

StateCheck is_state(const TestSpace& space, const Eigen::VectorXd& v, double tol) {
  StateCheck check;
  if (static_cast<std::size_t>(v.size()) != space.outcome_count())
    throw DimensionMismatch("is_state: coefficient count does not match outcome count");
  Eigen::Index worst = 0;
  const double low = v.size() ? v.minCoeff(&worst) : 0.0;
  if (low < -tol) {
    check.ok = false;
    check.negative_outcome = static_cast<std::size_t>(worst);
    check.magnitude = low;
  }
  double worst_sum = 0.0;
  for (std::size_t t = 0; t < space.test_count(); ++t) {
    double sum = 0.0;
    for (auto e : space.tests()[t]) sum += v(ix(e));
    const double err = std::abs(sum - 1.0);
    if (err > tol && err > worst_sum) {
      worst_sum = err;
      check.ok = false;
      check.violated_test = t;
      if (!check.negative_outcome) check.magnitude = err;
    }
  }
  return check;
}

}  // namespace finetti
