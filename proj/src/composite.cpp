#include "finetti/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "finetti/errors.hpp"
#include "tensor_ops.hpp"

namespace finetti {

namespace detail {

std::size_t shape_size(const Shape& shape) {
  std::size_t size = 1;
  for (auto s : shape) size *= s;
  return size;
}

std::vector<double> apply_mode(const std::vector<double>& data, Shape& shape, std::size_t mode,
                               const Eigen::MatrixXd& m) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < mode; ++i) outer *= shape[i];
  for (std::size_t i = mode + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[mode];
  const auto rows = static_cast<std::size_t>(m.rows());
  std::vector<double> out(outer * rows * inner);
  std::vector<double> terms(len);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = data.data() + o * len * inner;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t in = 0; in < inner; ++in) {
        for (std::size_t e = 0; e < len; ++e)
          terms[e] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e)) * src[e * inner + in];
        out[(o * rows + r) * inner + in] = pairwise_sum(terms.data(), len);
      }
    }
  }
  shape[mode] = rows;
  return out;
}

Eigen::MatrixXd test_indicator_matrix(const TestSpace& space) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(space.test_count()),
                                            static_cast<Eigen::Index>(space.outcome_count()));
  for (std::size_t t = 0; t < space.test_count(); ++t)
    for (auto e : space.tests()[t]) s(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(e)) = 1.0;
  return s;
}

bool next_tuple(std::vector<std::size_t>& tuple, const Shape& radix) {
  for (std::size_t i = tuple.size(); i-- > 0;) {
    if (++tuple[i] < radix[i]) return true;
    tuple[i] = 0;
  }
  return false;
}

}  // namespace detail

using detail::Shape;

double pairwise_sum(const double* data, std::size_t count) {
  if (count == 0) return 0.0;
  if (count == 1) return data[0];
  if (count == 2) return data[0] + data[1];
  const std::size_t half = count / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

ProductSpace::ProductSpace(std::vector<SpaceHandle> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidArgument("ProductSpace: at least one factor required");
  for (const auto& f : factors_) {
    if (!f) throw InvalidArgument("ProductSpace: null factor");
    require_valid(*f);
    shape_.push_back(f->outcome_count());
  }
  strides_.assign(shape_.size(), 1);
  constexpr std::size_t cap = std::numeric_limits<std::size_t>::max() / 64;
  for (std::size_t i = shape_.size(); i-- > 0;) {
    strides_[i] = size_;
    size_ = std::min(cap, size_ * shape_[i]);
  }
}

std::size_t ProductSpace::test_count() const noexcept {
  std::size_t count = 1;
  for (const auto& f : factors_) count *= f->test_count();
  return count;
}

bool ProductSpace::homogeneous() const noexcept {
  return std::all_of(factors_.begin(), factors_.end(), [&](const SpaceHandle& f) { return same_space(f, factors_[0]); });
}

std::size_t ProductSpace::flat_index(const std::vector<std::size_t>& outcomes) const {
  if (outcomes.size() != n()) throw DimensionMismatch("flat_index: wrong number of systems");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i] >= shape_[i]) throw InvalidArgument("flat_index: outcome index out of range");
    flat += outcomes[i] * strides_[i];
  }
  return flat;
}

std::vector<std::size_t> ProductSpace::unflatten(std::size_t flat) const {
  std::vector<std::size_t> out(n());
  for (std::size_t i = 0; i < n(); ++i) {
    out[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return out;
}

bool operator==(const ProductSpace& a, const ProductSpace& b) {
  if (a.n() != b.n()) return false;
  for (std::size_t i = 0; i < a.n(); ++i)
    if (!same_space(a.factors_[i], b.factors_[i])) return false;
  return true;
}

ProductSpace product(const std::vector<SpaceHandle>& factors) { return ProductSpace(factors); }

ProductSpace product(const std::vector<ProductSpace>& parts) {
  std::vector<SpaceHandle> flat;
  for (const auto& p : parts) flat.insert(flat.end(), p.factors().begin(), p.factors().end());
  return ProductSpace(std::move(flat));
}

ProductSpace power(const SpaceHandle& space, std::size_t n) {
  if (n == 0) throw InvalidArgument("power: n must be at least 1");
  return ProductSpace(std::vector<SpaceHandle>(n, space));
}

namespace {

void require_tensor_size(const ProductSpace& p) {
  if (p.size() > kTensorEntryLimit)
    throw SizeLimitExceeded("joint tensor would hold " + std::to_string(p.size()) + " entries; limit is " +
                            std::to_string(kTensorEntryLimit));
}

// Sums of the tensor over every product test, indexed by test tuple.
std::vector<double> product_test_sums(const ProductSpace& p, const std::vector<double>& tensor) {
  Shape shape = p.shape();
  std::vector<double> data = tensor;
  for (std::size_t i = 0; i < p.n(); ++i) data = detail::apply_mode(data, shape, i, detail::test_indicator_matrix(p.factor(i)));
  return data;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& subset, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(subset.begin(), subset.end(), i) == subset.end()) out.push_back(i);
  return out;
}

// Applies test indicators on `systems`; then for every fixed index of the
// remaining axes reports max - min across the test tuples of `systems`.
double test_choice_spread(const ProductSpace& p, const std::vector<double>& tensor,
                          const std::vector<std::size_t>& systems) {
  Shape shape = p.shape();
  std::vector<double> data = tensor;
  for (auto s : systems) data = detail::apply_mode(data, shape, s, detail::test_indicator_matrix(p.factor(s)));

  std::vector<bool> in_set(p.n(), false);
  for (auto s : systems) in_set[s] = true;
  Shape rest_shape;
  for (std::size_t i = 0; i < p.n(); ++i)
    if (!in_set[i]) rest_shape.push_back(shape[i]);
  const std::size_t rest = detail::shape_size(rest_shape);
  std::vector<double> lo(rest, std::numeric_limits<double>::infinity());
  std::vector<double> hi(rest, -std::numeric_limits<double>::infinity());

  std::vector<std::size_t> idx(p.n(), 0);
  std::size_t flat = 0;
  do {
    std::size_t r = 0;
    for (std::size_t i = 0; i < p.n(); ++i)
      if (!in_set[i]) r = r * shape[i] + idx[i];
    lo[r] = std::min(lo[r], data[flat]);
    hi[r] = std::max(hi[r], data[flat]);
    ++flat;
  } while (detail::next_tuple(idx, shape));

  double worst = 0.0;
  for (std::size_t r = 0; r < rest; ++r) worst = std::max(worst, hi[r] - lo[r]);
  return worst;
}

}  // namespace

JointState::JointState(ProductSpace product, std::vector<double> tensor, double tol)
    : product_(std::move(product)), tensor_(std::move(tensor)) {
  require_tensor_size(product_);
  if (tensor_.size() != product_.size())
    throw DimensionMismatch("JointState: tensor has " + std::to_string(tensor_.size()) + " entries, expected " +
                            std::to_string(product_.size()));
  for (std::size_t i = 0; i < tensor_.size(); ++i) {
    const double v = tensor_[i];
    if (!std::isfinite(v) || v < -1e-12 || v > 1.0 + 1e-12)
      throw InvalidArgument("JointState: entry " + std::to_string(i) + " = " + std::to_string(v) + " outside [0,1]");
    tensor_[i] = std::clamp(v, 0.0, 1.0);
  }
  const auto sums = product_test_sums(product_, tensor_);
  for (std::size_t t = 0; t < sums.size(); ++t)
    if (std::abs(sums[t] - 1.0) > tol)
      throw InvalidArgument("JointState: product test " + std::to_string(t) + " sums to " + std::to_string(sums[t]));
}

JointState as_joint(const State& state) {
  return JointState(ProductSpace({state.space()}),
                    std::vector<double>(state.probs().data(), state.probs().data() + state.probs().size()));
}

State as_state(const JointState& js, double tol) {
  if (js.n() != 1) throw DimensionMismatch("as_state: joint state has more than one system");
  return State(js.product().factors()[0],
               Eigen::Map<const Eigen::VectorXd>(js.tensor().data(), static_cast<Eigen::Index>(js.tensor().size())),
               tol);
}

JointState direct_product(const std::vector<State>& states) {
  if (states.empty()) throw InvalidArgument("direct_product: no states");
  std::vector<SpaceHandle> factors;
  for (const auto& s : states) factors.push_back(s.space());
  ProductSpace p(std::move(factors));
  require_tensor_size(p);
  std::vector<double> tensor(p.size());
  std::vector<std::size_t> idx(p.n(), 0);
  std::size_t flat = 0;
  do {
    double v = 1.0;
    for (std::size_t i = 0; i < p.n(); ++i) v *= states[i][idx[i]];
    tensor[flat++] = v;
  } while (detail::next_tuple(idx, p.shape()));
  return JointState(std::move(p), std::move(tensor));
}

NonsignallingReport check_nonsignalling(const JointState& js, double tol) {
  NonsignallingReport report;
  const auto n = js.n();
  for (std::size_t j = 0; j < n; ++j) {
    SplitViolation split{{j}, complement({j}, n), 0.0};
    if (n > 1 && js.product().factor(j).test_count() > 1)
      split.magnitude = test_choice_spread(js.product(), js.tensor(), {j});
    report.worst = std::max(report.worst, split.magnitude);
    if (split.magnitude > tol) {
      report.pass = false;
      report.violations.push_back(split);
    }
    report.splits.push_back(std::move(split));
  }
  return report;
}

NonsignallingReport check_nonsignalling_exhaustive(const JointState& js, double tol) {
  NonsignallingReport report;
  const auto n = js.n();
  if (n > 20) throw SizeLimitExceeded("check_nonsignalling_exhaustive: too many systems");
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> alpha;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) alpha.push_back(i);
    SplitViolation split{alpha, complement(alpha, n), 0.0};
    split.magnitude = test_choice_spread(js.product(), js.tensor(), alpha);
    report.worst = std::max(report.worst, split.magnitude);
    if (split.magnitude > tol) {
      report.pass = false;
      report.violations.push_back(split);
    }
    report.splits.push_back(std::move(split));
  }
  return report;
}

JointState marginal(const JointState& js, const std::vector<std::size_t>& keep, double tol) {
  const auto n = js.n();
  if (keep.empty()) throw InvalidArgument("marginal: keep at least one system");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= n) throw InvalidArgument("marginal: system index out of range");
    if (i && keep[i] <= keep[i - 1]) throw InvalidArgument("marginal: keep must be strictly increasing");
  }
  if (keep.size() == n) return js;
  const auto discard = complement(keep, n);
  const auto& p = js.product();

  Shape shape = p.shape();
  std::vector<double> data = js.tensor();
  for (auto s : discard) data = detail::apply_mode(data, shape, s, detail::test_indicator_matrix(p.factor(s)));

  // Split the reduced tensor into one kept-system block per discarded test tuple.
  Shape kept_shape, tuple_shape;
  for (auto k : keep) kept_shape.push_back(shape[k]);
  for (auto s : discard) tuple_shape.push_back(shape[s]);
  const std::size_t kept_size = detail::shape_size(kept_shape);
  const std::size_t tuples = detail::shape_size(tuple_shape);
  std::vector<std::vector<double>> blocks(tuples, std::vector<double>(kept_size));
  std::vector<std::size_t> idx(n, 0);
  std::size_t flat = 0;
  do {
    std::size_t k = 0, t = 0;
    for (auto i : keep) k = k * shape[i] + idx[i];
    for (auto i : discard) t = t * shape[i] + idx[i];
    blocks[t][k] = data[flat++];
  } while (detail::next_tuple(idx, shape));

  double spread = 0.0;
  for (std::size_t t = 1; t < tuples; ++t)
    for (std::size_t k = 0; k < kept_size; ++k) spread = std::max(spread, std::abs(blocks[t][k] - blocks[0][k]));
  if (spread > tol) throw SignallingState(discard, keep, spread);

  std::vector<SpaceHandle> factors;
  for (auto k : keep) factors.push_back(p.factors()[k]);
  return JointState(ProductSpace(std::move(factors)), std::move(blocks[0]), std::max(tol, 1e-9));
}

State conditional(const JointState& js, OutcomeRef e, double tol) {
  if (js.n() != 2) throw DimensionMismatch("conditional: expected a two-system joint state");
  const auto ns = check_nonsignalling(js, tol);
  if (!ns.pass) {
    const auto& worst = *std::max_element(ns.violations.begin(), ns.violations.end(),
                                          [](const auto& a, const auto& b) { return a.magnitude < b.magnitude; });
    throw SignallingState(worst.source, worst.affected, worst.magnitude);
  }
  const auto& p = js.product();
  if (e.index >= p.shape()[0]) throw InvalidArgument("conditional: outcome index out of range");
  const auto m = marginal(js, {0}, tol);
  const double pe = m.tensor()[e.index];
  if (pe <= 1e-12)
    throw ZeroProbabilityOutcome("conditional: outcome \"" + p.factor(0).outcomes()[e.index] +
                                 "\" has probability " + std::to_string(pe));
  Eigen::VectorXd cond(static_cast<Eigen::Index>(p.shape()[1]));
  for (std::size_t f = 0; f < p.shape()[1]; ++f) cond(static_cast<Eigen::Index>(f)) = js.at({e.index, f}) / pe;
  return State(p.factors()[1], std::move(cond), std::max(tol, 1e-9));
}

namespace {

void require_nonsignalling(const JointState& js, double tol) {
  const auto ns = check_nonsignalling(js, tol);
  if (ns.pass) return;
  const auto& worst = *std::max_element(ns.violations.begin(), ns.violations.end(),
                                        [](const auto& a, const auto& b) { return a.magnitude < b.magnitude; });
  throw SignallingState(worst.source, worst.affected, worst.magnitude);
}

}  // namespace

CoordinateTensor tensor_coordinates(const std::vector<Frame>& frames, const JointState& js, double tol) {
  const auto& p = js.product();
  if (frames.size() != p.n()) throw DimensionMismatch("tensor_coordinates: need one frame per system");
  for (std::size_t i = 0; i < p.n(); ++i)
    if (!same_space(frames[i].space(), p.factors()[i]))
      throw InvalidArgument("tensor_coordinates: frame " + std::to_string(i) + " belongs to another space");
  require_nonsignalling(js, tol);
  CoordinateTensor out{p.shape(), js.tensor()};
  for (std::size_t i = 0; i < p.n(); ++i) out.data = detail::apply_mode(out.data, out.shape, i, frames[i].covectors());
  return out;
}

CoordinateTensor tensor_coordinates(const Frame& frame, const JointState& js, double tol) {
  return tensor_coordinates(std::vector<Frame>(js.n(), frame), js, tol);
}

std::vector<double> reconstruct_tensor(const std::vector<Frame>& frames, const CoordinateTensor& coords) {
  if (frames.size() != coords.shape.size()) throw DimensionMismatch("reconstruct_tensor: need one frame per system");
  Shape shape = coords.shape;
  std::vector<double> data = coords.data;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (shape[i] != frames[i].d()) throw DimensionMismatch("reconstruct_tensor: coordinate axis does not match frame");
    data = detail::apply_mode(data, shape, i, frames[i].reconstruction());
  }
  return data;
}

JointState tensor_reconstruct(const std::vector<Frame>& frames, const CoordinateTensor& coords, double tol) {
  std::vector<SpaceHandle> factors;
  for (const auto& f : frames) factors.push_back(f.space());
  auto data = reconstruct_tensor(frames, coords);
  for (auto& v : data)
    if (std::abs(v) < 1e-13) v = 0.0;
  return JointState(ProductSpace(std::move(factors)), std::move(data), tol);
}

namespace {

void require_permutation(const Permutation& pi, std::size_t n) {
  if (pi.size() != n) throw InvalidArgument("permutation has wrong length");
  std::vector<bool> seen(n, false);
  for (auto v : pi) {
    if (v >= n || seen[v]) throw InvalidArgument("not a permutation");
    seen[v] = true;
  }
}

}  // namespace

JointState permute(const JointState& js, const Permutation& pi) {
  const auto& p = js.product();
  if (!p.homogeneous()) throw InvalidArgument("permute: factors are not identical");
  require_permutation(pi, p.n());
  std::vector<double> out(js.tensor().size());
  std::vector<std::size_t> idx(p.n(), 0), src(p.n());
  std::size_t flat = 0;
  do {
    for (std::size_t i = 0; i < p.n(); ++i) src[i] = idx[pi[i]];
    out[flat++] = js.tensor()[p.flat_index(src)];
  } while (detail::next_tuple(idx, p.shape()));
  return JointState(p, std::move(out));
}

Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw InvalidArgument("compose: length mismatch");
  require_permutation(a, a.size());
  require_permutation(b, b.size());
  Permutation out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[b[i]];
  return out;
}

SymmetryReport is_symmetric(const JointState& js, double tol) {
  const auto& p = js.product();
  if (!p.homogeneous()) throw InvalidArgument("is_symmetric: factors are not identical");
  SymmetryReport report;
  for (std::size_t k = 0; k + 1 < p.n(); ++k) {
    Permutation swap(p.n());
    std::iota(swap.begin(), swap.end(), std::size_t{0});
    std::swap(swap[k], swap[k + 1]);
    const auto moved = permute(js, swap);
    for (std::size_t i = 0; i < js.tensor().size(); ++i)
      report.deviation = std::max(report.deviation, std::abs(moved.tensor()[i] - js.tensor()[i]));
  }
  report.symmetric = report.deviation <= tol;
  return report;
}

JointState symmetrize(const JointState& js) {
  const auto& p = js.product();
  if (p.n() > 6) throw SizeLimitExceeded("symmetrize: at most 6 systems");
  Permutation pi(p.n());
  std::iota(pi.begin(), pi.end(), std::size_t{0});
  std::vector<double> acc(js.tensor().size(), 0.0);
  std::size_t count = 0;
  do {
    const auto moved = permute(js, pi);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += moved.tensor()[i];
    ++count;
  } while (std::next_permutation(pi.begin(), pi.end()));
  for (auto& v : acc) v /= static_cast<double>(count);
  return JointState(p, std::move(acc));
}

}  // namespace finetti
