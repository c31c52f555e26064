#include <doctest.h>

#include <numeric>

#include "finetti/composite.hpp"
#include "finetti/errors.hpp"
#include "finetti/random.hpp"
#include "oracles.hpp"

using namespace finetti;
using Eigen::VectorXd;

namespace {
State st(const SpaceHandle& h, std::vector<double> p) {
  return State(h, Eigen::Map<VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
}

std::vector<double> probs(const State& s) { return {s.probs().begin(), s.probs().end()}; }

/// Convex mixture of `k` random direct products of random states.
JointState random_ns(const std::vector<SpaceHandle>& factors, Rng& rng, std::size_t k = 3) {
  std::vector<double> acc;
  const auto w = rng.dirichlet(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<State> parts;
    for (const auto& h : factors) parts.push_back(random_convex_state(vertices(h), rng));
    const auto js = direct_product(parts);
    if (acc.empty()) acc.assign(js.tensor().size(), 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w[c] * js.tensor()[i];
  }
  return JointState(ProductSpace(factors), acc);
}
}  // namespace

TEST_CASE("product spaces") {
  const auto c2 = share(make_classical(2));
  const auto pr = share(make_process(2, 2));
  const auto p3 = power(c2, 3);
  CHECK(p3.size() == 8);
  CHECK(p3.test_count() == 1);
  const auto pp = product({pr, pr});
  CHECK(pp.size() == 16);
  CHECK(pp.test_count() == 4);

  const auto c3 = share(make_classical(3));
  const auto left = product({product({c2, pr}), product({c3})});
  const auto right = product({product({c2}), product({pr, c3})});
  CHECK(left == right);
  CHECK(left.n() == 3);
  CHECK(left.strides() == std::vector<std::size_t>{12, 3, 1});
  CHECK(left.unflatten(left.flat_index({1, 2, 0})) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("direct products") {
  const auto c2 = share(make_classical(2));
  const auto js = direct_product({st(c2, {0, 1}), st(c2, {1, 0})});
  CHECK(js.tensor() == std::vector<double>{0, 0, 1, 0});
  const auto u = direct_product({st(c2, {0.5, 0.5}), st(c2, {0.5, 0.5})});
  CHECK(u.tensor() == std::vector<double>(4, 0.25));

  const auto f = share(make_fig1());
  Rng rng(42);
  const auto a = random_convex_state(vertices(f), rng);
  const auto b = random_convex_state(vertices(c2), rng);
  const auto ab = direct_product({a, b});
  CHECK(check_nonsignalling(ab).pass);
  CHECK(oracle::max_abs_diff(marginal(ab, {0}).tensor(), probs(a)) < 1e-12);
  CHECK(oracle::max_abs_diff(marginal(ab, {1}).tensor(), probs(b)) < 1e-12);
}

TEST_CASE("PR box is nonsignalling") {
  const auto pr = oracle::pr_box();
  CHECK(oracle::two_party_signalling(pr, 0) == 0.0);
  CHECK(oracle::two_party_signalling(pr, 1) == 0.0);
  const auto r = check_nonsignalling(pr);
  CHECK(r.pass);
  CHECK(r.worst < 1e-12);
  CHECK(check_nonsignalling_exhaustive(pr).pass);

  // Marginal: uniform output for each input.
  const auto m = marginal(pr, {0});
  CHECK(oracle::max_abs_diff(m.tensor(), {0.5, 0.5, 0.5, 0.5}) < 1e-12);
}

TEST_CASE("one-way signalling box") {
  const auto ow = oracle::one_way_box();
  CHECK(oracle::two_party_signalling(ow, 1) == 1.0);
  CHECK(oracle::two_party_signalling(ow, 0) == 0.0);

  const auto r = check_nonsignalling(ow);
  CHECK_FALSE(r.pass);
  CHECK(r.worst == doctest::Approx(1.0));
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].source == std::vector<std::size_t>{0});
  CHECK(r.violations[0].affected == std::vector<std::size_t>{1});
  CHECK(r.violations[0].magnitude == doctest::Approx(1.0));

  try {
    (void)marginal(ow, {1});
    FAIL("expected SignallingState");
  } catch (const SignallingState& e) {
    CHECK(e.magnitude() == doctest::Approx(1.0));
    CHECK(e.source() == std::vector<std::size_t>{0});
    CHECK(e.affected() == std::vector<std::size_t>{1});
  }
  CHECK(oracle::max_abs_diff(marginal(ow, {0}).tensor(), {0.5, 0.5, 0.5, 0.5}) < 1e-12);
  CHECK_THROWS_AS(tensor_coordinates(build_frame(share(make_process(2, 2))), ow), SignallingState);
}

TEST_CASE("single-system check agrees with the full subset check") {
  Rng rng(42);
  const auto c2 = share(make_classical(2));
  const auto pr = share(make_process(2, 2));
  const auto f = share(make_fig1());
  const std::vector<std::vector<SpaceHandle>> shapes = {{pr, pr}, {pr, f}, {f, c2, pr}, {pr, pr, pr}};
  for (const auto& shape : shapes) {
    for (int i = 0; i < 5; ++i) {
      const auto ns = random_ns(shape, rng);
      CHECK(check_nonsignalling(ns).pass);
      CHECK(check_nonsignalling_exhaustive(ns).pass);
    }
  }
  // Signalling states: both verdicts and worst magnitudes agree.
  for (const auto& js : {oracle::one_way_box(), JointState(ProductSpace({pr, pr}), std::vector<double>{
                                                                0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5,
                                                                0.5, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0})}) {
    const auto fast = check_nonsignalling(js);
    const auto full = check_nonsignalling_exhaustive(js);
    CHECK(fast.pass == full.pass);
    CHECK(fast.worst == doctest::Approx(full.worst));
  }
  // Three-party: the third system copies the first one's input.
  std::vector<double> t(64, 0.0);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b)
            t[oracle::proc(2, a, x) * 16 + oracle::proc(2, b, y) * 4 + oracle::proc(2, x, z)] = 0.25;
  const JointState three(ProductSpace({pr, pr, pr}), t);
  CHECK_FALSE(check_nonsignalling(three).pass);
  CHECK_FALSE(check_nonsignalling_exhaustive(three).pass);
  // Magnitudes differ here: the subset sums over systems {1,2} spread by 1, single-system sums by 1/2.
  CHECK(check_nonsignalling(three).worst == doctest::Approx(0.5));
  CHECK(check_nonsignalling_exhaustive(three).worst == doctest::Approx(1.0));
  CHECK_NOTHROW(marginal(three, {0, 1}));
  CHECK_THROWS_AS(marginal(three, {1, 2}), SignallingState);
}

TEST_CASE("marginals") {
  Rng rng(42);
  const auto pr = share(make_process(2, 3));
  const auto f = share(make_fig1());
  const auto js = random_ns({pr, f, pr}, rng);
  for (std::size_t k = 1; k <= 3; ++k) {
    std::vector<std::size_t> keep(k);
    std::iota(keep.begin(), keep.end(), 0);
    CHECK(oracle::max_abs_diff(marginal(js, keep).tensor(), oracle::leading_marginal(js, k)) < 1e-12);
  }
  CHECK(marginal(js, {0, 2}).product() == ProductSpace({pr, pr}));
  CHECK_THROWS_AS(marginal(js, {}), InvalidArgument);
  CHECK_THROWS_AS(marginal(js, {2, 0}), InvalidArgument);
  CHECK_THROWS_AS(marginal(js, {5}), InvalidArgument);
}

TEST_CASE("conditional states") {
  const auto c2 = share(make_classical(2));
  const auto a = st(c2, {0.3, 0.7});
  const auto b = st(c2, {0.9, 0.1});
  CHECK(oracle::max_abs_diff(probs(conditional(direct_product({a, b}), {1})), probs(b)) < 1e-12);

  const JointState corr(power(c2, 2), {0.5, 0, 0, 0.5});
  CHECK(oracle::max_abs_diff(probs(conditional(corr, {0})), {1, 0}) < 1e-12);

  // PR box: given a=0 at x=0, b = x y = 0 for both y.
  const auto pr = oracle::pr_box();
  const auto c = conditional(pr, {oracle::proc(2, 0, 0)});
  CHECK(oracle::max_abs_diff(probs(c), {1, 0, 1, 0}) < 1e-12);
  // Given a=0 at x=1, b = y: output equals input.
  const auto c1 = conditional(pr, {oracle::proc(2, 0, 1)});
  CHECK(oracle::max_abs_diff(probs(c1), {1, 0, 0, 1}) < 1e-12);

  // Reconstruction identity on a random nonsignalling state.
  Rng rng(42);
  const auto f = share(make_fig1());
  const auto js = random_ns({f, f}, rng);
  const auto m1 = marginal(js, {0});
  for (std::size_t e = 0; e < 7; ++e) {
    const auto ce = conditional(js, {e});
    for (std::size_t g = 0; g < 7; ++g) CHECK(std::abs(js.at({e, g}) - m1.tensor()[e] * ce[g]) < 1e-9);
  }
}

TEST_CASE("conditional errors") {
  const auto c2 = share(make_classical(2));
  const JointState pt(power(c2, 2), {1, 0, 0, 0});
  CHECK_THROWS_AS(conditional(pt, {1}), ZeroProbabilityOutcome);
  const auto ow = oracle::one_way_box();
  CHECK_THROWS_AS(conditional(ow, {0}), SignallingState);
  CHECK_THROWS_AS(conditional(JointState(power(c2, 3), std::vector<double>(8, 0.125)), {0}), DimensionMismatch);
}

TEST_CASE("tensor coordinates") {
  Rng rng(42);
  const auto c3 = share(make_classical(3));
  const auto f = share(make_fig1());
  const auto ff = build_frame(f);

  // Product: outer product of local coordinates.
  const auto a = random_convex_state(vertices(f), rng);
  const auto b = random_convex_state(vertices(f), rng);
  const auto ct = tensor_coordinates(ff, direct_product({a, b}));
  const VectorXd ca = frame_coordinates(ff, a);
  const VectorXd cb = frame_coordinates(ff, b);
  REQUIRE(ct.shape == std::vector<std::size_t>{5, 5});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(ct.data[i * 5 + j] - ca(static_cast<Eigen::Index>(i)) * cb(static_cast<Eigen::Index>(j))) < 1e-12);

  // Classical distribution with the indicator frame: identity.
  const auto idf = Frame::from_covectors(c3, Eigen::MatrixXd::Identity(3, 3), 0.0);
  const auto cl = random_ns({c3, c3}, rng);
  CHECK(oracle::max_abs_diff(tensor_coordinates(idf, cl).data, cl.tensor()) < 1e-12);

  // PR box round trip.
  const auto pf = build_frame(share(make_process(2, 2)));
  const auto pr = oracle::pr_box();
  const auto pc = tensor_coordinates(pf, pr);
  CHECK(pc.data.size() == 9);
  CHECK(oracle::max_abs_diff(tensor_reconstruct({pf, pf}, pc).tensor(), pr.tensor()) < 1e-9);

  // Mixed factors.
  const auto p23 = share(make_process(2, 3));
  const auto js = random_ns({f, p23, c3}, rng);
  const std::vector<Frame> frames = {ff, build_frame(p23), build_frame(c3)};
  const auto cc = tensor_coordinates(frames, js);
  CHECK(oracle::max_abs_diff(reconstruct_tensor(frames, cc), js.tensor()) < 1e-9);
  CHECK_THROWS_AS(tensor_coordinates(ff, js), InvalidArgument);
}

TEST_CASE("permutations and symmetry") {
  const auto c2 = share(make_classical(2));
  const auto a = st(c2, {0.2, 0.8});
  const auto b = st(c2, {0.6, 0.4});
  CHECK(is_symmetric(direct_product({a, a})).symmetric);
  const auto ab = is_symmetric(direct_product({a, b}));
  CHECK_FALSE(ab.symmetric);
  double want = 0.0;
  for (std::size_t e = 0; e < 2; ++e)
    for (std::size_t f = 0; f < 2; ++f) want = std::max(want, std::abs(a[e] * b[f] - b[e] * a[f]));
  CHECK(ab.deviation == doctest::Approx(want).epsilon(1e-12));

  Rng rng(42);
  const auto f = share(make_fig1());
  const auto js = random_ns({f, f, f}, rng);
  CHECK_FALSE(is_symmetric(js).symmetric);
  CHECK(is_symmetric(symmetrize(js)).symmetric);

  // Definition check: entry at (e1,e2,e3) equals the original at (e_pi(1), e_pi(2), e_pi(3)).
  const Permutation p = {1, 2, 0};
  const auto pj = permute(js, p);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      for (std::size_t k = 0; k < 7; ++k) {
        const std::vector<std::size_t> e = {i, j, k};
        CHECK(pj.at(e) == js.at({e[p[0]], e[p[1]], e[p[2]]}));
      }

  // Group action, exactly.
  const std::vector<Permutation> all = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& x : all)
    for (const auto& y : all) CHECK(permute(permute(js, x), y).tensor() == permute(js, compose(y, x)).tensor());

  CHECK_THROWS_AS(permute(js, {0, 0, 1}), InvalidArgument);
  CHECK_THROWS_AS(permute(direct_product({a, st(share(make_classical(3)), {1, 0, 0})}), {1, 0}), InvalidArgument);
}

TEST_CASE("size guard") {
  const auto c = share(make_classical(100));
  CHECK_THROWS_AS(JointState(power(c, 4), {}), SizeLimitExceeded);
}
