#include "finetti/definetti.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "finetti/errors.hpp"
#include "finetti/random.hpp"
#include "finetti/simplex_ls.hpp"
#include "tensor_ops.hpp"

namespace finetti {

namespace {

constexpr double kSameState = 1e-9;
constexpr double kPrune = 1e-10;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

bool same_probs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() <= kSameState;
}

// omega^{(x)n} as a flat row-major vector.
std::vector<double> tensor_power(const Eigen::VectorXd& p, std::size_t n) {
  std::vector<double> out{1.0};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> next;
    next.reserve(out.size() * static_cast<std::size_t>(p.size()));
    for (double v : out)
      for (Eigen::Index e = 0; e < p.size(); ++e) next.push_back(v * p(e));
    out = std::move(next);
  }
  return out;
}

}  // namespace

Mixture::Mixture(SpaceHandle space, std::vector<Component> components, double tol) : space_(std::move(space)) {
  if (!space_) throw InvalidArgument("Mixture: null space");
  if (components.empty()) throw InvalidArgument("Mixture: no components");
  double total = 0.0;
  for (auto& c : components) {
    if (!same_space(c.state.space(), space_)) throw InvalidArgument("Mixture: component lives on another space");
    if (!(c.weight > 0.0) || c.weight > 1.0 + tol)
      throw InvalidArgument("Mixture: weight " + std::to_string(c.weight) + " outside (0,1]");
    total += c.weight;
    auto dup = std::find_if(components_.begin(), components_.end(),
                            [&](const Component& k) { return same_probs(k.state.probs(), c.state.probs()); });
    if (dup != components_.end())
      dup->weight += c.weight;
    else
      components_.push_back(std::move(c));
  }
  if (std::abs(total - 1.0) > tol) throw InvalidArgument("Mixture: weights sum to " + std::to_string(total));
}

State Mixture::predictive() const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(components_.front().state.probs().size());
  for (const auto& c : components_) p += c.weight * c.state.probs();
  return State(space_, std::move(p));
}

SequencePrefix::SequencePrefix(std::vector<JointState> states) : states_(std::move(states)) {
  if (states_.empty()) throw InvalidArgument("SequencePrefix: empty");
  const auto& base = states_.front().product().factors().front();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& p = states_[i].product();
    if (p.n() != i + 1)
      throw InvalidArgument("SequencePrefix: entry " + std::to_string(i) + " has " + std::to_string(p.n()) +
                            " systems, expected " + std::to_string(i + 1));
    for (const auto& f : p.factors())
      if (!same_space(f, base)) throw InvalidArgument("SequencePrefix: mixed test spaces");
  }
}

ExchangeabilityReport check_exchangeable(const SequencePrefix& prefix, double tol) {
  ExchangeabilityReport report;
  const auto& states = prefix.states();
  auto record = [&](std::size_t n, int clause, double dev, const std::string& what) {
    report.worst_deviation = std::max(report.worst_deviation, dev);
    if (dev <= tol) return;
    report.prefix_consistent = false;
    report.failures.push_back(
        {n, clause, dev, "exchangeability clause " + std::to_string(clause) + ": " + what + " " + sci(dev) + " at n=" + std::to_string(n)});
  };
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::size_t n = i + 1;
    const auto& js = states[i];
    record(n, 1, is_symmetric(js, tol).deviation, "symmetry deviation");
    record(n, 2, check_nonsignalling(js, tol).worst, "signalling deviation");
    if (i + 1 < states.size()) {
      const auto& next = states[i + 1];
      const auto& space = next.product().factor(n);
      detail::Shape shape = next.product().shape();
      const auto sums =
          detail::apply_mode(next.tensor(), shape, n, detail::test_indicator_matrix(space));  // [..., test]
      const std::size_t tests = space.test_count();
      double dev = 0.0;
      for (std::size_t k = 0; k < js.tensor().size(); ++k)
        for (std::size_t t = 0; t < tests; ++t) dev = std::max(dev, std::abs(sums[k * tests + t] - js.tensor()[k]));
      record(n, 3, dev, "marginal mismatch");
    }
  }
  return report;
}

JointState generate_exchangeable(const Mixture& mixture, std::size_t n) {
  ProductSpace p = power(mixture.space(), n);
  if (p.size() > kTensorEntryLimit)
    throw SizeLimitExceeded("generate_exchangeable: tensor would hold " + std::to_string(p.size()) + " entries");
  std::vector<double> tensor(p.size(), 0.0);
  for (const auto& c : mixture.components()) {
    const auto term = tensor_power(c.state.probs(), n);
    for (std::size_t i = 0; i < tensor.size(); ++i) tensor[i] += c.weight * term[i];
  }
  return JointState(std::move(p), std::move(tensor));
}

ClassicalDist induced_classical(const Frame& frame, const JointState& js, double tol) {
  auto coords = tensor_coordinates(frame, js, tol);
  for (auto& v : coords.data)
    if (v < 0.0 && v >= -tol) v = 0.0;
  return {js.n(), frame.d(), std::move(coords.data)};
}

RecoveryResult recover_mixture(const JointState& js, const RecoveryOptions& options) {
  const auto& p = js.product();
  if (!p.homogeneous()) throw InvalidArgument("recover_mixture: factors are not identical");
  if (auto sym = is_symmetric(js, options.tol); !sym.symmetric)
    throw ExchangeabilityViolation(1, "state is not symmetric (deviation " + sci(sym.deviation) + ")");
  if (auto ns = check_nonsignalling(js, options.tol); !ns.pass)
    throw ExchangeabilityViolation(2, "state is signalling (deviation " + sci(ns.worst) + ")");

  const SpaceHandle& space = p.factors().front();
  std::vector<State> support;
  auto add = [&](const State& s) {
    if (!same_space(s.space(), space)) throw InvalidArgument("recover_mixture: support state on another space");
    for (const auto& k : support)
      if (same_probs(k.probs(), s.probs())) return;
    support.push_back(s);
  };
  std::vector<State> verts;
  if (options.include_vertices || options.interior_samples > 0) verts = vertices(space);
  if (options.include_vertices)
    for (const auto& v : verts) add(v);
  for (const auto& s : options.extra_support) add(s);
  Rng rng(options.seed);
  for (std::size_t i = 0; i < options.interior_samples; ++i) add(random_convex_state(verts, rng));
  if (support.empty()) throw InvalidArgument("recover_mixture: empty candidate support");

  const auto rows = static_cast<Eigen::Index>(js.tensor().size());
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto col = tensor_power(support[k].probs(), p.n());
    m.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(col.data(), rows);
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(js.tensor().data(), rows);
  const auto fit = solve_simplex_ls(m, y, options.max_iterations);

  std::vector<Component> comps;
  std::vector<Eigen::Index> active;
  double kept = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double w = fit.weights(static_cast<Eigen::Index>(k));
    if (w < kPrune) continue;
    comps.push_back({w, support[k]});
    active.push_back(static_cast<Eigen::Index>(k));
    kept += w;
  }
  for (auto& c : comps) c.weight /= kept;

  Eigen::MatrixXd act(rows, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) act.col(static_cast<Eigen::Index>(k)) = m.col(active[k]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(act.transpose() * act);
  const auto& s = svd.singularValues();
  const bool unique = s.size() > 0 && s(s.size() - 1) > 1e-10 * std::max(1.0, s(0));

  return {Mixture(space, std::move(comps)), fit.residual, unique, fit.iterations};
}

SupportCertificate certify_support(const std::vector<WeightedSpanVector>& mixture, OutcomeRef e, std::size_t test,
                                   std::size_t n, const Frame* frame, double tol) {
  if (n == 0 || n % 2 != 0) throw InvalidArgument("certify_support: n must be a positive even number");
  if (mixture.empty()) throw InvalidArgument("certify_support: empty mixture");
  const auto& space = *mixture.front().vector.space();
  if (test >= space.test_count()) throw InvalidArgument("certify_support: test index out of range");
  if (!space.test_contains(test, e.index)) throw InvalidArgument("certify_support: outcome is not in the chosen test");

  SupportCertificate cert;
  for (const auto& [weight, v] : mixture) {
    if (!same_space(v.space(), mixture.front().vector.space()))
      throw InvalidArgument("certify_support: components live on different spaces");
    double others = 0.0;
    for (auto f : space.tests()[test])
      if (f != e.index) others += v.coeffs()(static_cast<Eigen::Index>(f));
    cert.never_obtained += weight * std::pow(others, static_cast<double>(n));
    cert.component_checks.push_back(is_state(v, tol));
    if (frame) {
      const Eigen::VectorXd c = frame_coordinates(*frame, v);
      cert.frame_sensible.push_back((c.array() >= -tol).all() && (c.array() <= 1.0 + tol).all() &&
                                    std::abs(c.sum() - 1.0) <= tol);
    }
  }
  return cert;
}

namespace {

void check_observation(const TestSpace& space, const Observation& obs) {
  if (obs.test >= space.test_count()) throw InvalidArgument("observation: test index out of range");
  if (!space.test_contains(obs.test, obs.outcome.index))
    throw InvalidArgument("observation: outcome is not a member of test " + std::to_string(obs.test));
}

}  // namespace

Mixture posterior_update(const Mixture& mixture, const std::vector<Observation>& observations) {
  for (const auto& o : observations) check_observation(*mixture.space(), o);
  std::vector<double> post;
  double evidence = 0.0;
  for (const auto& c : mixture.components()) {
    double like = 1.0;
    for (const auto& o : observations) like *= c.state[o.outcome.index];
    post.push_back(c.weight * like);
    evidence += post.back();
  }
  if (evidence <= 1e-12)
    throw ZeroProbabilityObservation("posterior_update: observed sequence has predictive probability " +
                                     sci(evidence));
  std::vector<Component> comps;
  for (std::size_t k = 0; k < post.size(); ++k)
    if (post[k] > 0.0) comps.push_back({post[k] / evidence, mixture.components()[k].state});
  return Mixture(mixture.space(), std::move(comps));
}

Eigen::VectorXd condition_joint(const JointState& js, const std::vector<Observation>& observations) {
  const auto& p = js.product();
  const std::size_t m = observations.size();
  if (p.n() != m + 1) throw DimensionMismatch("condition_joint: need a joint state on observations + 1 systems");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m; ++i) {
    check_observation(p.factor(i), observations[i]);
    idx.push_back(observations[i].outcome.index);
  }
  idx.push_back(0);
  const auto& last = p.factor(m);
  Eigen::VectorXd out(static_cast<Eigen::Index>(last.outcome_count()));
  for (std::size_t f = 0; f < last.outcome_count(); ++f) {
    idx.back() = f;
    out(static_cast<Eigen::Index>(f)) = js.at(idx);
  }
  double norm = 0.0;
  for (auto f : last.tests().front()) norm += out(static_cast<Eigen::Index>(f));
  if (norm <= 1e-12) throw ZeroProbabilityObservation("condition_joint: observed sequence has probability zero");
  return out / norm;
}

}  // namespace finetti
