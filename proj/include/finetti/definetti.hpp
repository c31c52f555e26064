#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finetti/composite.hpp"
#include "finetti/state_space.hpp"

namespace finetti {

struct Component {
  double weight = 0.0;
  State state;
};

/// Finitely supported probability measure over the states of one space.
/// Weights lie in (0,1] and sum to 1; components closer than 1e-9 are merged.
class Mixture {
 public:
  Mixture(SpaceHandle space, std::vector<Component> components, double tol = kTol);

  const SpaceHandle& space() const noexcept { return space_; }
  const std::vector<Component>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }

  /// Barycenter: the single-system predictive state.
  State predictive() const;

 private:
  SpaceHandle space_;
  std::vector<Component> components_;
};

/// Probability table over {0..d-1}^n.
struct ClassicalDist {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> table;
};

/// omega^1 .. omega^N on powers of one space.
class SequencePrefix {
 public:
  /// states[i] must live on power(space, i + 1).
  explicit SequencePrefix(std::vector<JointState> states);
  const std::vector<JointState>& states() const noexcept { return states_; }
  const SpaceHandle& space() const noexcept { return states_.front().product().factors().front(); }

 private:
  std::vector<JointState> states_;
};

struct ClauseFailure {
  std::size_t n = 0;
  int clause = 0;
  double deviation = 0.0;
  std::string message;
};

/// Verdict on a finite prefix. Exchangeability quantifies over all n, so a
/// passing report only says the prefix is consistent with it.
struct ExchangeabilityReport {
  bool prefix_consistent = true;
  double worst_deviation = 0.0;
  std::vector<ClauseFailure> failures;
};

/// Checks symmetry (clause 1), nonsignalling (clause 2) and that omega^n is
/// the marginal of omega^{n+1} over every test of the last system (clause 3).
ExchangeabilityReport check_exchangeable(const SequencePrefix& prefix, double tol = kTol);

/// sum_k w_k omega_k^{(x)n}.
JointState generate_exchangeable(const Mixture& mixture, std::size_t n);

/// Frame statistics P^n(i_1..i_n); entries >= -tol are clamped to 0.
/// Throws SignallingState.
ClassicalDist induced_classical(const Frame& frame, const JointState& js, double tol = kTol);

struct RecoveryOptions {
  /// Extra candidate states appended to the vertex support.
  std::vector<State> extra_support;
  /// When false only `extra_support` is used.
  bool include_vertices = true;
  /// Random interior states (convex combinations of vertices) added to the support.
  std::size_t interior_samples = 0;
  std::uint64_t seed = 42;
  std::size_t max_iterations = 100'000;
  double tol = kTol;
};

struct RecoveryResult {
  Mixture mixture;
  double residual = 0.0;
  /// Heuristic: the Gram matrix of the active product tensors is nonsingular.
  bool unique = false;
  std::size_t iterations = 0;
};

/// Least-squares fit of js by sum_k w_k omega_k^{(x)n}, w on the simplex,
/// solved by a primal active-set method from uniform weights.
/// Throws ExchangeabilityViolation (clause 1 or 2), EmptyStateSpace.
RecoveryResult recover_mixture(const JointState& js, const RecoveryOptions& options = {});

struct SupportCertificate {
  /// sum_k w_k (sum_{f in s, f != e} v_k(f))^n
  double never_obtained = 0.0;
  /// Per component: is it a genuine state.
  std::vector<StateCheck> component_checks;
  /// Per component: frame coordinates in [0,1] summing to 1 (only when a frame is given).
  std::vector<bool> frame_sensible;
  bool exceeds_one() const noexcept { return never_obtained > 1.0; }
};

struct WeightedSpanVector {
  double weight = 0.0;
  SpanVector vector;
};

/// Probability that outcome e never occurs when test s is run on n systems
/// of sum_k w_k v_k^{(x)n}. Values above 1 certify that some weighted v_k is
/// not a state. n must be even; throws InvalidArgument otherwise.
SupportCertificate certify_support(const std::vector<WeightedSpanVector>& mixture, OutcomeRef e, std::size_t test,
                                   std::size_t n, const Frame* frame = nullptr, double tol = kTol);

struct Observation {
  std::size_t test = 0;
  OutcomeRef outcome;
};

/// Bayes update w_k' proportional to w_k prod_j omega_k(e_j).
/// Throws ZeroProbabilityObservation, InvalidArgument.
Mixture posterior_update(const Mixture& mixture, const std::vector<Observation>& observations);

/// Conditional distribution of system m+1 given the first m observations,
/// computed directly from a joint state on m+1 systems.
Eigen::VectorXd condition_joint(const JointState& js, const std::vector<Observation>& observations);

}  // namespace finetti
