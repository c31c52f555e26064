#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "finetti/definetti.hpp"
#include "finetti/state_space.hpp"

namespace finetti {

/// Seeded generator whose derived draws are bit-reproducible across standard
/// libraries (the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}
  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  double normal();
  /// Flat Dirichlet draw of length k.
  std::vector<double> dirichlet(std::size_t k);

 private:
  std::mt19937_64 engine_;
};

/// Random convex combination (flat Dirichlet weights) of the given states.
State random_convex_state(const std::vector<State>& extremes, Rng& rng);

/// `k` distinct vertices with flat Dirichlet weights.
Mixture random_vertex_mixture(const std::vector<State>& vertices, std::size_t k, Rng& rng);

}  // namespace finetti
