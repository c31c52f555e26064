#include "finetti/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "finetti/errors.hpp"

namespace finetti {

double Rng::normal() {
  // Box-Muller on our own uniforms.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> Rng::dirichlet(std::size_t k) {
  std::vector<double> w(k);
  for (auto& x : w) x = -std::log(1.0 - uniform());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

State random_convex_state(const std::vector<State>& extremes, Rng& rng) {
  if (extremes.empty()) throw InvalidArgument("random_convex_state: no extreme states");
  const auto w = rng.dirichlet(extremes.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(extremes.front().probs().size());
  for (std::size_t i = 0; i < extremes.size(); ++i) p += w[i] * extremes[i].probs();
  return State(extremes.front().space(), std::move(p));
}

Mixture random_vertex_mixture(const std::vector<State>& vertices, std::size_t k, Rng& rng) {
  if (k == 0 || k > vertices.size()) throw InvalidArgument("random_vertex_mixture: bad component count");
  std::vector<std::size_t> pool(vertices.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<Component> comps;
  const auto w = rng.dirichlet(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t pick = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[pick]);
    comps.push_back({w[i], vertices[pool[i]]});
  }
  return Mixture(vertices.front().space(), std::move(comps));
}

}  // namespace finetti
