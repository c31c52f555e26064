#include "finetti/errors.hpp"

#include <sstream>

namespace finetti {

std::string format_systems(const std::vector<std::size_t>& systems) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (i) out << ',';
    out << systems[i] + 1;
  }
  out << '}';
  return out.str();
}

namespace {
std::string signalling_message(const std::vector<std::size_t>& source, const std::vector<std::size_t>& affected,
                               double magnitude) {
  std::ostringstream out;
  out << "signalling state: statistics of systems " << format_systems(affected)
      << " depend on the test chosen at systems " << format_systems(source) << " (deviation " << magnitude << ")";
  return out.str();
}
}  // namespace

SignallingState::SignallingState(std::vector<std::size_t> source, std::vector<std::size_t> affected, double magnitude)
    : Error(signalling_message(source, affected, magnitude)),
      source_(std::move(source)),
      affected_(std::move(affected)),
      magnitude_(magnitude) {}

}  // namespace finetti
