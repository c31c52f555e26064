#include "finetti/test_space.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "finetti/errors.hpp"

namespace finetti {

std::size_t TestSpace::find(std::string_view label) const noexcept {
  for (std::size_t i = 0; i < outcomes_.size(); ++i)
    if (outcomes_[i] == label) return i;
  return npos;
}

bool TestSpace::test_contains(std::size_t test, std::size_t outcome) const {
  const auto& t = tests_.at(test);
  return std::find(t.begin(), t.end(), outcome) != t.end();
}

std::vector<Violation> validate(const TestSpace& space) {
  std::vector<Violation> report;
  const auto& outcomes = space.outcomes();

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto [it, fresh] = seen.emplace(outcomes[i], i);
    if (!fresh)
      report.push_back({"duplicate outcome label \"" + outcomes[i] + "\" at positions " + std::to_string(it->second) +
                        " and " + std::to_string(i)});
  }

  if (space.tests().empty()) report.push_back({"no tests"});

  std::vector<bool> covered(outcomes.size(), false);
  for (std::size_t t = 0; t < space.tests().size(); ++t) {
    const auto& test = space.tests()[t];
    if (test.empty()) report.push_back({"test " + std::to_string(t) + " is empty"});
    std::set<std::size_t> members;
    for (auto idx : test) {
      if (idx >= outcomes.size()) {
        report.push_back({"test " + std::to_string(t) + " refers to outcome index " + std::to_string(idx) +
                          " out of range"});
        continue;
      }
      if (!members.insert(idx).second)
        report.push_back({"test " + std::to_string(t) + " repeats outcome \"" + outcomes[idx] + "\""});
      covered[idx] = true;
    }
  }
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (!covered[i]) report.push_back({"outcome \"" + outcomes[i] + "\" is not covered by any test"});
  return report;
}

void require_valid(const TestSpace& space) {
  auto report = validate(space);
  if (report.empty()) return;
  std::string msg = "invalid test space:";
  for (const auto& v : report) msg += " " + v.message + ";";
  throw InvalidArgument(msg);
}

TestSpace make_classical(std::size_t outcomes) {
  if (outcomes == 0) throw InvalidArgument("make_classical: outcome count must be at least 1");
  std::vector<std::string> labels;
  Test test;
  for (std::size_t i = 0; i < outcomes; ++i) {
    labels.push_back("x" + std::to_string(i + 1));
    test.push_back(i);
  }
  return TestSpace(std::move(labels), {std::move(test)});
}

TestSpace make_process(std::size_t outputs, std::size_t inputs) {
  if (outputs == 0 || inputs == 0) throw InvalidArgument("make_process: outputs and inputs must be at least 1");
  std::vector<std::string> labels;
  std::vector<Test> tests(inputs);
  for (std::size_t y = 0; y < inputs; ++y) {
    for (std::size_t x = 0; x < outputs; ++x) {
      tests[y].push_back(labels.size());
      labels.push_back("x" + std::to_string(x + 1) + "y" + std::to_string(y + 1));
    }
  }
  return TestSpace(std::move(labels), std::move(tests));
}

TestSpace make_fig1() {
  return TestSpace({"a", "b", "c", "d", "e", "f", "g"}, {{0, 1, 2, 3}, {0, 4, 6}, {1, 4, 5}});
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string export_greechie(const TestSpace& space) {
  require_valid(space);
  std::ostringstream dot;
  dot << "graph greechie {\n";
  dot << "  node [shape=circle];\n";
  for (std::size_t i = 0; i < space.outcome_count(); ++i)
    dot << "  n" << i << " [label=" << quoted(space.outcomes()[i]) << "];\n";
  for (std::size_t t = 0; t < space.test_count(); ++t) {
    const auto& test = space.tests()[t];
    // Hues evenly spaced around the HSV wheel, one per test.
    char color[32];
    std::snprintf(color, sizeof color, "\"%.3f 0.850 0.750\"",
                  static_cast<double>(t) / static_cast<double>(space.test_count()));
    for (std::size_t k = 0; k + 1 < test.size(); ++k)
      dot << "  n" << test[k] << " -- n" << test[k + 1] << " [color=" << color << ", penwidth=2, test=" << t
          << "];\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace finetti
