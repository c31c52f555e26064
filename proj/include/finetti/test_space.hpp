#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace finetti {

/// Index of an outcome inside TestSpace::outcomes().
struct OutcomeRef {
  std::size_t index = 0;
  friend bool operator==(const OutcomeRef&, const OutcomeRef&) = default;
};

using Test = std::vector<std::size_t>;

/// A finite test space (E, S): an ordered list of outcome labels and a family
/// of tests given as outcome-index sets.
///
/// Construction never rejects input; call validate() to obtain the list of
/// violated invariants. Operations that need a well-formed space throw
/// InvalidArgument when handed an invalid one.
class TestSpace {
 public:
  TestSpace() = default;
  TestSpace(std::vector<std::string> outcomes, std::vector<Test> tests)
      : outcomes_(std::move(outcomes)), tests_(std::move(tests)) {}

  const std::vector<std::string>& outcomes() const noexcept { return outcomes_; }
  const std::vector<Test>& tests() const noexcept { return tests_; }
  std::size_t outcome_count() const noexcept { return outcomes_.size(); }
  std::size_t test_count() const noexcept { return tests_.size(); }

  /// Position of `label`, or npos.
  std::size_t find(std::string_view label) const noexcept;
  bool test_contains(std::size_t test, std::size_t outcome) const;

  friend bool operator==(const TestSpace&, const TestSpace&) = default;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::string> outcomes_;
  std::vector<Test> tests_;
};

using SpaceHandle = std::shared_ptr<const TestSpace>;

inline SpaceHandle share(TestSpace space) { return std::make_shared<const TestSpace>(std::move(space)); }

/// Structural comparison through handles.
inline bool same_space(const SpaceHandle& a, const SpaceHandle& b) { return a == b || (a && b && *a == *b); }

struct Violation {
  std::string message;
};

/// All invariant violations of `space`; empty when valid.
std::vector<Violation> validate(const TestSpace& space);
inline bool is_valid(const TestSpace& space) { return validate(space).empty(); }

/// Throws InvalidArgument listing the violations when `space` is invalid.
void require_valid(const TestSpace& space);

/// Classical sample space: one test holding outcomes x1..xd.
TestSpace make_classical(std::size_t outcomes);

/// Conditional-probability carrier: outcomes "x<out>y<in>" for out in 1..d and
/// in 1..k, one test per input. Outcomes of test y occupy the contiguous block
/// [(y-1)d, yd).
TestSpace make_process(std::size_t outputs, std::size_t inputs);

/// The seven-outcome, three-test example with outcomes a..g and tests
/// {a,b,c,d}, {a,e,g}, {b,e,f}.
TestSpace make_fig1();

/// Greechie diagram as DOT text: one node per outcome, each test drawn as a
/// colored chain of edges through its outcomes.
std::string export_greechie(const TestSpace& space);

}  // namespace finetti
