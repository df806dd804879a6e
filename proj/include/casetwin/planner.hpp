#pragma once

// Greedy best-first forward search over grounded STRIPS actions.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "casetwin/pddl.hpp"

namespace casetwin::pddl {

struct PlanLimits {
  std::size_t max_expansions = 100000;
  std::size_t max_plan_length = 64;
};

struct SearchStats {
  std::size_t ground_actions = 0;
  std::size_t expansions = 0;
  std::size_t generated = 0;
  std::size_t distinct_states = 0;
};

struct Plan {
  std::vector<std::string> steps;  // "(action arg...)"
  SearchStats stats;
};

struct Unsolvable {
  SearchStats stats;
};

struct LimitExceeded {
  std::string limit;  // "max-expansions" | "max-plan-length"
  SearchStats stats;
};

using PlanResult = std::variant<Plan, Unsolvable, LimitExceeded>;

/// Goal-count heuristic, FIFO among equal h, duplicate states dropped.
PlanResult plan(const PddlDomain& d, const PddlProblem& p, const PlanLimits& limits = {});

std::string describe(const PlanResult& result);

}  // namespace casetwin::pddl
