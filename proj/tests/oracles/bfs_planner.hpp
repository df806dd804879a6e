#pragma once

// Breadth-first search over the explicit state space, for optimal plan
// lengths on small fixtures. Grounds schemas on its own.

#include <cstddef>
#include <optional>

#include "casetwin/pddl.hpp"

namespace casetwin::oracle {

struct BfsResult {
  std::optional<std::size_t> optimal_length;  // nullopt: goal unreachable
  std::size_t reachable_states = 0;           // explored before stopping
};

/// Explores at most `state_limit` states; throws std::runtime_error beyond it.
BfsResult bfs_optimal(const pddl::PddlDomain& d, const pddl::PddlProblem& p, std::size_t state_limit = 10000);

/// Full reachable-state count (no early goal stop).
std::size_t count_reachable(const pddl::PddlDomain& d, const pddl::PddlProblem& p, std::size_t state_limit = 10000);

}  // namespace casetwin::oracle
