#pragma once

// Bridges continuous machine values and PDDL objects (.map files).
//
//   domain molding
//   object machine machine
//   attribute PhaseData.injectionFlow flow-level machine flowlevel write
//   bin f1 0 20 10
//   bin f2 20 40 30
//   fact (flow-step f2 f1)
//
// Each `bin <object> <lo> <hi> <representative>` belongs to the preceding
// attribute; bins are half-open [lo, hi) except the last, which is closed.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casetwin/case_base.hpp"
#include "casetwin/cbr_engine.hpp"
#include "casetwin/pddl.hpp"

namespace casetwin {

struct Bin {
  std::string object;
  double lo = 0;
  double hi = 0;
  double representative = 0;
};

struct AttributeMapping {
  AttributePath path;
  std::string predicate;   // (predicate subject <bin object>)
  std::string subject;
  std::string level_type;
  bool writable = false;
  std::vector<Bin> bins;
};

struct MachineMapping {
  std::string domain;
  std::vector<pddl::TypedName> objects;
  std::vector<AttributeMapping> attributes;
  std::vector<pddl::Atom> facts;

  const AttributeMapping* find(const PathKey& key) const;
};

class MappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MachineMapping parse_mapping(std::string_view source);

/// Cross-checks a mapping against its PDDL domain; throws MappingError.
void check_mapping(const MachineMapping& m, const pddl::PddlDomain& d, const DomainScope& scope);

struct Discretized {
  std::string object;
  bool clamped = false;
};

Discretized discretize(const AttributeMapping& a, double value);

/// Objects and static facts of the mapping as a problem shell (no goal).
pddl::PddlProblem mapping_problem(const MachineMapping& m, const pddl::PddlDomain& d);

/// Load-time check of a fallback goal; returns an error message or nullopt.
std::optional<std::string> check_goal_directive(const PddlGoalDirective& g, const MachineMapping& m,
                                                const pddl::PddlDomain& d);

struct FallbackProblem {
  pddl::PddlProblem problem;
  std::vector<std::string> warnings;  // clamping notices
};

/// init = static facts + discretized situation, goal = the directive's literals.
FallbackProblem goal_from_fallback(const PddlGoalDirective& g, const Situation& s, const MachineMapping& m,
                                   const pddl::PddlDomain& d);

/// Replays `steps` and turns every writable attribute whose level changed into
/// a write of that level's representative value.
std::vector<PlannedAssignment> writes_from_plan(const std::vector<std::string>& steps, const pddl::PddlProblem& p,
                                                const MachineMapping& m, const pddl::PddlDomain& d,
                                                const DomainScope& scope);

}  // namespace casetwin
