#pragma once

// STRIPS subset of PDDL: typed objects, conjunctive (possibly negated)
// preconditions and goals, add/delete effects.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casetwin/text.hpp"

namespace casetwin::pddl {

struct SExpr {
  bool is_list = false;
  std::string atom;  // lower-cased
  std::vector<SExpr> items;
  SourcePos pos;

  bool is_atom(std::string_view a) const { return !is_list && atom == a; }
  std::string str() const;
};

/// All top-level expressions in `source`. `;` starts a comment.
std::vector<SExpr> parse_sexprs(std::string_view source);
SExpr parse_sexpr(std::string_view source);  // exactly one expression

/// Raised for valid PDDL outside the supported subset; `feature()` names it.
class UnsupportedFeature : public ParseError {
 public:
  UnsupportedFeature(SourcePos pos, std::string feature);
  const std::string& feature() const { return feature_; }

 private:
  std::string feature_;
};

struct TypedName {
  std::string name;
  std::string type = "object";
  bool operator==(const TypedName&) const = default;
};

/// Predicate applied to variables (`?x`) and/or constants.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;
  std::string str() const;
  bool operator==(const Atom&) const = default;
  auto operator<=>(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool positive = true;
  std::string str() const;
  bool operator==(const Literal&) const = default;
};

struct PredicateDef {
  std::string name;
  std::vector<TypedName> params;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<Literal> precondition;
  std::vector<Atom> add;
  std::vector<Atom> del;
};

struct PddlDomain {
  std::string name;
  std::vector<std::string> requirements;
  std::map<std::string, std::string> types;  // type -> parent ("object" is the root)
  std::vector<TypedName> constants;
  std::vector<PredicateDef> predicates;
  std::vector<ActionSchema> actions;

  const PredicateDef* find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool has_type(std::string_view type) const;
  bool is_subtype(std::string_view type, std::string_view ancestor) const;
};

struct PddlProblem {
  std::string name;
  std::string domain_ref;
  std::vector<TypedName> objects;
  std::vector<Atom> init;     // ground
  std::vector<Literal> goal;  // ground
};

PddlDomain parse_pddl_domain(std::string_view source);
PddlProblem parse_pddl_problem(std::string_view source, const PddlDomain& domain);

/// Type of an object or domain constant, if declared.
std::optional<std::string> object_type(const PddlDomain& d, const PddlProblem& p, std::string_view name);

/// Checks a ground literal against the domain's predicates and the objects in
/// scope; returns an error message or nullopt.
std::optional<std::string> check_ground_literal(const PddlDomain& d, const PddlProblem& p, const Literal& lit);

/// Reads "(p a b)" or "(not (p a b))".
Literal parse_literal_text(std::string_view text);

struct GroundAction {
  std::string name;  // "(schema arg1 arg2)"
  std::vector<Atom> pre_pos;
  std::vector<Atom> pre_neg;
  std::vector<Atom> add;
  std::vector<Atom> del;
};

class GroundingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every schema instantiated with every type-compatible object tuple, deduplicated by name.
std::vector<GroundAction> ground(const PddlDomain& d, const PddlProblem& p);

struct Validation {
  bool valid = false;
  std::optional<std::size_t> failed_step;  // index of the first inapplicable step
  std::string message;
};

/// Replays `steps` ("(action arg...)") from init by direct schema
/// substitution over a set of atom strings; shares no code with the planner.
Validation validate_plan(const PddlDomain& d, const PddlProblem& p, const std::vector<std::string>& steps);

}  // namespace casetwin::pddl
