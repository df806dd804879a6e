#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "casetwin/domain_model.hpp"
#include "casetwin/expr.hpp"

namespace casetwin {

struct Assignment {
  AttributePath target;
  ArithExpr value;
  bool operator==(const Assignment&) const = default;
};

/// `call handler(args...)`, dispatched to a handler registered with the runtime.
struct HandlerCall {
  std::string handler;
  std::vector<ArithExpr> args;
  bool operator==(const HandlerCall&) const = default;
};

using SolutionPart = std::variant<Assignment, HandlerCall>;

struct Solution {
  std::vector<SolutionPart> parts;  // non-empty
  BoolExpr yields;
  bool operator==(const Solution&) const = default;
};

struct NotifyDirective {
  std::string message;
  bool operator==(const NotifyDirective&) const = default;
};

/// A goal for the planning fallback. `literals` holds the raw s-expression text
/// of each goal literal, e.g. "(low-pressure machine)" or "(not (hot nozzle))".
struct PddlGoalDirective {
  std::optional<std::string> knowledge_base;
  std::vector<std::string> literals;
  bool operator==(const PddlGoalDirective&) const = default;
};

using FallbackDirective = std::variant<NotifyDirective, PddlGoalDirective>;

struct CaseStats {
  std::int64_t applications = 0;
  std::int64_t successes = 0;
  bool operator==(const CaseStats&) const = default;
};

enum class CaseKind { Known, Unknown };

struct Case {
  std::string name;
  BoolExpr condition;
  std::optional<Solution> solution;
  std::optional<FallbackDirective> fallback;
  CaseStats stats;

  CaseKind kind() const { return solution ? CaseKind::Known : CaseKind::Unknown; }
  bool operator==(const Case&) const = default;
};

struct CaseBase {
  std::string name;
  std::vector<std::string> imports;
  std::vector<Case> cases;

  const Case* find(std::string_view case_name) const;
  Case* find(std::string_view case_name);
  bool operator==(const CaseBase&) const = default;
};

CaseBase parse_case_base(std::string_view source, const std::vector<DomainModel>& models);
std::string print_case_base(const CaseBase& cb);

/// Resolves imports of an already-built case base (for cases constructed in code).
DomainScope scope_of(const CaseBase& cb, const std::vector<DomainModel>& models);

/// Default fallback for unknown cases that declare none.
FallbackDirective default_fallback(const Case& c);

std::string print_fallback(const FallbackDirective& fb);
std::string print_solution_part(const SolutionPart& part);

}  // namespace casetwin
