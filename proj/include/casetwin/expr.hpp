#pragma once

// Boolean conditions and arithmetic right-hand sides used by case models.

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "casetwin/domain_model.hpp"
#include "casetwin/text.hpp"
#include "casetwin/value.hpp"

namespace casetwin {

enum class CompareOp { Less, LessEq, Greater, GreaterEq, Equal, NotEqual };

std::string_view to_string(CompareOp op);

struct Comparison {
  AttributePath path;
  CompareOp op = CompareOp::Equal;
  Value literal;
  bool operator==(const Comparison&) const = default;
};

/// n-ary And/Or are kept flat: an And never has an And child (same for Or),
/// so parse(print(e)) reproduces e exactly.
struct BoolExpr {
  enum class Kind { Compare, And, Or, Not };

  Kind kind = Kind::Compare;
  Comparison cmp;                  // Kind::Compare
  std::vector<BoolExpr> children;  // And/Or: >= 2, Not: 1

  static BoolExpr compare(AttributePath path, CompareOp op, Value literal);
  static BoolExpr conjunction(std::vector<BoolExpr> parts);  // single part is returned unchanged
  static BoolExpr disjunction(std::vector<BoolExpr> parts);
  static BoolExpr negation(BoolExpr inner);

  bool operator==(const BoolExpr&) const = default;
};

struct ArithExpr {
  enum class Kind { Literal, Path, Neg, Add, Sub, Mul, Div };

  Kind kind = Kind::Literal;
  Value literal;
  AttributePath path;
  std::vector<ArithExpr> children;  // Neg: 1, binary: 2

  static ArithExpr constant(Value v);
  static ArithExpr attribute(AttributePath p);
  static ArithExpr binary(Kind k, ArithExpr lhs, ArithExpr rhs);

  bool operator==(const ArithExpr&) const = default;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a condition and type-checks every comparison against `scope`.
BoolExpr parse_bool_expr(Lexer& lex, const DomainScope& scope);

struct TypedArith {
  ArithExpr expr;
  PrimitiveType type;
};
TypedArith parse_arith_expr(Lexer& lex, const DomainScope& scope);

/// Throws ParseError at `at` unless an expression of `expr_type` may be stored in `target`.
void check_assignable(const AttributeInfo& target, const TypedArith& value, SourcePos at);

std::string print_bool_expr(const BoolExpr& expr);
std::string print_arith_expr(const ArithExpr& expr);

bool eval_condition(const BoolExpr& expr, const Situation& situation);
Value eval_arith(const ArithExpr& expr, const Situation& situation);
bool compare_values(const Value& lhs, CompareOp op, const Value& rhs);

void collect_paths(const BoolExpr& expr, std::set<PathKey>& out);
void collect_paths(const ArithExpr& expr, std::set<PathKey>& out);

}  // namespace casetwin
