#include "casetwin/expr.hpp"

#include <charconv>
#include <cmath>

namespace casetwin {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::LessEq: return "<=";
    case CompareOp::Greater: return ">";
    case CompareOp::GreaterEq: return ">=";
    case CompareOp::Equal: return "==";
    case CompareOp::NotEqual: return "!=";
  }
  return "?";
}

BoolExpr BoolExpr::compare(AttributePath path, CompareOp op, Value literal) {
  BoolExpr e;
  e.kind = Kind::Compare;
  e.cmp = Comparison{std::move(path), op, std::move(literal)};
  return e;
}

namespace {

BoolExpr flat(BoolExpr::Kind kind, std::vector<BoolExpr> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  BoolExpr e;
  e.kind = kind;
  for (auto& p : parts) {
    if (p.kind == kind) {
      for (auto& c : p.children) e.children.push_back(std::move(c));
    } else {
      e.children.push_back(std::move(p));
    }
  }
  return e;
}

}  // namespace

BoolExpr BoolExpr::conjunction(std::vector<BoolExpr> parts) { return flat(Kind::And, std::move(parts)); }
BoolExpr BoolExpr::disjunction(std::vector<BoolExpr> parts) { return flat(Kind::Or, std::move(parts)); }

BoolExpr BoolExpr::negation(BoolExpr inner) {
  BoolExpr e;
  e.kind = Kind::Not;
  e.children.push_back(std::move(inner));
  return e;
}

ArithExpr ArithExpr::constant(Value v) {
  ArithExpr e;
  e.kind = Kind::Literal;
  e.literal = std::move(v);
  return e;
}

ArithExpr ArithExpr::attribute(AttributePath p) {
  ArithExpr e;
  e.kind = Kind::Path;
  e.path = std::move(p);
  return e;
}

ArithExpr ArithExpr::binary(Kind k, ArithExpr lhs, ArithExpr rhs) {
  ArithExpr e;
  e.kind = k;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

Value parse_literal(Lexer& lex) {
  bool negative = lex.accept_punct("-");
  Token tok = lex.next();
  switch (tok.kind) {
    case TokenKind::Int: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
      if (ec != std::errc{}) lex.fail(tok, "integer literal out of range");
      return negative ? -v : v;
    }
    case TokenKind::Float: {
      double v = 0;
      std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
      return negative ? -v : v;
    }
    default: break;
  }
  if (negative) lex.fail(tok, "expected number after '-'");
  if (tok.kind == TokenKind::String) return tok.text;
  if (tok.kind == TokenKind::Identifier && tok.text == "true") return true;
  if (tok.kind == TokenKind::Identifier && tok.text == "false") return false;
  lex.fail(tok, "expected literal but found " + describe(tok));
}

std::optional<CompareOp> compare_op(const Token& tok) {
  if (tok.kind != TokenKind::Punct) return std::nullopt;
  if (tok.text == "<") return CompareOp::Less;
  if (tok.text == "<=") return CompareOp::LessEq;
  if (tok.text == ">") return CompareOp::Greater;
  if (tok.text == ">=") return CompareOp::GreaterEq;
  if (tok.text == "==") return CompareOp::Equal;
  if (tok.text == "!=") return CompareOp::NotEqual;
  return std::nullopt;
}

AttributeInfo resolve_at(const DomainScope& scope, const AttributePath& path, SourcePos at) {
  try {
    return scope.resolve(path);
  } catch (const ResolutionError& e) {
    throw ParseError(at, e.what());
  }
}

BoolExpr parse_or(Lexer& lex, const DomainScope& scope);

BoolExpr parse_comparison(Lexer& lex, const DomainScope& scope) {
  SourcePos at = lex.peek().pos;
  AttributePath path = parse_attribute_path(lex);
  AttributeInfo info = resolve_at(scope, path, at);
  Token op_tok = lex.next();
  auto op = compare_op(op_tok);
  if (!op) lex.fail(op_tok, "expected comparison operator but found " + describe(op_tok));
  SourcePos lit_at = lex.peek().pos;
  Value literal = parse_literal(lex);

  const bool ordering = *op != CompareOp::Equal && *op != CompareOp::NotEqual;
  if (ordering && !is_numeric(info.type)) {
    throw ParseError(op_tok.pos, "ordering comparison on non-numeric attribute '" + path.key() + "'");
  }
  const PrimitiveType lit_type = type_of(literal);
  const bool compatible = is_numeric(info.type) ? is_numeric(lit_type) : lit_type == info.type;
  if (!compatible) {
    throw ParseError(lit_at, "type mismatch: '" + path.key() + "' is " + std::string(to_string(info.type)) +
                                 " but literal is " + std::string(to_string(lit_type)));
  }
  return BoolExpr::compare(std::move(path), *op, std::move(literal));
}

BoolExpr parse_unary(Lexer& lex, const DomainScope& scope) {
  if (lex.accept_punct("!")) return BoolExpr::negation(parse_unary(lex, scope));
  if (lex.accept_punct("(")) {
    BoolExpr inner = parse_or(lex, scope);
    lex.expect_punct(")");
    return inner;
  }
  return parse_comparison(lex, scope);
}

BoolExpr parse_and(Lexer& lex, const DomainScope& scope) {
  std::vector<BoolExpr> parts;
  parts.push_back(parse_unary(lex, scope));
  while (lex.accept_punct("&&")) parts.push_back(parse_unary(lex, scope));
  return BoolExpr::conjunction(std::move(parts));
}

BoolExpr parse_or(Lexer& lex, const DomainScope& scope) {
  std::vector<BoolExpr> parts;
  parts.push_back(parse_and(lex, scope));
  while (lex.accept_punct("||")) parts.push_back(parse_and(lex, scope));
  return BoolExpr::disjunction(std::move(parts));
}

PrimitiveType combine(PrimitiveType a, PrimitiveType b) {
  return (a == PrimitiveType::Int && b == PrimitiveType::Int) ? PrimitiveType::Int : PrimitiveType::Float;
}

TypedArith parse_sum(Lexer& lex, const DomainScope& scope);

TypedArith parse_atom(Lexer& lex, const DomainScope& scope) {
  const Token& tok = lex.peek();
  SourcePos at = tok.pos;
  if (lex.accept_punct("(")) {
    TypedArith inner = parse_sum(lex, scope);
    lex.expect_punct(")");
    return inner;
  }
  if (lex.is_punct("-")) {
    lex.next();
    const Token& after = lex.peek();
    if (after.kind == TokenKind::Int || after.kind == TokenKind::Float) {
      Value v = parse_literal(lex);
      if (auto* i = std::get_if<std::int64_t>(&v)) return {ArithExpr::constant(-*i), PrimitiveType::Int};
      return {ArithExpr::constant(-std::get<double>(v)), PrimitiveType::Float};
    }
    TypedArith operand = parse_atom(lex, scope);
    if (!is_numeric(operand.type)) throw ParseError(at, "arithmetic on non-numeric operand");
    ArithExpr neg;
    neg.kind = ArithExpr::Kind::Neg;
    neg.children.push_back(std::move(operand.expr));
    return {std::move(neg), operand.type};
  }
  if (tok.kind == TokenKind::Identifier && tok.text != "true" && tok.text != "false") {
    AttributePath path = parse_attribute_path(lex);
    AttributeInfo info = resolve_at(scope, path, at);
    return {ArithExpr::attribute(std::move(path)), info.type};
  }
  Value v = parse_literal(lex);
  PrimitiveType t = type_of(v);
  return {ArithExpr::constant(std::move(v)), t};
}

TypedArith parse_product(Lexer& lex, const DomainScope& scope) {
  TypedArith lhs = parse_atom(lex, scope);
  while (lex.is_punct("*") || lex.is_punct("/")) {
    Token op = lex.next();
    TypedArith rhs = parse_atom(lex, scope);
    if (!is_numeric(lhs.type) || !is_numeric(rhs.type)) throw ParseError(op.pos, "arithmetic on non-numeric operand");
    auto kind = op.text == "*" ? ArithExpr::Kind::Mul : ArithExpr::Kind::Div;
    lhs = {ArithExpr::binary(kind, std::move(lhs.expr), std::move(rhs.expr)), combine(lhs.type, rhs.type)};
  }
  return lhs;
}

TypedArith parse_sum(Lexer& lex, const DomainScope& scope) {
  TypedArith lhs = parse_product(lex, scope);
  while (lex.is_punct("+") || lex.is_punct("-")) {
    Token op = lex.next();
    TypedArith rhs = parse_product(lex, scope);
    if (!is_numeric(lhs.type) || !is_numeric(rhs.type)) throw ParseError(op.pos, "arithmetic on non-numeric operand");
    auto kind = op.text == "+" ? ArithExpr::Kind::Add : ArithExpr::Kind::Sub;
    lhs = {ArithExpr::binary(kind, std::move(lhs.expr), std::move(rhs.expr)), combine(lhs.type, rhs.type)};
  }
  return lhs;
}

}  // namespace

BoolExpr parse_bool_expr(Lexer& lex, const DomainScope& scope) { return parse_or(lex, scope); }

TypedArith parse_arith_expr(Lexer& lex, const DomainScope& scope) { return parse_sum(lex, scope); }

void check_assignable(const AttributeInfo& target, const TypedArith& value, SourcePos at) {
  const auto fail = [&] {
    throw ParseError(at, "type mismatch: cannot assign " + std::string(to_string(value.type)) + " to '" +
                             target.path.key() + "' of type " + std::string(to_string(target.type)));
  };
  switch (target.type) {
    case PrimitiveType::Int:
      if (value.type != PrimitiveType::Int) fail();
      break;
    case PrimitiveType::Float:
      if (!is_numeric(value.type)) fail();
      break;
    default:
      if (value.type != target.type) fail();
  }
}

// ---------------------------------------------------------------------------
// printing

namespace {

void print_bool(const BoolExpr& e, std::string& out, int parent_prec) {
  // precedence: Or 1, And 2, Not/Compare 3
  switch (e.kind) {
    case BoolExpr::Kind::Compare:
      out += e.cmp.path.key();
      out += ' ';
      out += to_string(e.cmp.op);
      out += ' ';
      out += format_value(e.cmp.literal);
      return;
    case BoolExpr::Kind::Not:
      out += "!(";
      print_bool(e.children.front(), out, 0);
      out += ')';
      return;
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or: {
      const int prec = e.kind == BoolExpr::Kind::Or ? 1 : 2;
      const bool parens = prec < parent_prec;
      if (parens) out += '(';
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += e.kind == BoolExpr::Kind::Or ? " || " : " && ";
        print_bool(e.children[i], out, prec + 1);
      }
      if (parens) out += ')';
      return;
    }
  }
}

int arith_prec(ArithExpr::Kind k) {
  switch (k) {
    case ArithExpr::Kind::Add:
    case ArithExpr::Kind::Sub: return 1;
    case ArithExpr::Kind::Mul:
    case ArithExpr::Kind::Div: return 2;
    default: return 3;
  }
}

void print_arith(const ArithExpr& e, std::string& out) {
  switch (e.kind) {
    case ArithExpr::Kind::Literal: out += format_value(e.literal); return;
    case ArithExpr::Kind::Path: out += e.path.key(); return;
    case ArithExpr::Kind::Neg: {
      const auto& c = e.children.front();
      const bool parens = c.kind != ArithExpr::Kind::Path;
      out += parens ? "-(" : "-";
      print_arith(c, out);
      if (parens) out += ')';
      return;
    }
    default: break;
  }
  const int prec = arith_prec(e.kind);
  const auto& lhs = e.children[0];
  const auto& rhs = e.children[1];
  const bool lp = arith_prec(lhs.kind) < prec;
  const bool rp = arith_prec(rhs.kind) <= prec && rhs.kind != ArithExpr::Kind::Literal &&
                  rhs.kind != ArithExpr::Kind::Path && rhs.kind != ArithExpr::Kind::Neg;
  if (lp) out += '(';
  print_arith(lhs, out);
  if (lp) out += ')';
  switch (e.kind) {
    case ArithExpr::Kind::Add: out += " + "; break;
    case ArithExpr::Kind::Sub: out += " - "; break;
    case ArithExpr::Kind::Mul: out += " * "; break;
    default: out += " / "; break;
  }
  if (rp) out += '(';
  print_arith(rhs, out);
  if (rp) out += ')';
}

}  // namespace

std::string print_bool_expr(const BoolExpr& expr) {
  std::string out;
  print_bool(expr, out, 0);
  return out;
}

std::string print_arith_expr(const ArithExpr& expr) {
  std::string out;
  print_arith(expr, out);
  return out;
}

// ---------------------------------------------------------------------------
// evaluation

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs) {
  if (is_numeric(lhs) && is_numeric(rhs)) {
    const auto* li = std::get_if<std::int64_t>(&lhs);
    const auto* ri = std::get_if<std::int64_t>(&rhs);
    if (li && ri) {
      switch (op) {
        case CompareOp::Less: return *li < *ri;
        case CompareOp::LessEq: return *li <= *ri;
        case CompareOp::Greater: return *li > *ri;
        case CompareOp::GreaterEq: return *li >= *ri;
        case CompareOp::Equal: return *li == *ri;
        case CompareOp::NotEqual: return *li != *ri;
      }
    }
    const double l = as_double(lhs);
    const double r = as_double(rhs);
    switch (op) {
      case CompareOp::Less: return l < r;
      case CompareOp::LessEq: return l <= r;
      case CompareOp::Greater: return l > r;
      case CompareOp::GreaterEq: return l >= r;
      case CompareOp::Equal: return l == r;
      case CompareOp::NotEqual: return l != r;
    }
  }
  if (lhs.index() != rhs.index()) {
    throw EvalError("type mismatch comparing " + std::string(to_string(type_of(lhs))) + " with " +
                    std::string(to_string(type_of(rhs))));
  }
  if (op == CompareOp::Equal) return lhs == rhs;
  if (op == CompareOp::NotEqual) return lhs != rhs;
  throw EvalError("ordering comparison on non-numeric value");
}

bool eval_condition(const BoolExpr& expr, const Situation& situation) {
  switch (expr.kind) {
    case BoolExpr::Kind::Compare: {
      const Value* v = situation.find(expr.cmp.path.key());
      if (!v) throw EvalError("attribute '" + expr.cmp.path.key() + "' missing from situation");
      return compare_values(*v, expr.cmp.op, expr.cmp.literal);
    }
    case BoolExpr::Kind::Not: return !eval_condition(expr.children.front(), situation);
    case BoolExpr::Kind::And:
      for (const auto& c : expr.children) {
        if (!eval_condition(c, situation)) return false;
      }
      return true;
    case BoolExpr::Kind::Or:
      for (const auto& c : expr.children) {
        if (eval_condition(c, situation)) return true;
      }
      return false;
  }
  return false;
}

Value eval_arith(const ArithExpr& expr, const Situation& situation) {
  switch (expr.kind) {
    case ArithExpr::Kind::Literal: return expr.literal;
    case ArithExpr::Kind::Path: {
      const Value* v = situation.find(expr.path.key());
      if (!v) throw EvalError("attribute '" + expr.path.key() + "' missing from situation");
      return *v;
    }
    case ArithExpr::Kind::Neg: {
      Value v = eval_arith(expr.children.front(), situation);
      if (auto* i = std::get_if<std::int64_t>(&v)) return -*i;
      if (auto* d = std::get_if<double>(&v)) return -*d;
      throw EvalError("negation of non-numeric value");
    }
    default: break;
  }
  Value lhs = eval_arith(expr.children[0], situation);
  Value rhs = eval_arith(expr.children[1], situation);
  if (!is_numeric(lhs) || !is_numeric(rhs)) throw EvalError("arithmetic on non-numeric value");
  const auto* li = std::get_if<std::int64_t>(&lhs);
  const auto* ri = std::get_if<std::int64_t>(&rhs);
  if (li && ri) {
    switch (expr.kind) {
      case ArithExpr::Kind::Add: return *li + *ri;
      case ArithExpr::Kind::Sub: return *li - *ri;
      case ArithExpr::Kind::Mul: return *li * *ri;
      default:
        if (*ri == 0) throw EvalError("integer division by zero");
        return *li / *ri;
    }
  }
  const double l = as_double(lhs);
  const double r = as_double(rhs);
  switch (expr.kind) {
    case ArithExpr::Kind::Add: return l + r;
    case ArithExpr::Kind::Sub: return l - r;
    case ArithExpr::Kind::Mul: return l * r;
    default:
      if (r == 0.0) throw EvalError("division by zero");
      return l / r;
  }
}

void collect_paths(const BoolExpr& expr, std::set<PathKey>& out) {
  if (expr.kind == BoolExpr::Kind::Compare) {
    out.insert(expr.cmp.path.key());
    return;
  }
  for (const auto& c : expr.children) collect_paths(c, out);
}

void collect_paths(const ArithExpr& expr, std::set<PathKey>& out) {
  if (expr.kind == ArithExpr::Kind::Path) out.insert(expr.path.key());
  for (const auto& c : expr.children) collect_paths(c, out);
}

}  // namespace casetwin
