#include "casetwin/case_base.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace casetwin {

const Case* CaseBase::find(std::string_view case_name) const {
  for (const auto& c : cases) {
    if (c.name == case_name) return &c;
  }
  return nullptr;
}

Case* CaseBase::find(std::string_view case_name) {
  for (auto& c : cases) {
    if (c.name == case_name) return &c;
  }
  return nullptr;
}

FallbackDirective default_fallback(const Case& c) {
  return NotifyDirective{"no applicable case for '" + c.name + "'"};
}

namespace {

// Collapses whitespace so printed literals are stable: "( a  b )" -> "(a b)".
std::string normalize_sexpr(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && out.back() != '(' && c != ')') out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::int64_t parse_count(Lexer& lex, std::string_view key) {
  lex.expect_keyword(key);
  lex.expect_punct("=");
  Token tok = lex.next();
  std::int64_t v = -1;
  if (tok.kind == TokenKind::Int) std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
  if (v < 0) lex.fail(tok, "expected non-negative count for '" + std::string(key) + "'");
  return v;
}

SolutionPart parse_solution_part(Lexer& lex, const DomainScope& scope) {
  if (lex.accept_keyword("call")) {
    HandlerCall call;
    call.handler = lex.expect_identifier("handler name").text;
    lex.expect_punct("(");
    if (!lex.accept_punct(")")) {
      do {
        call.args.push_back(parse_arith_expr(lex, scope).expr);
      } while (lex.accept_punct(","));
      lex.expect_punct(")");
    }
    lex.expect_punct(";");
    return call;
  }
  SourcePos at = lex.peek().pos;
  AttributePath target = parse_attribute_path(lex);
  AttributeInfo info;
  try {
    info = scope.resolve(target);
  } catch (const ResolutionError& e) {
    throw ParseError(at, e.what());
  }
  Token eq = lex.expect_punct("=");
  TypedArith value = parse_arith_expr(lex, scope);
  check_assignable(info, value, eq.pos);
  lex.expect_punct(";");
  return Assignment{std::move(target), std::move(value.expr)};
}

FallbackDirective parse_fallback(Lexer& lex) {
  if (lex.accept_keyword("notify")) {
    if (lex.peek().kind != TokenKind::String) lex.fail_here("expected notification message string");
    NotifyDirective n{lex.next().text};
    lex.expect_punct(";");
    return n;
  }
  if (lex.accept_keyword("pddl")) {
    lex.expect_keyword("goal");
    PddlGoalDirective goal;
    if (lex.peek().kind == TokenKind::Identifier) goal.knowledge_base = lex.next().text;
    while (lex.is_punct("(")) goal.literals.push_back(normalize_sexpr(lex.raw_parenthesized()));
    if (goal.literals.empty()) lex.fail_here("pddl goal needs at least one literal");
    lex.expect_punct(";");
    return goal;
  }
  lex.fail_here("expected 'notify' or 'pddl goal' after 'fallback'");
}

Case parse_case(Lexer& lex, const DomainScope& scope) {
  Case c;
  Token name = lex.expect_identifier("case name");
  c.name = name.text;
  lex.expect_punct("{");
  lex.expect_keyword("when");
  c.condition = parse_bool_expr(lex, scope);
  lex.expect_punct(";");

  if (lex.is_keyword("solution")) {
    Token sol_tok = lex.next();
    Solution sol;
    lex.expect_punct("{");
    while (!lex.accept_punct("}")) sol.parts.push_back(parse_solution_part(lex, scope));
    if (sol.parts.empty()) lex.fail(sol_tok, "solution of case '" + c.name + "' is empty");
    if (!lex.accept_keyword("yields")) {
      lex.fail(sol_tok, "case '" + c.name + "' declares a solution but no 'yields' consequence");
    }
    sol.yields = parse_bool_expr(lex, scope);
    lex.expect_punct(";");
    c.solution = std::move(sol);
  } else if (lex.is_keyword("yields")) {
    lex.fail_here("'yields' without a solution in case '" + c.name + "'");
  }

  if (lex.accept_keyword("fallback")) c.fallback = parse_fallback(lex);

  if (lex.accept_punct("@")) {
    Token kw = lex.expect_keyword("stats");
    c.stats.applications = parse_count(lex, "applications");
    c.stats.successes = parse_count(lex, "successes");
    if (c.stats.successes > c.stats.applications) lex.fail(kw, "successes exceed applications");
    lex.expect_punct(";");
  }
  lex.expect_punct("}");
  return c;
}

}  // namespace

DomainScope scope_of(const CaseBase& cb, const std::vector<DomainModel>& models) {
  return scope_for_imports(cb.imports, models, {});
}

CaseBase parse_case_base(std::string_view source, const std::vector<DomainModel>& models) {
  Lexer lex(source);
  CaseBase cb;
  std::vector<SourcePos> import_pos;
  while (lex.is_keyword("import")) {
    lex.next();
    import_pos.push_back(lex.peek().pos);
    cb.imports.push_back(lex.expect_identifier("domain model name").text);
    lex.expect_punct(";");
  }
  if (cb.imports.empty()) lex.fail_here("case base must import at least one domain model");
  DomainScope scope = scope_for_imports(cb.imports, models, import_pos);

  lex.expect_keyword("casebase");
  cb.name = lex.expect_identifier("case base name").text;
  lex.expect_punct("{");
  while (!lex.accept_punct("}")) {
    lex.expect_keyword("case");
    SourcePos at = lex.peek().pos;
    Case c = parse_case(lex, scope);
    if (cb.find(c.name)) throw ParseError(at, "duplicate case '" + c.name + "'");
    cb.cases.push_back(std::move(c));
  }
  if (!lex.at_end()) lex.fail_here("unexpected " + describe(lex.peek()) + " after case base");
  return cb;
}

std::string print_solution_part(const SolutionPart& part) {
  if (const auto* a = std::get_if<Assignment>(&part)) {
    return a->target.key() + " = " + print_arith_expr(a->value) + ";";
  }
  const auto& call = std::get<HandlerCall>(part);
  std::string out = "call " + call.handler + "(";
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    if (i) out += ", ";
    out += print_arith_expr(call.args[i]);
  }
  return out + ");";
}

std::string print_fallback(const FallbackDirective& fb) {
  if (const auto* n = std::get_if<NotifyDirective>(&fb)) return "notify " + format_value(n->message) + ";";
  const auto& g = std::get<PddlGoalDirective>(fb);
  std::string out = "pddl goal";
  if (g.knowledge_base) out += " " + *g.knowledge_base;
  for (const auto& lit : g.literals) out += " " + lit;
  return out + ";";
}

std::string print_case_base(const CaseBase& cb) {
  std::ostringstream out;
  for (const auto& imp : cb.imports) out << "import " << imp << ";\n";
  out << "\ncasebase " << cb.name << " {\n";
  for (const auto& c : cb.cases) {
    out << "\n  case " << c.name << " {\n";
    out << "    when " << print_bool_expr(c.condition) << ";\n";
    if (c.solution) {
      out << "    solution {\n";
      for (const auto& part : c.solution->parts) out << "      " << print_solution_part(part) << "\n";
      out << "    }\n";
      out << "    yields " << print_bool_expr(c.solution->yields) << ";\n";
    }
    if (c.fallback) out << "    fallback " << print_fallback(*c.fallback) << "\n";
    out << "    @stats applications=" << c.stats.applications << " successes=" << c.stats.successes << ";\n";
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace casetwin
