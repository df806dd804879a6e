#include <doctest.h>

#include <random>

#include "casetwin/case_base.hpp"
#include "casetwin/expr.hpp"
#include "casetwin/text.hpp"
#include "support.hpp"

using namespace casetwin;

namespace {

std::vector<DomainModel> domains() {
  return {parse_domain_model(read_text_file(testing::model_file("injection_molding.dm")))};
}

CaseBase parse(std::string_view src) { return parse_case_base(src, domains()); }

std::string parse_error(std::string_view src) {
  try {
    parse(src);
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

Situation situation(std::initializer_list<std::pair<const PathKey, Value>> values) {
  Situation s;
  s.values = values;
  return s;
}

BoolExpr condition(std::string_view text) {
  auto ds = domains();
  auto scope = DomainScope({&ds[0]});
  Lexer lex(text);
  return parse_bool_expr(lex, scope);
}

}  // namespace

TEST_CASE("high nozzle temperature case from the bundled base") {
  auto cb = parse(read_text_file(testing::model_file("injection_molding.cb")));
  const Case* c = cb.find("HighNozzleTemperature");
  REQUIRE(c);
  CHECK(c->kind() == CaseKind::Known);
  CHECK(print_bool_expr(c->condition) == "ProcessData.nozzleTemperature > 500");
  REQUIRE(c->solution->parts.size() == 1);
  CHECK(print_solution_part(c->solution->parts[0]) == "ProcessData.heating = 1;");
  CHECK(print_bool_expr(c->solution->yields) == "ProcessData.nozzleTemperature <= 500");
  CHECK(c->stats == CaseStats{});

  const Case* p = cb.find("DangerousPressure");
  REQUIRE(p);
  CHECK(p->kind() == CaseKind::Unknown);
  REQUIRE(p->fallback);
  const auto& goal = std::get<PddlGoalDirective>(*p->fallback);
  CHECK(goal.literals == std::vector<std::string>{"(low-pressure machine)"});
}

TEST_CASE("known iff solution") {
  auto cb = parse(read_text_file(testing::model_file("injection_molding.cb")));
  for (const auto& c : cb.cases) CHECK((c.kind() == CaseKind::Known) == c.solution.has_value());
}

TEST_CASE("load-time diagnostics") {
  const std::string head = "import InjectionMolding;\ncasebase B {\n";
  CHECK(parse_error(head + "case A { when ProcessData.pressure > 1; solution { ProcessData.heating = 1; } } }")
            .find("no 'yields'") != std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.nope > 1; } }").find("ProcessData.nope") != std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.pressure == true; } }").find("type mismatch") !=
        std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.pressure > 1; solution { ProcessData.heating = 1.5; } "
                           "yields ProcessData.pressure < 1; } }")
            .find("type mismatch") != std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.pressure > 1; } case A { when ProcessData.pressure > 2; } }")
            .find("duplicate case 'A'") != std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.pressure > 1; yields ProcessData.pressure < 1; } }")
            .find("'yields' without a solution") != std::string::npos);
  CHECK(parse_error("import Other;\ncasebase B { }").find("unknown domain model 'Other'") != std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.pressure > 1; @stats applications=1 successes=2; } }")
            .find("successes exceed") != std::string::npos);
  CHECK(parse_error(head + "case A { when ProcessData.pressure > 1; fallback pddl goal; } }")
            .find("at least one literal") != std::string::npos);
}

TEST_CASE("diagnostic position points at the offending token") {
  try {
    parse("import InjectionMolding;\ncasebase B {\n  case A {\n    when ProcessData.nope > 1;\n  }\n}\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.pos().line == 4);
    CHECK(e.pos().column == 10);
  }
}

TEST_CASE("eval_condition") {
  auto gt = condition("ProcessData.nozzleTemperature > 500");
  CHECK(eval_condition(gt, situation({{"ProcessData.nozzleTemperature", 510.0}})));
  CHECK_FALSE(eval_condition(gt, situation({{"ProcessData.nozzleTemperature", 500.0}})));
  CHECK_THROWS_AS(eval_condition(gt, situation({})), EvalError);

  auto conj = condition("ProcessData.heating > 1 && ProcessData.cycleId == 3");
  CHECK_FALSE(eval_condition(conj, situation({{"ProcessData.heating", std::int64_t{2}},
                                              {"ProcessData.cycleId", std::int64_t{4}}})));
  CHECK(eval_condition(conj, situation({{"ProcessData.heating", std::int64_t{2}},
                                        {"ProcessData.cycleId", std::int64_t{3}}})));

  auto mixed = condition("!(ProcessData.heating >= 3) || ProcessData.pressure != 1.5");
  CHECK(eval_condition(mixed, situation({{"ProcessData.heating", std::int64_t{4}}, {"ProcessData.pressure", 2.0}})));
  CHECK_FALSE(
      eval_condition(mixed, situation({{"ProcessData.heating", std::int64_t{4}}, {"ProcessData.pressure", 1.5}})));
}

TEST_CASE("int comparisons are exact beyond double precision") {
  auto c = condition("ProcessData.cycleId > 9007199254740992");
  CHECK(eval_condition(c, situation({{"ProcessData.cycleId", std::int64_t{9007199254740993}}})));
}

TEST_CASE("eval_condition is pure") {
  auto c = condition("ProcessData.pressure > 1000 && ProcessData.pressure < 1400 || ProcessData.heating == 5");
  auto s = situation({{"ProcessData.pressure", 1200.0}, {"ProcessData.heating", std::int64_t{1}}});
  const bool first = eval_condition(c, s);
  for (int i = 0; i < 10; ++i) CHECK(eval_condition(c, s) == first);
}

TEST_CASE("arithmetic solution parts instantiate against the situation") {
  auto cb = parse(
      "import InjectionMolding;\ncasebase B { case A { when PhaseData.meltCushion > 5; solution { "
      "PhaseData.switchOverVolume = PhaseData.switchOverVolume - 2; call notifyOperator(\"x\", 2 * 3); } "
      "yields PhaseData.meltCushion <= 5; } }");
  const auto& part = std::get<Assignment>(cb.cases[0].solution->parts[0]);
  CHECK(eval_arith(part.value, situation({{"PhaseData.switchOverVolume", 30.0}})) == Value(28.0));
  const auto& call = std::get<HandlerCall>(cb.cases[0].solution->parts[1]);
  CHECK(call.handler == "notifyOperator");
  CHECK(call.args.size() == 2);
}

TEST_CASE("print and parse round trip") {
  SUBCASE("bundled case base is byte-stable after one normalization") {
    auto cb = parse(read_text_file(testing::model_file("injection_molding.cb")));
    auto printed = print_case_base(cb);
    auto again = parse(printed);
    CHECK(again == cb);
    CHECK(print_case_base(again) == printed);
  }
  SUBCASE("stats and fallbacks survive") {
    auto cb = parse(
        "import InjectionMolding;\ncasebase B { case A { when ProcessData.pressure > 1 || !(ProcessData.heating == 2);"
        " fallback notify \"say \\\"hi\\\"\"; @stats applications=5 successes=3; } }");
    auto again = parse(print_case_base(cb));
    CHECK(again == cb);
    CHECK(again.cases[0].stats == CaseStats{5, 3});
  }
  SUBCASE("empty case base") {
    CaseBase cb;
    cb.name = "Empty";
    cb.imports = {"InjectionMolding"};
    auto printed = print_case_base(cb);
    CHECK(printed == "import InjectionMolding;\n\ncasebase Empty {\n}\n");
    CHECK(parse(printed) == cb);
  }
}

TEST_CASE("round trip over generated conditions") {
  const std::vector<std::string> paths{"ProcessData.pressure", "ProcessData.heating", "PhaseData.dosingTime"};
  std::mt19937_64 rng(42);
  auto leaf = [&]() {
    const auto& p = paths[rng() % paths.size()];
    const auto op = static_cast<CompareOp>(rng() % 6);
    Value lit = p == "ProcessData.heating" ? Value(static_cast<std::int64_t>(rng() % 7) - 1)
                                           : Value(static_cast<double>(rng() % 2000) / 8.0 - 10.0);
    return BoolExpr::compare(AttributePath::from_key(p), op, lit);
  };
  auto gen = [&](auto&& self, int depth) -> BoolExpr {
    if (depth == 0 || rng() % 3 == 0) return leaf();
    switch (rng() % 3) {
      case 0: return BoolExpr::conjunction({self(self, depth - 1), self(self, depth - 1)});
      case 1: return BoolExpr::disjunction({self(self, depth - 1), self(self, depth - 1)});
      default: return BoolExpr::negation(self(self, depth - 1));
    }
  };
  auto ds = domains();
  for (int i = 0; i < 200; ++i) {
    CaseBase cb;
    cb.name = "Gen";
    cb.imports = {"InjectionMolding"};
    Case c;
    c.name = "c" + std::to_string(i);
    c.condition = gen(gen, 4);
    cb.cases.push_back(c);
    auto again = parse_case_base(print_case_base(cb), ds);
    REQUIRE(again == cb);
  }
}
