#include <doctest.h>

#include <algorithm>

#include "casetwin/discretization.hpp"
#include "casetwin/planner.hpp"
#include "casetwin/text.hpp"
#include "support.hpp"

using namespace casetwin;

namespace {

struct Fixture {
  testing::Bundled b = testing::load_bundled();
  pddl::PddlDomain domain = pddl::parse_pddl_domain(read_text_file(testing::model_file("molding.pddl")));
  MachineMapping mapping = parse_mapping(read_text_file(testing::model_file("molding.map")));
  DomainScope scope() const { return DomainScope({&b.domains[0]}); }
};

std::string mapping_error(const std::string& src) {
  try {
    parse_mapping(src);
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

bool has_atom(const pddl::PddlProblem& p, const std::string& text) {
  return std::any_of(p.init.begin(), p.init.end(), [&](const pddl::Atom& a) { return a.str() == text; });
}

PddlGoalDirective low_pressure() { return {std::nullopt, {"(low-pressure machine)"}}; }

}  // namespace

TEST_CASE("bundled mapping") {
  Fixture f;
  CHECK(f.mapping.domain == "molding");
  REQUIRE(f.mapping.attributes.size() == 2);
  const auto* flow = f.mapping.find("PhaseData.injectionFlow");
  REQUIRE(flow);
  CHECK(flow->writable);
  CHECK(flow->bins.size() == 5);
  CHECK_FALSE(f.mapping.find("ProcessData.pressure")->writable);
  CHECK(f.mapping.facts.size() == 6);
  CHECK_NOTHROW(check_mapping(f.mapping, f.domain, f.scope()));
}

TEST_CASE("mapping diagnostics carry the line") {
  CHECK(mapping_error("domain d\nbin a 0 1 0.5\n").rfind("2:1:", 0) == 0);
  const std::string head = "domain d\nattribute ProcessData.pressure p s t\n";
  CHECK(mapping_error(head + "bin a 0 10 5\nbin b 11 20 15\n").find("contiguous") != std::string::npos);
  CHECK(mapping_error(head + "bin a 0 10 15\n").find("outside the bin") != std::string::npos);
  CHECK(mapping_error(head + "bin a 10 0 5\n").find("lo < hi") != std::string::npos);
  CHECK(mapping_error(head + "fact (not (p x))\n").find("positive") != std::string::npos);
  CHECK(mapping_error("attribute X.y p s t\n").find("no domain") != std::string::npos);
  CHECK(mapping_error("domain d\nsurprise\n").find("unknown directive") != std::string::npos);
}

TEST_CASE("mapping cross-checks") {
  Fixture f;
  auto m = f.mapping;
  m.domain = "other";
  CHECK_THROWS_AS(check_mapping(m, f.domain, f.scope()), MappingError);
  m = f.mapping;
  m.attributes[0].level_type = "pressurelevel";
  CHECK_THROWS_WITH_AS(check_mapping(m, f.domain, f.scope()), doctest::Contains("f1"), MappingError);
  m = f.mapping;
  m.attributes[0].path = {"ProcessData", "heating2"};
  CHECK_THROWS_AS(check_mapping(m, f.domain, f.scope()), MappingError);
}

TEST_CASE("bin edges and clamping") {
  Fixture f;
  const auto& flow = *f.mapping.find("PhaseData.injectionFlow");
  CHECK(discretize(flow, 0).object == "f1");
  CHECK(discretize(flow, 19.999).object == "f1");
  CHECK(discretize(flow, 20).object == "f2");
  CHECK(discretize(flow, 100).object == "f5");
  CHECK_FALSE(discretize(flow, 100).clamped);
  auto above = discretize(flow, 100.5);
  CHECK(above.object == "f5");
  CHECK(above.clamped);
  auto below = discretize(flow, -3);
  CHECK(below.object == "f1");
  CHECK(below.clamped);
}

TEST_CASE("fallback problem from a dangerous-pressure situation") {
  Fixture f;
  Situation s;
  s.values = {{"ProcessData.pressure", 2500.0}, {"PhaseData.injectionFlow", 90.0}};
  auto fp = goal_from_fallback(low_pressure(), s, f.mapping, f.domain);
  CHECK(fp.warnings.empty());
  CHECK(has_atom(fp.problem, "(pressure-level machine hi)"));
  CHECK(has_atom(fp.problem, "(flow-level machine f5)"));
  CHECK(has_atom(fp.problem, "(flow-step f5 f4)"));
  REQUIRE(fp.problem.goal.size() == 1);
  CHECK(fp.problem.goal[0].str() == "(low-pressure machine)");

  auto r = pddl::plan(f.domain, fp.problem);
  REQUIRE(std::holds_alternative<pddl::Plan>(r));
  const auto& steps = std::get<pddl::Plan>(r).steps;
  CHECK(pddl::validate_plan(f.domain, fp.problem, steps).valid);
  auto writes = writes_from_plan(steps, fp.problem, f.mapping, f.domain, f.scope());
  REQUIRE(writes.size() == 1);
  CHECK(writes[0].target.key() == "PhaseData.injectionFlow");
  CHECK(writes[0].value == Value(50.0));

  s.values["ProcessData.pressure"] = 9000.0;
  CHECK(goal_from_fallback(low_pressure(), s, f.mapping, f.domain).warnings.size() == 1);
  s.values.erase("PhaseData.injectionFlow");
  CHECK_THROWS_WITH_AS(goal_from_fallback(low_pressure(), s, f.mapping, f.domain), doctest::Contains("not coverable"),
                       MappingError);
}

TEST_CASE("goal directives are checked against the knowledge base") {
  Fixture f;
  CHECK_FALSE(check_goal_directive(low_pressure(), f.mapping, f.domain));
  CHECK(check_goal_directive({std::nullopt, {"(cool machine)"}}, f.mapping, f.domain));
  CHECK(check_goal_directive({std::nullopt, {"(low-pressure press)"}}, f.mapping, f.domain));
  CHECK(check_goal_directive({std::string("elsewhere"), {"(low-pressure machine)"}}, f.mapping, f.domain));
  CHECK_FALSE(check_goal_directive({std::nullopt, {"(flow-level machine f2)"}}, f.mapping, f.domain));
}

TEST_CASE("plans that do not touch writable attributes produce no writes") {
  Fixture f;
  Situation s;
  s.values = {{"ProcessData.pressure", 1000.0}, {"PhaseData.injectionFlow", 30.0}};
  auto fp = goal_from_fallback(low_pressure(), s, f.mapping, f.domain);
  auto r = pddl::plan(f.domain, fp.problem);
  REQUIRE(std::holds_alternative<pddl::Plan>(r));
  CHECK(std::get<pddl::Plan>(r).steps == std::vector<std::string>{"(confirm-low-pressure machine)"});
  CHECK(writes_from_plan(std::get<pddl::Plan>(r).steps, fp.problem, f.mapping, f.domain, f.scope()).empty());
  CHECK_THROWS_AS(writes_from_plan({"(fly machine)"}, fp.problem, f.mapping, f.domain, f.scope()), MappingError);
}
