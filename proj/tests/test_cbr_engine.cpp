#include <doctest.h>

#include <algorithm>
#include <random>

#include "casetwin/cbr_engine.hpp"
#include "casetwin/text.hpp"
#include "oracles/similarity_oracle.hpp"
#include "support.hpp"

using namespace casetwin;

namespace {

struct Fixture {
  testing::Bundled b = testing::load_bundled();
  Similarity sim{b.spec, b.plugins};
  EngineConfig cfg;

  CaseBase parse(const std::string& cases) {
    return parse_case_base("import InjectionMolding;\ncasebase T {\n" + cases + "\n}\n", b.domains);
  }
};

Situation nominal() {
  Situation s;
  s.cycle_id = 1;
  s.values = {{"ProcessData.cycleId", std::int64_t{1}},
              {"ProcessData.cycleTime", 34.0},
              {"ProcessData.nozzleTemperature", 600.0},
              {"ProcessData.pressure", 1700.0},
              {"ProcessData.heating", std::int64_t{5}},
              {"PhaseData.dosingTime", 8.0},
              {"PhaseData.cylinderHeating", std::int64_t{5}},
              {"PhaseData.injectionFlow", 50.0},
              {"PhaseData.switchOverVolume", 30.0},
              {"PhaseData.meltCushion", 6.8},
              {"PhaseData.backPressure", 150.0}};
  return s;
}

std::string known(const std::string& name, const std::string& when, const std::string& stats = "") {
  return "case " + name + " { when " + when +
         "; solution { ProcessData.heating = 1; } yields ProcessData.nozzleTemperature <= 500; " + stats + "}\n";
}

}  // namespace

TEST_CASE("engine config validation") {
  EngineConfig cfg;
  CHECK(cfg.validate().empty());
  cfg.retrieval_threshold = 0.5;
  CHECK(cfg.validate().size() == 1);
  cfg.retrieval_threshold = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.success_penalty = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("retrieve: identity, threshold, triggers") {
  Fixture f;
  auto s = nominal();
  SUBCASE("exact reference match ranks first with raw 0") {
    auto cb = f.parse(known("Exact", "ProcessData.nozzleTemperature == 600.0") +
                      known("Close", "ProcessData.nozzleTemperature > 560"));
    auto r = retrieve(s, cb, f.sim, f.cfg);
    REQUIRE(r.ranked.size() == 2);
    CHECK(r.ranked[0].case_name == "Exact");
    CHECK(r.ranked[0].raw == 0.0);
    CHECK(r.threshold == 0.2);
  }
  SUBCASE("nothing below the threshold") {
    auto cb = f.parse(known("Far", "ProcessData.nozzleTemperature < 400") +
                      known("Farther", "ProcessData.nozzleTemperature < 100"));
    auto r = retrieve(s, cb, f.sim, f.cfg);
    CHECK(r.ranked.empty());
    CHECK(r.triggers.empty());
  }
  SUBCASE("unknown and non-extractable cases only trigger") {
    auto cb = f.parse("case U { when ProcessData.nozzleTemperature > 500; }\n" +
                      known("Or", "ProcessData.nozzleTemperature > 500 || ProcessData.pressure > 9000") +
                      known("OrFalse", "ProcessData.nozzleTemperature > 900 || ProcessData.pressure > 9000") +
                      "case V { when ProcessData.nozzleTemperature > 900; }\n");
    auto r = retrieve(s, cb, f.sim, f.cfg);
    CHECK(r.ranked.empty());
    CHECK(r.triggers == std::vector<std::string>{"U", "Or"});
  }
  SUBCASE("the filling study cases stay out of the nominal neighbourhood") {
    auto r = retrieve(s, f.b.case_base, f.sim, f.cfg);
    REQUIRE(r.ranked.size() == 1);
    CHECK(r.ranked[0].case_name == "HighNozzleTemperature");
    CHECK(r.ranked[0].raw == doctest::Approx(100.0 / 600).epsilon(1e-12));
    CHECK(r.ranked[0].effective == doctest::Approx(100.0 / 600 + 0.25).epsilon(1e-12));
  }
}

TEST_CASE("reinforcement orders equally similar cases") {
  Fixture f;
  auto s = nominal();
  auto cb = f.parse(known("Aaa", "PhaseData.switchOverVolume > 27", "@stats applications=4 successes=0;") +
                    known("Bbb", "PhaseData.switchOverVolume < 33", "@stats applications=4 successes=4;"));
  auto r = retrieve(s, cb, f.sim, f.cfg);
  REQUIRE(r.ranked.size() == 2);
  CHECK(r.ranked[0].raw == doctest::Approx(r.ranked[1].raw).epsilon(1e-12));
  CHECK(r.ranked[0].case_name == "Bbb");
  // both orderings, scored by hand: 0.05 + 0.5 * (1 - 5/6) vs 0.05 + 0.5 * (1 - 1/6)
  const double good = 0.05 + 0.5 * (1 - 5.0 / 6);
  const double bad = 0.05 + 0.5 * (1 - 1.0 / 6);
  CHECK(good < bad);
  CHECK(r.ranked[0].effective == doctest::Approx(good).epsilon(1e-12));
  CHECK(r.ranked[1].effective == doctest::Approx(bad).epsilon(1e-12));
}

TEST_CASE("ties break by case name") {
  Fixture f;
  auto cb = f.parse(known("Zed", "PhaseData.switchOverVolume == 30.0") + known("Alpha", "PhaseData.switchOverVolume == 30.0"));
  auto r = retrieve(nominal(), cb, f.sim, f.cfg);
  REQUIRE(r.ranked.size() == 2);
  CHECK(r.ranked[0].case_name == "Alpha");
}

TEST_CASE("parallel scoring returns the serial ranking") {
  Fixture f;
  std::mt19937_64 rng(5);
  CaseBase cb;
  cb.name = "R";
  cb.imports = {"InjectionMolding"};
  for (int i = 0; i < 40; ++i) cb.cases.push_back(oracle::random_case(rng, oracle::bundled_table(), "c" + std::to_string(i)).c);
  auto serial_cfg = f.cfg;
  serial_cfg.retrieval_threshold = 1.0;
  auto parallel_cfg = serial_cfg;
  parallel_cfg.workers = 4;
  for (int i = 0; i < 20; ++i) {
    auto s = oracle::random_situation(rng, oracle::bundled_table());
    CHECK(retrieve(s, cb, f.sim, serial_cfg) == retrieve(s, cb, f.sim, parallel_cfg));
  }
}

TEST_CASE("small-instance ranking equals the brute-force oracle") {
  Fixture f;
  const auto& table = oracle::bundled_table();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    CaseBase cb;
    cb.name = "S";
    cb.imports = {"InjectionMolding"};
    const std::size_t n = 1 + rng() % 5;
    std::vector<std::pair<std::string, double>> raw;
    std::map<std::string, CaseStats> stats;
    auto s = oracle::random_situation(rng, table);
    auto numbers = oracle::numbers(s);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = table[rng() % table.size()];
      const double v = row.lo + (row.hi - row.lo) * std::uniform_real_distribution<double>(0, 1)(rng);
      const double ref = row.is_int ? std::round(v) : v;
      Case c;
      c.name = "case" + std::to_string(i);
      Value lit = row.is_int ? Value(static_cast<std::int64_t>(ref)) : Value(ref);
      c.condition = BoolExpr::compare(AttributePath::from_key(row.key), CompareOp::Greater, lit);
      c.solution = Solution{{Assignment{AttributePath::from_key("ProcessData.heating"),
                                        ArithExpr::constant(std::int64_t{1})}},
                            BoolExpr::compare(AttributePath::from_key("ProcessData.pressure"), CompareOp::Less, 1.0)};
      c.stats.applications = static_cast<std::int64_t>(rng() % 6);
      c.stats.successes = static_cast<std::int64_t>(rng() % (c.stats.applications + 1));
      stats[c.name] = c.stats;
      raw.emplace_back(c.name, oracle::global(table, numbers, {{row.key, ref}}));
      cb.cases.push_back(c);
    }
    EngineConfig cfg;
    cfg.retrieval_threshold = 0.3;
    auto r = retrieve(s, cb, f.sim, cfg);
    std::vector<std::string> names;
    for (const auto& c : r.ranked) names.push_back(c.case_name);
    REQUIRE(names == oracle::rank(raw, stats, cfg.retrieval_threshold, cfg.success_penalty));
  }
}

TEST_CASE("reuse instantiates the top case") {
  Fixture f;
  auto s = nominal();
  auto r = retrieve(s, f.b.case_base, f.sim, f.cfg);
  auto plan = reuse(r, f.b.case_base, s);
  REQUIRE(plan);
  CHECK(plan->case_name == "HighNozzleTemperature");
  REQUIRE(plan->steps.size() == 1);
  CHECK(describe(plan->steps[0]) == "ProcessData.heating := 1");
  CHECK_FALSE(reuse(RetrievalResult{}, f.b.case_base, s));

  auto cb = f.parse(
      "case Shift { when PhaseData.switchOverVolume == 30.0; solution { PhaseData.switchOverVolume = "
      "PhaseData.switchOverVolume - 2; call tellOperator(PhaseData.meltCushion); } yields PhaseData.meltCushion < 5; }");
  auto rr = retrieve(s, cb, f.sim, f.cfg);
  CHECK_THROWS_AS(reuse(rr, cb, s), ReuseError);
  HandlerRegistry handlers;
  handlers.add("tellOperator", [](const std::vector<Value>&, const Situation&) { return std::vector<PlannedAssignment>{}; });
  auto shifted = reuse(rr, cb, s, handlers);
  REQUIRE(shifted);
  CHECK(std::get<PlannedAssignment>(shifted->steps[0]).value == Value(28.0));
  CHECK(describe(shifted->steps[1]) == "call tellOperator(6.8)");
}

TEST_CASE("revise updates stats and picks the next action") {
  Fixture f;
  auto cb = f.parse(known("First", "PhaseData.switchOverVolume == 30.0", "@stats applications=5 successes=3;") +
                    known("Second", "PhaseData.switchOverVolume > 29", "") +
                    "case Danger { when ProcessData.pressure > 2000; fallback pddl goal (low-pressure machine); }");
  auto s = nominal();
  auto r = retrieve(s, cb, f.sim, f.cfg);
  REQUIRE(r.ranked.size() == 2);
  REQUIRE(r.ranked[0].case_name == "First");

  auto after = s;
  after.values["ProcessData.nozzleTemperature"] = 400.0;
  auto ok = observe_outcome(*cb.find("First"), s, after);
  CHECK(ok.success);
  CHECK(std::holds_alternative<ReviseDone>(revise(ok, cb, std::nullopt, r, 0)));
  CHECK(cb.find("First")->stats == CaseStats{6, 4});

  auto bad = observe_outcome(*cb.find("First"), s, s);
  CHECK_FALSE(bad.success);
  auto next = revise(bad, cb, std::nullopt, r, 0);
  REQUIRE(std::holds_alternative<ReviseTryNext>(next));
  CHECK(std::get<ReviseTryNext>(next).case_name == "Second");
  CHECK(cb.find("First")->stats == CaseStats{7, 4});

  auto second_bad = observe_outcome(*cb.find("Second"), s, s);
  auto fb = revise(second_bad, cb, cb.find("Danger")->fallback, r, 1);
  REQUIRE(std::holds_alternative<ReviseFallback>(fb));
  CHECK(std::holds_alternative<PddlGoalDirective>(std::get<ReviseFallback>(fb).directive));
  auto notify = revise(second_bad, cb, std::nullopt, r, 1);
  CHECK(std::holds_alternative<NotifyDirective>(std::get<ReviseFallback>(notify).directive));
}

TEST_CASE("reinforcement monotonicity") {
  EngineConfig cfg;
  for (std::int64_t apps = 0; apps < 8; ++apps) {
    for (std::int64_t succ = 0; succ <= apps; ++succ) {
      CaseStats st{apps, succ};
      const double before = effective_score(0.1, st, cfg);
      CHECK(effective_score(0.1, {apps + 1, succ}, cfg) >= before);
      CHECK(effective_score(0.1, {apps + 1, succ + 1}, cfg) <= before);
    }
  }
}

TEST_CASE("retain") {
  Fixture f;
  auto s = nominal();
  s.values["ProcessData.pressure"] = 2500.0;
  s.values["PhaseData.injectionFlow"] = 90.0;
  auto after = s;
  after.values["ProcessData.pressure"] = 1700.0;
  Outcome o{s, after, "", true};
  const Case& danger = *f.b.case_base.find("DangerousPressure");
  RetainRequest req{&o, &danger.condition, {{AttributePath::from_key("PhaseData.injectionFlow"), Value(50.0)}},
                    std::nullopt, "7"};

  SUBCASE("learned case shape") {
    Case learned = build_learned_case(req, f.b.case_base);
    CHECK(learned.name == "learned_7");
    CHECK(print_bool_expr(learned.condition) ==
          "PhaseData.injectionFlow == 90.0 && ProcessData.pressure == 2500.0");
    CHECK(print_bool_expr(learned.solution->yields) == "!(ProcessData.pressure > 2000)");
    CHECK(print_solution_part(learned.solution->parts[0]) == "PhaseData.injectionFlow = 50.0;");
  }

  SUBCASE("far from every known case: added, idempotent") {
    CaseBase cb;
    cb.name = "Empty";
    cb.imports = {"InjectionMolding"};
    auto first = retain(req, cb, f.sim, f.cfg);
    CHECK(first.added);
    CHECK(first.min_score == 1.0);
    REQUIRE(cb.cases.size() == 1);
    auto second = retain(req, cb, f.sim, f.cfg);
    CHECK_FALSE(second.added);
    CHECK(second.min_score == 0.0);
    CHECK(cb.cases.size() == 1);
    // persisted text re-parses
    CHECK(parse_case_base(print_case_base(cb), f.b.domains) == cb);
  }

  SUBCASE("threshold decides: nearest 0.45 adds, nearest 0.1 reinforces") {
    // pressure relative metric: |2500 - r| / r
    const double far_ref = 2500.0 / 1.45;   // distance 0.45
    const double near_ref = 2500.0 / 1.1;   // distance 0.1
    for (auto [ref, expect_added] : {std::pair{far_ref, true}, std::pair{near_ref, false}}) {
      auto cb = f.parse(known("Existing", "ProcessData.pressure == " + format_double(ref)));
      Outcome applied{s, after, "Existing", true};
      RetainRequest r2 = req;
      r2.outcome = &applied;
      r2.applied_raw_score = 0.05;
      auto res = retain(r2, cb, f.sim, f.cfg);
      // oracle: brute force over the case base, pressure and injectionFlow references
      const auto& table = oracle::bundled_table();
      const double expected = oracle::global(table, {{"ProcessData.pressure", 2500.0}, {"PhaseData.injectionFlow", 90.0}},
                                             {{"ProcessData.pressure", ref}});
      CHECK(res.min_score == doctest::Approx(expected).epsilon(1e-9));
      CHECK(res.added == expect_added);
      CHECK(res.reinforced_case.has_value() == !expect_added);
    }
  }

  SUBCASE("verbatim reuse at raw 0 only reinforces") {
    auto cb = f.b.case_base;
    Outcome applied{s, after, "HighNozzleTemperature", true};
    RetainRequest r2 = req;
    r2.outcome = &applied;
    r2.applied_raw_score = 0.0;
    auto res = retain(r2, cb, f.sim, f.cfg);
    CHECK_FALSE(res.added);
    CHECK(res.reinforced_case == std::optional<std::string>("HighNozzleTemperature"));
    CHECK(cb == f.b.case_base);
  }

  SUBCASE("failed outcomes are never retained") {
    CaseBase cb;
    Outcome failed{s, s, "", false};
    RetainRequest r2 = req;
    r2.outcome = &failed;
    CHECK_FALSE(retain(r2, cb, f.sim, f.cfg).added);
    CHECK(cb.cases.empty());
  }

  SUBCASE("name collisions get a suffix") {
    CaseBase cb;
    cb.cases.push_back(build_learned_case(req, cb));
    CHECK(build_learned_case(req, cb).name == "learned_7_2");
  }
}
