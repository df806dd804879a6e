#include <doctest.h>

#include <fstream>

#include "casetwin/explain.hpp"
#include "casetwin/text.hpp"
#include "casetwin/twin_runtime.hpp"
#include "support.hpp"

using namespace casetwin;

namespace {

struct Scenario {
  testing::TempDir dir;
  TwinConfig cfg;

  Scenario() {
    testing::copy_models(dir);
    cfg = TwinConfig::load(dir.file("twin.cfg"));
  }

  RuntimeOptions options() const {
    RuntimeOptions o;
    o.clock = step_clock();
    return o;
  }

  std::vector<ExplainRecord> log() const { return read_explain_log(cfg.explain_log); }
  CaseBase persisted() const {
    auto d = parse_domain_model(read_text_file(cfg.domain_model));
    return parse_case_base(read_text_file(cfg.case_base), {d});
  }
};

std::vector<std::string> lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config loading resolves paths against the config directory") {
  Scenario sc;
  CHECK(sc.cfg.domain_model == sc.dir.file("injection_molding.dm"));
  CHECK(sc.cfg.explain_log == sc.dir.file("out/explain.jsonl"));
  CHECK(sc.cfg.sim.cylinder_heating == 5);
  CHECK(sc.cfg.engine.retrieval_threshold == 0.2);
  CHECK(sc.cfg.write_enable);

  testing::write_file(sc.dir.file("bad.cfg"), "domain_model = a.dm\ncase_base = a.cb\nsimilarity = a.cs\nthreshold = 1\n");
  CHECK_THROWS_WITH_AS(TwinConfig::load(sc.dir.file("bad.cfg")), doctest::Contains("unknown config key 'threshold'"),
                       ParseError);
  testing::write_file(sc.dir.file("bad2.cfg"), "domain_model = a.dm\ncase_base = a.cb\nsimilarity = a.cs\n"
                                               "retrieval_threshold = 1.5\n");
  CHECK_THROWS_AS(TwinConfig::load(sc.dir.file("bad2.cfg")), ParseError);
  testing::write_file(sc.dir.file("bad3.cfg"), "domain_model = a.dm\nsimilarity = a.cs\n");
  CHECK_THROWS_WITH_AS(TwinConfig::load(sc.dir.file("bad3.cfg")), doctest::Contains("case_base"), ParseError);
  CHECK_THROWS_AS(TwinConfig::load(sc.dir.file("absent.cfg")), IoError);
}

TEST_CASE("model loading reports file, line and column") {
  Scenario sc;
  CHECK_NOTHROW(load_models(sc.cfg));
  std::string cb = read_text_file(sc.cfg.case_base);
  testing::write_file(sc.cfg.case_base, cb + "\n");
  const auto pos = cb.find("ProcessData.nozzleTemperature > 500");
  cb.replace(pos, std::string("ProcessData.nozzleTemperature").size(), "ProcessData.nozzleTemp");
  testing::write_file(sc.cfg.case_base, cb);
  try {
    load_models(sc.cfg);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(e.file() == sc.cfg.case_base);
    CHECK(e.pos().line == 6);
    CHECK(std::string(e.what()).find("ProcessData.nozzleTemp") != std::string::npos);
  }
}

TEST_CASE("goal fallbacks are checked against the planning knowledge base") {
  Scenario sc;
  std::string cb = read_text_file(sc.cfg.case_base);
  cb.replace(cb.find("(low-pressure machine)"), 22, "(no-such-predicate machine)");
  testing::write_file(sc.cfg.case_base, cb);
  CHECK_THROWS_WITH_AS(load_models(sc.cfg), doctest::Contains("no-such-predicate"), ModelError);
  sc.cfg.pddl_domain.clear();
  sc.cfg.pddl_mapping.clear();
  CHECK_THROWS_AS(load_models(sc.cfg), ModelError);
}

TEST_CASE("over-temperature start: case applied, temperature recovers, stats persisted") {
  Scenario sc;
  TwinRuntime rt(sc.cfg, sc.options());
  auto summary = rt.run(5);
  CHECK(summary.cycles == 5);
  CHECK(summary.episodes == 1);
  CHECK(summary.case_applications == 1);
  CHECK(summary.port_writes == 1);
  CHECK(summary.learned == 0);
  CHECK(summary.traces[0].path == "case-applied");
  CHECK(summary.traces[1].path == "outcome");
  for (std::size_t i = 2; i < summary.traces.size(); ++i) CHECK(summary.traces[i].path == "no-trigger");

  auto log = sc.log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].outcome == "success");
  CHECK(log[0].cycle == 1);
  CHECK(log[0].closed_cycle == 2);
  CHECK(log[0].reinforced_case == std::optional<std::string>("HighNozzleTemperature"));
  CHECK(sc.persisted().find("HighNozzleTemperature")->stats == CaseStats{1, 1});
  CHECK(rt.case_base().find("HighNozzleTemperature")->stats == CaseStats{1, 1});

  auto situations = lines(sc.cfg.situation_log);
  CHECK(situations.size() == 6);
  auto traces = lines(sc.cfg.trace_log);
  REQUIRE(traces.size() == 6);
  CHECK(traces[0].rfind("cycle,path,case_held,", 0) == 0);
}

TEST_CASE("no condition ever true: all cycles no-trigger") {
  Scenario sc;
  sc.cfg.sim.cylinder_heating = 3;
  TwinRuntime rt(sc.cfg, sc.options());
  auto summary = rt.run(20);
  CHECK(summary.cycles == 20);
  CHECK(summary.episodes == 0);
  CHECK(summary.case_applications == 0);
  for (const auto& t : summary.traces) CHECK(t.path == "no-trigger");
  CHECK(sc.log().empty());
}

TEST_CASE("write-disabled runs only recommend") {
  Scenario sc;
  sc.cfg.write_enable = false;
  TwinRuntime rt(sc.cfg, sc.options());
  auto summary = rt.run(3);
  CHECK(summary.port_writes == 0);
  CHECK(summary.recommendations == 3);
  CHECK(dynamic_cast<PlantSimulator&>(rt.port()).writes_received() == 0);
  auto log = sc.log();
  REQUIRE(log.size() == 3);
  for (const auto& r : log) CHECK(r.outcome == "recommended");
  CHECK(sc.persisted().find("HighNozzleTemperature")->stats == CaseStats{});
}

TEST_CASE("replay port: per-row processing, recommendations only") {
  Scenario sc;
  sc.cfg.port = "replay";
  sc.cfg.replay_csv = testing::fixture("replay_three.csv");
  TwinRuntime rt(sc.cfg, sc.options());
  auto summary = rt.run(std::nullopt);
  CHECK(summary.cycles == 3);
  CHECK(summary.port_writes == 0);
  auto log = sc.log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].cycle == 2);
  CHECK(log[0].outcome == "recommended");
}

TEST_CASE("failed case falls back to notification and records the failure") {
  Scenario sc;
  std::string cb = read_text_file(sc.cfg.case_base);
  cb.replace(cb.find("ProcessData.heating = 1;"), 24, "PhaseData.dosingTime = 8.0;");
  testing::write_file(sc.cfg.case_base, cb);
  TwinRuntime rt(sc.cfg, sc.options());
  rt.run(2);
  auto log = sc.log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].outcome == "notified");
  REQUIRE(log[0].attempts.size() == 1);
  CHECK(log[0].attempts[0].success == std::optional<bool>(false));
  CHECK(sc.persisted().find("HighNozzleTemperature")->stats == CaseStats{1, 0});
}

TEST_CASE("fallback plan with an empty known-case base learns a case") {
  Scenario sc;
  testing::write_file(sc.cfg.case_base,
                      "import InjectionMolding;\ncasebase Pressure {\n  case DangerousPressure {\n"
                      "    when ProcessData.pressure > 2000;\n    fallback pddl goal (low-pressure machine);\n  }\n}\n");
  sc.cfg.sim.cylinder_heating = 3;
  sc.cfg.sim.injection_flow = 90;
  TwinRuntime rt(sc.cfg, sc.options());
  auto summary = rt.run(4);
  CHECK(summary.fallbacks == 1);
  CHECK(summary.learned == 1);
  auto log = sc.log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].outcome == "success");
  CHECK(log[0].planner == std::optional<std::string>("plan"));
  CHECK(log[0].writes == std::vector<std::string>{"PhaseData.injectionFlow := 50.0"});
  CHECK(log[0].learned_case == std::optional<std::string>("learned_1"));
  auto persisted = sc.persisted();
  REQUIRE(persisted.cases.size() == 2);
  CHECK(persisted.cases[1].name == "learned_1");
}

TEST_CASE("an episode still open at the end is closed as unresolved") {
  Scenario sc;
  TwinRuntime rt(sc.cfg, sc.options());
  rt.run(1);
  auto log = sc.log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].outcome == "unresolved");
}

TEST_CASE("timing report") {
  std::vector<CycleTrace> traces;
  CycleTrace first;
  first.cycle = 1;
  first.total_ms = 10;
  traces.push_back(first);
  auto rows = report_timings(traces);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].name == "FirstCycle");
  CHECK(rows[0].count == 1);
  CHECK(rows[1].count == 0);
  CHECK(rows[2].count == 0);
  auto table = format_timing_table(rows);
  CHECK(table.find("NoCase") != std::string::npos);
  CHECK(table.find("absent") != std::string::npos);

  for (int i = 0; i < 4; ++i) {
    CycleTrace t;
    t.cycle = i + 2;
    t.total_ms = i + 1;
    t.case_held = i % 2 == 0;
    traces.push_back(t);
  }
  rows = report_timings(traces);
  CHECK(rows[1].count == 2);
  CHECK(rows[1].min == 2);
  CHECK(rows[1].max == 4);
  CHECK(rows[1].avg == 3);
  CHECK(rows[2].count == 2);
  CHECK(rows[2].avg == 2);
}

TEST_CASE("step clock is deterministic") {
  auto a = step_clock();
  auto b = step_clock();
  for (int i = 0; i < 5; ++i) CHECK(a() == b());
  CHECK(a() - a() == -1.0);
}

TEST_CASE("stop requests end the run") {
  Scenario sc;
  TwinRuntime rt(sc.cfg, sc.options());
  rt.start();
  CHECK(rt.step());
  rt.request_stop();
  CHECK_FALSE(rt.step());
  rt.finish();
  CHECK(rt.summary().cycles == 1);
}
