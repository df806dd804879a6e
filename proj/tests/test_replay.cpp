#include <doctest.h>

#include "casetwin/replay.hpp"
#include "casetwin/text.hpp"
#include "support.hpp"

using namespace casetwin;

namespace {

struct Fixture {
  testing::Bundled b = testing::load_bundled();
  DomainScope scope{{&b.domains[0]}};
};

}  // namespace

TEST_CASE("three-row fixture yields three situations then end of data") {
  Fixture f;
  ReplaySource src(testing::fixture("replay_three.csv"), f.scope);
  for (std::int64_t i = 1; i <= 3; ++i) {
    auto s = src.read_cycle();
    REQUIRE(s);
    CHECK(s->cycle_id == i);
  }
  CHECK_FALSE(src.read_cycle());
  CHECK_FALSE(src.read_cycle());
}

TEST_CASE("malformed rows") {
  Fixture f;
  ReplaySource strict(testing::fixture("replay_bad_row.csv"), f.scope);
  CHECK(strict.read_cycle());
  try {
    strict.read_cycle();
    FAIL("expected RowError");
  } catch (const RowError& e) {
    CHECK(e.row() == 2);
    CHECK(std::string(e.what()).find("row 2") == 0);
  }

  ReplaySource lenient(testing::fixture("replay_bad_row.csv"), f.scope, "ProcessData.cycleId", true);
  CHECK(lenient.read_cycle()->cycle_id == 1);
  CHECK(lenient.read_cycle()->cycle_id == 3);
  CHECK_FALSE(lenient.read_cycle());
  CHECK(lenient.skipped().size() == 1);
}

TEST_CASE("header and counter checks") {
  Fixture f;
  testing::TempDir dir;
  testing::write_file(dir.file("a.csv"), "ProcessData.pressure\n1.0\n");
  CHECK_THROWS_WITH_AS(ReplaySource(dir.file("a.csv"), f.scope), doctest::Contains("missing cycle column"), ParseError);
  testing::write_file(dir.file("b.csv"), "ProcessData.cycleId,Ghost.value\n1,2\n");
  CHECK_THROWS_WITH_AS(ReplaySource(dir.file("b.csv"), f.scope), doctest::Contains("Ghost.value"), ParseError);
  testing::write_file(dir.file("c.csv"), "ProcessData.cycleId,ProcessData.pressure\n2,1.0\n2,1.0\n");
  ReplaySource repeat(dir.file("c.csv"), f.scope);
  repeat.read_cycle();
  CHECK_THROWS_WITH_AS(repeat.read_cycle(), doctest::Contains("does not increase"), RowError);
  testing::write_file(dir.file("d.csv"), "ProcessData.cycleId,ProcessData.pressure\n1\n");
  ReplaySource short_row(dir.file("d.csv"), f.scope);
  CHECK_THROWS_WITH_AS(short_row.read_cycle(), doctest::Contains("expected 2 fields"), RowError);
  CHECK_THROWS_AS(ReplaySource(dir.file("missing.csv"), f.scope), IoError);
}

TEST_CASE("replay sources are read-only") {
  Fixture f;
  ReplaySource src(testing::fixture("replay_three.csv"), f.scope);
  CHECK_FALSE(src.capabilities().writable);
  auto ack = src.write_config({{AttributePath::from_key("ProcessData.heating"), Value(std::int64_t{1})}});
  CHECK_FALSE(ack.accepted);
  CHECK(ack.reason == "read-only source");
}

TEST_CASE("situation log reads back through the replay port") {
  Fixture f;
  testing::TempDir dir;
  std::vector<Situation> written;
  {
    SituationLogWriter w(dir.file("log.csv"));
    for (std::int64_t i = 1; i <= 3; ++i) {
      Situation s;
      s.cycle_id = i;
      s.values = {{"ProcessData.cycleId", i}, {"ProcessData.nozzleTemperature", 500.0 + 0.1 * static_cast<double>(i)}};
      w.append(s);
      written.push_back(s);
    }
  }
  ReplaySource src(dir.file("log.csv"), f.scope);
  for (const auto& s : written) CHECK(*src.read_cycle() == s);
}

TEST_CASE("csv quoting") {
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
  CHECK(csv_field(Value(std::string("x,y"))) == "\"x,y\"");
  CHECK(csv_field(Value(2.5)) == "2.5");
  CHECK(csv_field(Value(true)) == "true");
}
