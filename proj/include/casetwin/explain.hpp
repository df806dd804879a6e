#pragma once

// Append-only reasoning-episode log (one JSON object per line) and the
// operator-facing report built from it.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casetwin/value.hpp"

namespace casetwin {

struct ExplainCandidate {
  std::string case_name;
  double raw = 0;
  double effective = 0;
  bool operator==(const ExplainCandidate&) const = default;
};

struct ExplainAttempt {
  std::string case_name;
  std::size_t rank = 0;
  std::vector<std::string> steps;  // describe(PlanStep)
  std::optional<bool> success;     // unset until the next cycle is observed
  bool operator==(const ExplainAttempt&) const = default;
};

struct ExplainRecord {
  std::int64_t episode = 0;
  std::int64_t cycle = 0;          // cycle whose situation triggered the episode
  std::int64_t closed_cycle = 0;   // cycle on which the outcome was decided
  std::vector<std::string> triggers;
  std::string primary_trigger;
  std::map<PathKey, Value> situation;
  std::vector<ExplainCandidate> candidates;
  std::vector<ExplainAttempt> attempts;
  std::optional<std::string> fallback;    // printed directive
  std::optional<std::string> planner;     // plan | unsolvable | limit-exceeded | error
  std::vector<std::string> plan;          // ground actions
  std::vector<std::string> writes;        // port writes derived from the plan
  std::string outcome;  // success | failure | notified | recommended | rejected | plan-failed | unresolved
  std::optional<std::string> learned_case;
  std::optional<std::string> reinforced_case;
  std::optional<double> min_score;
  std::vector<std::string> notes;
  bool operator==(const ExplainRecord&) const = default;
};

/// Records a case is "involved" in: trigger, candidate, attempt, learned or reinforced.
bool involves(const ExplainRecord& record, const std::string& case_name);

std::string to_json_line(const ExplainRecord& record);
ExplainRecord from_json_line(const std::string& line);  // throws ExplainLogError

class ExplainLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Appends whole lines with a single write(2) each, so a crash leaves at most
/// one truncated trailing line.
class ExplainLogWriter {
 public:
  explicit ExplainLogWriter(const std::string& path, bool truncate = false);
  ~ExplainLogWriter();
  ExplainLogWriter(const ExplainLogWriter&) = delete;
  ExplainLogWriter& operator=(const ExplainLogWriter&) = delete;

  void append(const ExplainRecord& record);

 private:
  int fd_ = -1;
  std::string path_;
};

/// Reads all complete records. An unterminated final line is ignored; any
/// other malformed line throws ExplainLogError. Missing file throws IoError.
std::vector<ExplainRecord> read_explain_log(const std::string& path);

struct ExplainFilter {
  std::optional<std::string> case_name;
  std::optional<std::int64_t> from_cycle;
  std::optional<std::int64_t> to_cycle;
};

std::string explain(const std::vector<ExplainRecord>& log, const ExplainFilter& filter = {});

}  // namespace casetwin
