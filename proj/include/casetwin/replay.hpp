#pragma once

// CSV situation logs: written by the twin, read back by the replay port.
// Header row = dotted attribute paths; one column carries the cycle counter.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casetwin/domain_model.hpp"
#include "casetwin/plant_sim.hpp"

namespace casetwin {

class RowError : public std::runtime_error {
 public:
  RowError(std::size_t row, const std::string& message);
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_field(const Value& v);

class ReplaySource : public MachinePort {
 public:
  /// Throws ParseError when the header misses the cycle column or names an
  /// attribute the scope cannot resolve; IoError when the file is unreadable.
  ReplaySource(const std::string& path, const DomainScope& scope, std::string cycle_column = "ProcessData.cycleId",
               bool skip_malformed = false);

  /// Next row; nullopt at end of data. Malformed rows throw RowError (data
  /// rows are numbered from 1) unless skip_malformed is set.
  std::optional<Situation> read_cycle() override;
  WriteAck write_config(const std::vector<PlannedAssignment>&) override { return {false, "read-only source"}; }
  PortCapabilities capabilities() const override { return {false}; }

  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  std::ifstream in_;
  std::vector<AttributeInfo> columns_;
  std::size_t cycle_index_ = 0;
  bool skip_malformed_;
  std::size_t row_ = 0;
  std::optional<std::int64_t> last_cycle_;
  std::vector<std::string> skipped_;
};

/// Appends situations in the replay schema. The header is taken from the first
/// situation's keys.
class SituationLogWriter {
 public:
  explicit SituationLogWriter(const std::string& path);
  void append(const Situation& s);

 private:
  std::string path_;
  std::ofstream out_;
  std::vector<PathKey> header_;
};

}  // namespace casetwin
