#pragma once

// The per-cycle twin loop: snapshot, trigger evaluation, case-based reasoning
// with planning fallback, execution through the machine port, logging.

#include <atomic>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "casetwin/case_base.hpp"
#include "casetwin/cbr_engine.hpp"
#include "casetwin/discretization.hpp"
#include "casetwin/domain_model.hpp"
#include "casetwin/explain.hpp"
#include "casetwin/plant_sim.hpp"
#include "casetwin/planner.hpp"
#include "casetwin/replay.hpp"
#include "casetwin/similarity.hpp"

namespace casetwin {

struct TwinConfig {
  std::string domain_model;
  std::string case_base;  // learned cases and stats are written back here
  std::string similarity;
  std::string pddl_domain;        // optional
  std::string pddl_mapping;       // optional, required with pddl_domain
  EngineConfig engine;

  std::string port = "sim";  // sim | replay
  SimConfig sim;
  std::string sim_constants;  // optional constants table
  std::uint64_t seed = 1;
  std::string replay_csv;
  std::string replay_cycle_column = "ProcessData.cycleId";
  bool replay_skip_malformed = false;

  std::string explain_log;    // appended; empty disables
  std::string trace_log;      // rewritten per run; empty disables
  std::string situation_log;  // rewritten per run; empty disables
  bool write_enable = true;
  bool persist_case_base = true;
  int port_retries = 3;
  pddl::PlanLimits planner;

  /// Reads a key-value config; relative paths resolve against its directory.
  /// Unknown keys are rejected.
  static TwinConfig load(const std::string& path);
};

/// A model-file diagnostic: "<file>:<line>:<col>: <message>".
class ModelError : public std::runtime_error {
 public:
  ModelError(std::string file, SourcePos pos, std::string message);
  const std::string& file() const { return file_; }
  SourcePos pos() const { return pos_; }

 private:
  std::string file_;
  SourcePos pos_;
};

struct LoadedModels {
  std::vector<DomainModel> domains;
  CaseBase case_base;
  SimilaritySpec similarity;
  std::optional<pddl::PddlDomain> pddl;
  std::optional<MachineMapping> mapping;
};

/// Loads and cross-validates the model set. Throws ModelError for content
/// problems and IoError for unreadable files.
LoadedModels load_models(const std::string& domain_path, const std::string& case_base_path,
                         const std::string& similarity_path, const std::string& pddl_path = {},
                         const std::string& mapping_path = {});
LoadedModels load_models(const TwinConfig& cfg);

struct CycleTrace {
  std::int64_t cycle = 0;
  double load_ms = 0;  // first cycle only
  double evaluate_ms = 0;
  double retrieve_ms = 0;
  double reuse_ms = 0;
  double plan_ms = 0;
  double execute_ms = 0;
  double revise_ms = 0;
  double retain_ms = 0;
  double total_ms = 0;
  std::string path;  // no-trigger | case-applied | fallback | notify | outcome
  bool case_held = false;
};

struct TimingRow {
  std::string name;
  std::size_t count = 0;
  double min = 0;
  double max = 0;
  double avg = 0;
};

/// FirstCycle, NoCase, CaseDetected; rows without traces have count 0.
std::vector<TimingRow> report_timings(const std::vector<CycleTrace>& traces);
std::string format_timing_table(const std::vector<TimingRow>& rows);

struct RunSummary {
  std::size_t cycles = 0;
  std::size_t episodes = 0;
  std::size_t case_applications = 0;
  std::size_t fallbacks = 0;
  std::size_t learned = 0;
  std::size_t port_writes = 0;
  std::size_t recommendations = 0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<CycleTrace> traces;
};

/// Milliseconds from an arbitrary origin.
using Clock = std::function<double()>;
Clock steady_clock_ms();
/// Deterministic clock advancing one millisecond per reading.
Clock step_clock();

struct RuntimeOptions {
  Clock clock;  // defaults to steady_clock_ms()
  PluginRegistry plugins;  // builtins are added
  HandlerRegistry handlers;
  std::shared_ptr<ReuseStrategy> reuse;  // defaults to MostSimilarReuse
};

class TwinRuntime {
 public:
  /// `port` overrides the port named in the config.
  TwinRuntime(TwinConfig cfg, RuntimeOptions options = {}, std::unique_ptr<MachinePort> port = nullptr);
  ~TwinRuntime();

  /// Loads models and opens the port and logs; the cost is attributed to the first cycle.
  void start();
  /// One production cycle; false once the port has no more data or a stop was requested.
  bool step();
  /// Runs until `cycles` cycles completed, end of data, or stop. Closes any open episode.
  RunSummary run(std::optional<std::size_t> cycles);
  void finish();

  void request_stop() { stop_ = true; }
  void request_reload() { reload_ = true; }

  const CaseBase& case_base() const;
  const RunSummary& summary() const { return summary_; }
  MachinePort& port() { return *port_; }

 private:
  struct Episode;

  std::optional<Situation> read_with_retries();
  Situation project(const Situation& raw) const;
  void handle_pending(const Situation& s, CycleTrace& trace);
  void start_episode(const Situation& s, const std::vector<std::string>& holding, CycleTrace& trace);
  void try_case(std::size_t rank, const Situation& s, CycleTrace& trace);
  void run_fallback(const FallbackDirective& fb, const Situation& s, CycleTrace& trace);
  void close_episode(std::string outcome, std::int64_t cycle);
  void persist_case_base();
  void reload_models();
  void bind_models(LoadedModels models);

  TwinConfig cfg_;
  RuntimeOptions opts_;
  std::unique_ptr<MachinePort> port_;
  std::unique_ptr<LoadedModels> models_;
  std::unique_ptr<Similarity> similarity_;
  DomainScope scope_;
  std::unique_ptr<ExplainLogWriter> explain_;
  std::unique_ptr<SituationLogWriter> situations_;
  std::unique_ptr<std::ofstream> traces_out_;
  std::unique_ptr<Episode> episode_;
  std::int64_t next_episode_ = 1;
  double pending_load_ms_ = 0;
  bool started_ = false;
  std::atomic<bool> stop_{false};
  std::atomic<bool> reload_{false};
  RunSummary summary_;
};

}  // namespace casetwin
