#include "casetwin/cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "casetwin/discretization.hpp"
#include "casetwin/explain.hpp"
#include "casetwin/planner.hpp"
#include "casetwin/twin_runtime.hpp"

namespace fs = std::filesystem;

namespace casetwin {

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kIoError = 2;

std::atomic<TwinRuntime*> g_running{nullptr};

extern "C" void on_interrupt(int) {
  if (TwinRuntime* rt = g_running.load()) rt->request_stop();
}

std::string extension(const std::string& path) { return fs::path(path).extension().string(); }

// --- validate --------------------------------------------------------------

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
  std::map<std::string, std::vector<std::string>> by_ext;
  for (const auto& p : paths) {
    if (!fs::exists(p)) {
      err << p << ": no such file\n";
      return kIoError;
    }
    by_ext[extension(p)].push_back(p);
  }
  for (const auto& [ext, files] : by_ext) {
    if (ext != ".dm" && ext != ".cb" && ext != ".cs" && ext != ".pddl" && ext != ".map") {
      err << files.front() << ": unrecognized model extension '" << ext << "' (expected .dm .cb .cs .pddl .map)\n";
      return kDomainError;
    }
  }

  std::size_t ok = 0;
  std::size_t failed = 0;
  auto report = [&](const std::string& file, const auto& fn) -> bool {
    try {
      fn(read_text_file(file));
      ++ok;
      return true;
    } catch (const ModelError& e) {
      err << e.what() << "\n";
    } catch (const ParseError& e) {
      err << file << ":" << e.pos().line << ":" << e.pos().column << ": " << e.message() << "\n";
    } catch (const IoError& e) {
      throw;
    } catch (const std::exception& e) {
      err << file << ": " << e.what() << "\n";
    }
    ++failed;
    return false;
  };

  std::vector<DomainModel> domains;
  for (const auto& f : by_ext[".dm"]) report(f, [&](const std::string& t) { domains.push_back(parse_domain_model(t)); });

  std::optional<pddl::PddlDomain> pddl_domain;
  for (const auto& f : by_ext[".pddl"]) {
    report(f, [&](const std::string& t) {
      auto d = pddl::parse_pddl_domain(t);
      if (!pddl_domain) pddl_domain = std::move(d);
    });
  }

  std::vector<std::pair<std::string, CaseBase>> case_bases;
  for (const auto& f : by_ext[".cb"]) {
    report(f, [&](const std::string& t) { case_bases.emplace_back(f, parse_case_base(t, domains)); });
  }
  for (const auto& f : by_ext[".cs"]) report(f, [&](const std::string& t) { parse_similarity_spec(t, domains); });

  for (const auto& f : by_ext[".map"]) {
    report(f, [&](const std::string& t) {
      MachineMapping m = parse_mapping(t);
      if (!pddl_domain) return;
      std::vector<const DomainModel*> ptrs;
      for (const auto& d : domains) ptrs.push_back(&d);
      check_mapping(m, *pddl_domain, DomainScope(ptrs));
      for (const auto& [cb_file, cb] : case_bases) {
        for (const auto& c : cb.cases) {
          const auto* goal = c.fallback ? std::get_if<PddlGoalDirective>(&*c.fallback) : nullptr;
          if (!goal) continue;
          if (auto e = check_goal_directive(*goal, m, *pddl_domain)) {
            throw std::runtime_error(cb_file + ": case '" + c.name + "': " + *e);
          }
        }
      }
    });
  }

  if (failed) {
    out << failed << (failed == 1 ? " model" : " models") << " with errors\n";
    return kDomainError;
  }
  out << ok << (ok == 1 ? " model OK" : " models OK") << "\n";
  return kOk;
}

// --- run / replay ------------------------------------------------------------

int run_twin(TwinConfig cfg, std::size_t cycles, std::ostream& out) {
  TwinRuntime rt(std::move(cfg));
  g_running = &rt;
  auto previous = std::signal(SIGINT, on_interrupt);
  RunSummary s;
  try {
    s = rt.run(cycles);
  } catch (...) {
    g_running = nullptr;
    std::signal(SIGINT, previous);
    throw;
  }
  g_running = nullptr;
  std::signal(SIGINT, previous);

  out << "cycles: " << s.cycles << "\n"
      << "episodes: " << s.episodes << "\n"
      << "case applications: " << s.case_applications << "\n"
      << "fallbacks: " << s.fallbacks << "\n"
      << "learned cases: " << s.learned << "\n"
      << "port writes: " << s.port_writes << "\n"
      << "recommendations: " << s.recommendations << "\n";
  out << format_timing_table(report_timings(s.traces));
  if (s.aborted) {
    out << "aborted: " << s.abort_reason << "\n";
    return kIoError;
  }
  return kOk;
}

// --- plan --------------------------------------------------------------------

int cmd_plan(const std::string& domain_path, const std::string& problem_path, std::size_t max_expansions,
             std::size_t max_length, std::ostream& out) {
  pddl::PddlDomain d;
  pddl::PddlProblem p;
  try {
    d = pddl::parse_pddl_domain(read_text_file(domain_path));
  } catch (const ParseError& e) {
    throw ModelError(domain_path, e.pos(), e.message());
  }
  try {
    p = pddl::parse_pddl_problem(read_text_file(problem_path), d);
  } catch (const ParseError& e) {
    throw ModelError(problem_path, e.pos(), e.message());
  }
  const auto result = pddl::plan(d, p, {max_expansions, max_length});
  auto stats = [&](const pddl::SearchStats& s) {
    out << "ground actions: " << s.ground_actions << "\nexpansions: " << s.expansions
        << "\ngenerated: " << s.generated << "\nstates: " << s.distinct_states << "\n";
  };
  if (const auto* pl = std::get_if<pddl::Plan>(&result)) {
    for (std::size_t i = 0; i < pl->steps.size(); ++i) out << i + 1 << ": " << pl->steps[i] << "\n";
    out << "length: " << pl->steps.size() << "\n";
    stats(pl->stats);
    const auto v = pddl::validate_plan(d, p, pl->steps);
    out << (v.valid ? "VALID" : "INVALID: " + v.message) << "\n";
    return v.valid ? kOk : kDomainError;
  }
  if (const auto* u = std::get_if<pddl::Unsolvable>(&result)) {
    out << "UNSOLVABLE\n";
    stats(u->stats);
    return kOk;
  }
  const auto& l = std::get<pddl::LimitExceeded>(result);
  out << "LIMIT EXCEEDED (" << l.limit << ")\n";
  stats(l.stats);
  return kOk;
}

// --- report ------------------------------------------------------------------

std::vector<CycleTrace> read_trace_log(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"cycle", "case_held", "total_ms"}) {
    if (!col.count(need)) throw ParseError({1, 1}, path + ": trace log lacks column '" + need + "'");
  }
  std::vector<CycleTrace> traces;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw ParseError({line_no, 1}, path + ": wrong field count");
    CycleTrace t;
    try {
      t.cycle = std::stoll(f[col["cycle"]]);
      t.case_held = f[col["case_held"]] == "true";
      t.total_ms = std::stod(f[col["total_ms"]]);
    } catch (const std::exception&) {
      throw ParseError({line_no, 1}, path + ": malformed trace row");
    }
    if (col.count("path")) t.path = f[col["path"]];
    traces.push_back(std::move(t));
  }
  return traces;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Case-based digital twin runtime for injection molding", "casetwin"};
  app.require_subcommand(1);

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Load and cross-check model files (.dm .cb .cs .pddl .map)");
  validate->add_option("paths", validate_paths, "Model files")->required();

  std::string run_config;
  std::size_t cycles = 100;
  std::optional<std::uint64_t> seed;
  bool write = false;
  bool no_write = false;
  auto* run = app.add_subcommand("run", "Run the twin against the simulator");
  run->add_option("config", run_config, "Twin config file")->required();
  run->add_option("--cycles", cycles, "Number of production cycles")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--seed", seed, "Simulator seed (overrides the config)");
  auto* run_w = run->add_flag("--write", write, "Write solutions to the machine");
  auto* run_nw = run->add_flag("--no-write", no_write, "Recommendation mode: never write to the machine");
  run_w->excludes(run_nw);

  std::string replay_csv;
  std::string replay_config;
  std::optional<std::size_t> replay_cycles;
  auto* replay = app.add_subcommand("replay", "Run the twin over a recorded situation CSV (recommendations only)");
  replay->add_option("csv", replay_csv, "Situation CSV, header of attribute paths")->required();
  replay->add_option("--config", replay_config, "Twin config providing the models")->required();
  replay->add_option("--cycles", replay_cycles, "Stop after this many rows")->check(CLI::PositiveNumber);

  std::string domain_path, problem_path;
  std::size_t max_expansions = 100000;
  std::size_t max_length = 64;
  auto* plan = app.add_subcommand("plan", "Solve a PDDL problem and validate the plan");
  plan->add_option("domain", domain_path, "PDDL domain file")->required();
  plan->add_option("problem", problem_path, "PDDL problem file")->required();
  plan->add_option("--max-expansions", max_expansions, "Search expansion limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  plan->add_option("--max-plan-length", max_length, "Plan length limit")->check(CLI::PositiveNumber)->capture_default_str();

  std::string log_path;
  std::optional<std::string> case_filter;
  std::optional<std::int64_t> from_cycle, to_cycle;
  auto* explain_cmd = app.add_subcommand("explain", "Render the reasoning-episode log for operators");
  explain_cmd->add_option("log", log_path, "Explain log (JSON lines)")->required();
  explain_cmd->add_option("--case", case_filter, "Only episodes involving this case");
  explain_cmd->add_option("--from", from_cycle, "First cycle to include");
  explain_cmd->add_option("--to", to_cycle, "Last cycle to include");

  std::string trace_path;
  auto* report = app.add_subcommand("report", "Timing table from a cycle trace log");
  report->add_option("traces", trace_path, "Trace log CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kDomainError;
  }

  try {
    if (*validate) return cmd_validate(validate_paths, out, err);
    if (*run) {
      TwinConfig cfg = TwinConfig::load(run_config);
      cfg.port = "sim";
      if (seed) cfg.seed = *seed;
      if (write) cfg.write_enable = true;
      if (no_write) cfg.write_enable = false;
      return run_twin(std::move(cfg), cycles, out);
    }
    if (*replay) {
      TwinConfig cfg = TwinConfig::load(replay_config);
      cfg.port = "replay";
      cfg.replay_csv = replay_csv;
      cfg.write_enable = false;
      return run_twin(std::move(cfg), replay_cycles.value_or(std::numeric_limits<std::size_t>::max()), out);
    }
    if (*plan) return cmd_plan(domain_path, problem_path, max_expansions, max_length, out);
    if (*explain_cmd) {
      out << explain(read_explain_log(log_path), {case_filter, from_cycle, to_cycle});
      return kOk;
    }
    if (*report) {
      const auto traces = read_trace_log(trace_path);
      if (traces.empty()) throw ParseError({1, 1}, trace_path + ": no cycles recorded");
      out << format_timing_table(report_timings(traces));
      return kOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ModelError& e) {
    err << e.what() << "\n";
    return kDomainError;
  } catch (const ParseError& e) {
    err << e.pos().line << ":" << e.pos().column << ": " << e.message() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  }
  return kDomainError;
}

}  // namespace casetwin
