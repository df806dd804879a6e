#include "casetwin/twin_runtime.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "casetwin/kv_file.hpp"

namespace fs = std::filesystem;

namespace casetwin {

// ---------------------------------------------------------------------------
// config

TwinConfig TwinConfig::load(const std::string& path) {
  KvFile kv = KvFile::load(path);
  static const std::set<std::string> known{
      "domain_model",           "case_base",          "similarity",          "pddl_domain",
      "pddl_mapping",           "retrieval_threshold", "learning_threshold", "success_penalty",
      "workers",                "port",               "seed",                "sim_constants",
      "sim_dosing_time",        "sim_cylinder_heating", "sim_injection_flow", "sim_switch_over_volume",
      "sim_back_pressure",      "replay_csv",         "replay_cycle_column", "replay_skip_malformed",
      "explain_log",            "trace_log",          "situation_log",       "write_enable",
      "persist_case_base",      "port_retries",       "planner_max_expansions", "planner_max_plan_length"};
  for (const auto& [key, entry] : kv.entries()) {
    if (!known.count(key)) throw ParseError({entry.second, 1}, path + ": unknown config key '" + key + "'");
  }

  const fs::path base = fs::path(path).parent_path();
  auto file = [&](const std::string& key) -> std::string {
    auto v = kv.get(key);
    if (!v || v->empty()) return {};
    fs::path p(*v);
    return (p.is_absolute() ? p : base / p).lexically_normal().string();
  };
  auto required = [&](const std::string& key) {
    std::string v = file(key);
    if (v.empty()) throw ParseError({1, 1}, path + ": missing required key '" + key + "'");
    return v;
  };

  TwinConfig c;
  c.domain_model = required("domain_model");
  c.case_base = required("case_base");
  c.similarity = required("similarity");
  c.pddl_domain = file("pddl_domain");
  c.pddl_mapping = file("pddl_mapping");
  if (c.pddl_domain.empty() != c.pddl_mapping.empty()) {
    throw ParseError({1, 1}, path + ": pddl_domain and pddl_mapping must be given together");
  }
  c.engine.retrieval_threshold = kv.get_double("retrieval_threshold", c.engine.retrieval_threshold);
  c.engine.learning_threshold = kv.get_double("learning_threshold", c.engine.learning_threshold);
  c.engine.success_penalty = kv.get_double("success_penalty", c.engine.success_penalty);
  c.engine.workers = static_cast<unsigned>(std::max<std::int64_t>(1, kv.get_int("workers", 1)));
  c.port = kv.get_or("port", "sim");
  if (c.port != "sim" && c.port != "replay") throw ParseError({1, 1}, path + ": port must be 'sim' or 'replay'");
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  c.sim_constants = file("sim_constants");
  c.sim.dosing_time = kv.get_double("sim_dosing_time", c.sim.dosing_time);
  c.sim.cylinder_heating = kv.get_int("sim_cylinder_heating", c.sim.cylinder_heating);
  c.sim.injection_flow = kv.get_double("sim_injection_flow", c.sim.injection_flow);
  c.sim.switch_over_volume = kv.get_double("sim_switch_over_volume", c.sim.switch_over_volume);
  c.sim.back_pressure = kv.get_double("sim_back_pressure", c.sim.back_pressure);
  c.replay_csv = file("replay_csv");
  c.replay_cycle_column = kv.get_or("replay_cycle_column", c.replay_cycle_column);
  c.replay_skip_malformed = kv.get_bool("replay_skip_malformed", false);
  if (c.port == "replay" && c.replay_csv.empty()) throw ParseError({1, 1}, path + ": replay port needs replay_csv");
  c.explain_log = file("explain_log");
  c.trace_log = file("trace_log");
  c.situation_log = file("situation_log");
  c.write_enable = kv.get_bool("write_enable", true);
  c.persist_case_base = kv.get_bool("persist_case_base", true);
  c.port_retries = static_cast<int>(kv.get_int("port_retries", 3));
  c.planner.max_expansions = static_cast<std::size_t>(kv.get_int("planner_max_expansions", 100000));
  c.planner.max_plan_length = static_cast<std::size_t>(kv.get_int("planner_max_plan_length", 64));
  try {
    for (const auto& w : c.engine.validate()) spdlog::warn("{}: {}", path, w);
  } catch (const std::invalid_argument& e) {
    throw ParseError({1, 1}, path + ": " + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// model loading

ModelError::ModelError(std::string file, SourcePos pos, std::string message)
    : std::runtime_error(file + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      file_(std::move(file)),
      pos_(pos) {}

namespace {

SourcePos line_of(const std::string& text, const std::string& needle) {
  const auto at = text.find(needle);
  if (at == std::string::npos) return {1, 1};
  return {static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n')) + 1, 1};
}

template <typename F>
auto parse_file(const std::string& path, F&& parse) {
  const std::string text = read_text_file(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw ModelError(path, e.pos(), e.message());
  }
}

}  // namespace

LoadedModels load_models(const std::string& domain_path, const std::string& case_base_path,
                         const std::string& similarity_path, const std::string& pddl_path,
                         const std::string& mapping_path) {
  LoadedModels m;
  m.domains.push_back(parse_file(domain_path, [](const std::string& t) { return parse_domain_model(t); }));
  m.case_base = parse_file(case_base_path, [&](const std::string& t) { return parse_case_base(t, m.domains); });
  m.similarity =
      parse_file(similarity_path, [&](const std::string& t) { return parse_similarity_spec(t, m.domains); });
  if (!pddl_path.empty()) {
    m.pddl = parse_file(pddl_path, [](const std::string& t) { return pddl::parse_pddl_domain(t); });
  }
  if (!mapping_path.empty()) {
    m.mapping = parse_file(mapping_path, [](const std::string& t) { return parse_mapping(t); });
  }
  if (m.mapping && m.pddl) {
    try {
      check_mapping(*m.mapping, *m.pddl, scope_of(m.case_base, m.domains));
    } catch (const MappingError& e) {
      throw ModelError(mapping_path, {1, 1}, e.what());
    }
  }

  const std::string cb_text = read_text_file(case_base_path);
  for (const auto& c : m.case_base.cases) {
    const auto* goal = c.fallback ? std::get_if<PddlGoalDirective>(&*c.fallback) : nullptr;
    if (!goal) continue;
    const SourcePos at = line_of(cb_text, "case " + c.name);
    if (!m.pddl || !m.mapping) {
      throw ModelError(case_base_path, at,
                       "case '" + c.name + "' falls back to planning but no PDDL knowledge base is configured");
    }
    if (auto err = check_goal_directive(*goal, *m.mapping, *m.pddl)) {
      throw ModelError(case_base_path, at, "case '" + c.name + "': " + *err);
    }
  }
  return m;
}

LoadedModels load_models(const TwinConfig& cfg) {
  return load_models(cfg.domain_model, cfg.case_base, cfg.similarity, cfg.pddl_domain, cfg.pddl_mapping);
}

// ---------------------------------------------------------------------------
// timing

Clock steady_clock_ms() {
  return [] {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
  };
}

Clock step_clock() {
  auto t = std::make_shared<double>(0);
  return [t] { return *t += 1.0; };
}

std::vector<TimingRow> report_timings(const std::vector<CycleTrace>& traces) {
  std::vector<TimingRow> rows{{"FirstCycle"}, {"NoCase"}, {"CaseDetected"}};
  auto add = [](TimingRow& r, double v) {
    if (r.count == 0) {
      r.min = r.max = v;
    } else {
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
    }
    r.avg += v;
    ++r.count;
  };
  for (std::size_t i = 0; i < traces.size(); ++i) {
    TimingRow& r = i == 0 ? rows[0] : rows[traces[i].case_held ? 2 : 1];
    add(r, traces[i].total_ms);
  }
  for (auto& r : rows) {
    if (r.count) r.avg /= static_cast<double>(r.count);
  }
  return rows;
}

std::string format_timing_table(const std::vector<TimingRow>& rows) {
  std::string out = fmt::format("{:<14}{:>8}{:>12}{:>12}{:>12}\n", "cycle", "count", "min ms", "max ms", "avg ms");
  for (const auto& r : rows) {
    if (r.count == 0) {
      out += fmt::format("{:<14}{:>8}{:>12}{:>12}{:>12}\n", r.name, 0, "absent", "absent", "absent");
    } else {
      out += fmt::format("{:<14}{:>8}{:>12.5f}{:>12.5f}{:>12.5f}\n", r.name, r.count, r.min, r.max, r.avg);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// runtime

struct TwinRuntime::Episode {
  enum class Await { Case, Plan };
  ExplainRecord record;
  BoolExpr trigger_condition;
  FallbackDirective fallback;
  RetrievalResult retrieval;
  Await await = Await::Case;
  std::size_t rank = 0;
  Situation before;
  std::vector<PlannedAssignment> executed;
};

namespace {

bool holds_quietly(const BoolExpr& e, const Situation& s) {
  try {
    return eval_condition(e, s);
  } catch (const EvalError&) {
    return false;
  }
}

std::string describe_write(const PlannedAssignment& a) { return a.target.key() + " := " + format_value(a.value); }

}  // namespace

TwinRuntime::TwinRuntime(TwinConfig cfg, RuntimeOptions options, std::unique_ptr<MachinePort> port)
    : cfg_(std::move(cfg)), opts_(std::move(options)), port_(std::move(port)) {
  if (!opts_.clock) opts_.clock = steady_clock_ms();
  if (!opts_.reuse) opts_.reuse = std::make_shared<MostSimilarReuse>();
  register_builtin_plugins(opts_.plugins);
}

TwinRuntime::~TwinRuntime() = default;

const CaseBase& TwinRuntime::case_base() const { return models_->case_base; }

void TwinRuntime::bind_models(LoadedModels models) {
  auto m = std::make_unique<LoadedModels>(std::move(models));
  auto sim = std::make_unique<Similarity>(m->similarity, opts_.plugins);
  std::vector<const DomainModel*> ptrs;
  for (const auto& d : m->domains) ptrs.push_back(&d);
  scope_ = DomainScope(std::move(ptrs));
  models_ = std::move(m);
  similarity_ = std::move(sim);
}

void TwinRuntime::start() {
  if (started_) return;
  const double t0 = opts_.clock();
  bind_models(load_models(cfg_));
  if (!port_) {
    if (cfg_.port == "sim") {
      SimConstants k;
      if (!cfg_.sim_constants.empty()) k = SimConstants::from_kv(KvFile::load(cfg_.sim_constants));
      port_ = std::make_unique<PlantSimulator>(cfg_.sim, k, cfg_.seed);
    } else {
      port_ = std::make_unique<ReplaySource>(cfg_.replay_csv, scope_, cfg_.replay_cycle_column,
                                             cfg_.replay_skip_malformed);
    }
  }
  for (const auto* log : {&cfg_.explain_log, &cfg_.situation_log, &cfg_.trace_log}) {
    const fs::path parent = fs::path(*log).parent_path();
    std::error_code ec;
    if (!log->empty() && !parent.empty()) fs::create_directories(parent, ec);
  }
  if (!cfg_.explain_log.empty()) explain_ = std::make_unique<ExplainLogWriter>(cfg_.explain_log);
  if (!cfg_.situation_log.empty()) situations_ = std::make_unique<SituationLogWriter>(cfg_.situation_log);
  if (!cfg_.trace_log.empty()) {
    traces_out_ = std::make_unique<std::ofstream>(cfg_.trace_log, std::ios::trunc);
    if (!*traces_out_) throw IoError("cannot open trace log '" + cfg_.trace_log + "'");
    *traces_out_ << "cycle,path,case_held,load_ms,evaluate_ms,retrieve_ms,reuse_ms,plan_ms,execute_ms,revise_ms,"
                    "retain_ms,total_ms\n";
  }
  pending_load_ms_ = opts_.clock() - t0;
  started_ = true;
}

std::optional<Situation> TwinRuntime::read_with_retries() {
  std::string last;
  for (int attempt = 0; attempt <= cfg_.port_retries; ++attempt) {
    try {
      return port_->read_cycle();
    } catch (const PortError& e) {
      last = e.what();
      spdlog::warn("port read failed (attempt {}): {}", attempt + 1, last);
    }
  }
  summary_.aborted = true;
  summary_.abort_reason = "port failure after " + std::to_string(cfg_.port_retries) + " retries: " + last;
  spdlog::error("{}", summary_.abort_reason);
  return std::nullopt;
}

Situation TwinRuntime::project(const Situation& raw) const {
  Situation s;
  s.cycle_id = raw.cycle_id;
  for (const auto& [key, value] : raw.values) {
    try {
      const AttributeInfo info = scope_.resolve(AttributePath::from_key(key));
      if (info.type == PrimitiveType::Float && std::holds_alternative<std::int64_t>(value)) {
        s.values[key] = static_cast<double>(std::get<std::int64_t>(value));
      } else {
        s.values[key] = value;
      }
    } catch (const std::exception&) {
      // not part of the domain vocabulary
    }
  }
  return s;
}

void TwinRuntime::reload_models() {
  reload_ = false;
  try {
    bind_models(load_models(cfg_));
    spdlog::info("models reloaded");
  } catch (const std::exception& e) {
    spdlog::error("model reload failed, keeping previous models: {}", e.what());
  }
}

void TwinRuntime::persist_case_base() {
  if (!cfg_.persist_case_base) return;
  write_text_file_atomic(cfg_.case_base, print_case_base(models_->case_base));
}

bool TwinRuntime::step() {
  if (!started_) start();
  if (stop_) return false;
  if (reload_ && !episode_) reload_models();

  const double t0 = opts_.clock();
  CycleTrace trace;
  trace.load_ms = pending_load_ms_;
  pending_load_ms_ = 0;

  auto raw = read_with_retries();
  if (!raw) return false;
  const Situation s = project(*raw);
  trace.cycle = s.cycle_id;
  if (situations_) situations_->append(s);

  const double te = opts_.clock();
  std::vector<std::string> holding;
  for (const auto& c : models_->case_base.cases) {
    if (holds_quietly(c.condition, s)) holding.push_back(c.name);
  }
  trace.case_held = !holding.empty();
  trace.evaluate_ms = opts_.clock() - te;

  if (episode_) {
    handle_pending(s, trace);
    if (trace.path.empty()) trace.path = "outcome";
  } else if (!holding.empty()) {
    start_episode(s, holding, trace);
  }
  if (trace.path.empty()) trace.path = "no-trigger";
  trace.total_ms = opts_.clock() - t0 + trace.load_ms;

  if (traces_out_) {
    *traces_out_ << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", trace.cycle, trace.path, trace.case_held,
                                trace.load_ms, trace.evaluate_ms, trace.retrieve_ms, trace.reuse_ms, trace.plan_ms,
                                trace.execute_ms, trace.revise_ms, trace.retain_ms, trace.total_ms);
    traces_out_->flush();
  }
  summary_.traces.push_back(std::move(trace));
  ++summary_.cycles;
  return true;
}

void TwinRuntime::start_episode(const Situation& s, const std::vector<std::string>& holding, CycleTrace& trace) {
  const CaseBase& cb = models_->case_base;
  const Case* primary = nullptr;
  for (const auto& name : holding) {
    const Case* c = cb.find(name);
    if (c->kind() == CaseKind::Unknown) {
      primary = c;
      break;
    }
  }
  if (!primary) primary = cb.find(holding.front());

  auto e = std::make_unique<Episode>();
  e->record.episode = next_episode_++;
  e->record.cycle = s.cycle_id;
  e->record.closed_cycle = s.cycle_id;
  e->record.triggers = holding;
  e->record.primary_trigger = primary->name;
  e->record.situation = s.values;
  e->trigger_condition = primary->condition;
  e->fallback = primary->fallback ? *primary->fallback : default_fallback(*primary);

  const double tr = opts_.clock();
  e->retrieval = retrieve(s, cb, *similarity_, cfg_.engine);
  trace.retrieve_ms = opts_.clock() - tr;
  for (const auto& c : e->retrieval.ranked) e->record.candidates.push_back({c.case_name, c.raw, c.effective});

  const bool has_candidate = !e->retrieval.ranked.empty();
  episode_ = std::move(e);
  if (has_candidate) {
    try_case(0, s, trace);
  } else {
    run_fallback(episode_->fallback, s, trace);
  }
}

void TwinRuntime::try_case(std::size_t rank, const Situation& s, CycleTrace& trace) {
  Episode& e = *episode_;
  const double tu = opts_.clock();
  std::optional<SolutionPlan> plan;
  std::vector<PlannedAssignment> writes;
  for (; rank < e.retrieval.ranked.size(); ++rank) {
    try {
      plan = opts_.reuse->reuse(e.retrieval, rank, models_->case_base, s, opts_.handlers);
      if (!plan) break;
      writes.clear();
      for (const auto& step : plan->steps) {
        if (const auto* a = std::get_if<PlannedAssignment>(&step)) {
          writes.push_back(*a);
        } else {
          const auto& call = std::get<PlannedCall>(step);
          auto extra = (*opts_.handlers.find(call.handler))(call.args, s);
          writes.insert(writes.end(), extra.begin(), extra.end());
        }
      }
      break;
    } catch (const std::exception& err) {
      e.record.notes.push_back("case '" + e.retrieval.ranked[rank].case_name + "' not reusable: " + err.what());
      plan.reset();
    }
  }
  trace.reuse_ms += opts_.clock() - tu;
  if (!plan) {
    run_fallback(e.fallback, s, trace);
    return;
  }

  ExplainAttempt attempt{plan->case_name, rank, {}, std::nullopt};
  for (const auto& step : plan->steps) attempt.steps.push_back(describe(step));
  e.record.attempts.push_back(std::move(attempt));
  trace.path = "case-applied";

  const double tx = opts_.clock();
  if (!cfg_.write_enable || !port_->capabilities().writable) {
    ++summary_.recommendations;
    e.record.notes.push_back("recommendation only; machine not written");
    trace.execute_ms += opts_.clock() - tx;
    close_episode("recommended", s.cycle_id);
    return;
  }
  WriteAck ack = port_->write_config(writes);
  trace.execute_ms += opts_.clock() - tx;
  if (!ack.accepted) {
    e.record.notes.push_back("port rejected write: " + ack.reason);
    close_episode("rejected", s.cycle_id);
    return;
  }
  ++summary_.port_writes;
  ++summary_.case_applications;
  e.await = Episode::Await::Case;
  e.rank = rank;
  e.before = s;
  e.executed = std::move(writes);
}

void TwinRuntime::run_fallback(const FallbackDirective& fb, const Situation& s, CycleTrace& trace) {
  Episode& e = *episode_;
  e.record.fallback = print_fallback(fb);
  ++summary_.fallbacks;

  if (const auto* n = std::get_if<NotifyDirective>(&fb)) {
    trace.path = "notify";
    spdlog::warn("operator notification (cycle {}): {}", s.cycle_id, n->message);
    e.record.notes.push_back("notified: " + n->message);
    close_episode("notified", s.cycle_id);
    return;
  }

  trace.path = "fallback";
  const auto& goal = std::get<PddlGoalDirective>(fb);
  if (!models_->pddl || !models_->mapping) {
    e.record.notes.push_back("no planning knowledge base loaded");
    close_episode("plan-failed", s.cycle_id);
    return;
  }
  const pddl::PddlDomain& domain = *models_->pddl;
  const MachineMapping& mapping = *models_->mapping;

  const double tp = opts_.clock();
  FallbackProblem fp;
  try {
    fp = goal_from_fallback(goal, s, mapping, domain);
  } catch (const std::exception& err) {
    trace.plan_ms += opts_.clock() - tp;
    e.record.notes.push_back(err.what());
    close_episode("plan-failed", s.cycle_id);
    return;
  }
  for (const auto& w : fp.warnings) e.record.notes.push_back(w);
  const pddl::PlanResult result = pddl::plan(domain, fp.problem, cfg_.planner);
  trace.plan_ms += opts_.clock() - tp;

  if (std::holds_alternative<pddl::Unsolvable>(result)) {
    e.record.planner = "unsolvable";
    close_episode("plan-failed", s.cycle_id);
    return;
  }
  if (std::holds_alternative<pddl::LimitExceeded>(result)) {
    e.record.planner = "limit-exceeded";
    e.record.notes.push_back(pddl::describe(result));
    close_episode("plan-failed", s.cycle_id);
    return;
  }
  const auto& plan = std::get<pddl::Plan>(result);
  e.record.planner = "plan";
  e.record.plan = plan.steps;
  const pddl::Validation v = pddl::validate_plan(domain, fp.problem, plan.steps);
  if (!v.valid) {
    e.record.notes.push_back("plan rejected by validator: " + v.message);
    close_episode("plan-failed", s.cycle_id);
    return;
  }
  std::vector<PlannedAssignment> writes;
  try {
    writes = writes_from_plan(plan.steps, fp.problem, mapping, domain, scope_);
  } catch (const std::exception& err) {
    e.record.notes.push_back(err.what());
    close_episode("plan-failed", s.cycle_id);
    return;
  }
  for (const auto& w : writes) e.record.writes.push_back(describe_write(w));
  if (writes.empty()) {
    e.record.notes.push_back("plan changes no writable attribute");
    close_episode("plan-failed", s.cycle_id);
    return;
  }

  const double tx = opts_.clock();
  if (!cfg_.write_enable || !port_->capabilities().writable) {
    ++summary_.recommendations;
    e.record.notes.push_back("recommendation only; machine not written");
    trace.execute_ms += opts_.clock() - tx;
    close_episode("recommended", s.cycle_id);
    return;
  }
  WriteAck ack = port_->write_config(writes);
  trace.execute_ms += opts_.clock() - tx;
  if (!ack.accepted) {
    e.record.notes.push_back("port rejected write: " + ack.reason);
    close_episode("rejected", s.cycle_id);
    return;
  }
  ++summary_.port_writes;
  e.await = Episode::Await::Plan;
  e.before = s;
  e.executed = std::move(writes);
}

void TwinRuntime::handle_pending(const Situation& s, CycleTrace& trace) {
  Episode& e = *episode_;
  CaseBase& cb = models_->case_base;

  auto learn = [&](const Outcome& o, std::optional<double> applied_raw) {
    const double tr = opts_.clock();
    RetainRequest req{&o, &e.trigger_condition, e.executed, applied_raw, std::to_string(e.record.cycle)};
    RetainResult r = retain(req, cb, *similarity_, cfg_.engine);
    e.record.learned_case = r.learned_case;
    e.record.reinforced_case = r.reinforced_case;
    if (r.nearest_case || r.added) e.record.min_score = r.min_score;
    if (r.added) {
      ++summary_.learned;
      persist_case_base();
    }
    trace.retain_ms += opts_.clock() - tr;
  };

  if (e.await == Episode::Await::Plan) {
    Outcome o;
    o.before = e.before;
    o.after = s;
    o.success = !holds_quietly(e.trigger_condition, s);
    if (!o.success) {
      close_episode("plan-failed", s.cycle_id);
      return;
    }
    learn(o, std::nullopt);
    close_episode("success", s.cycle_id);
    return;
  }

  const std::string applied = e.record.attempts.back().case_name;
  const Case* c = cb.find(applied);
  if (!c) {
    e.record.notes.push_back("case '" + applied + "' vanished before its outcome was observed");
    close_episode("unresolved", s.cycle_id);
    return;
  }
  const double tv = opts_.clock();
  const Outcome o = observe_outcome(*c, e.before, s);
  e.record.attempts.back().success = o.success;
  const ReviseAction action = revise(o, cb, e.fallback, e.retrieval, e.rank);
  persist_case_base();
  trace.revise_ms += opts_.clock() - tv;

  if (std::holds_alternative<ReviseDone>(action)) {
    learn(o, e.retrieval.ranked[e.rank].raw);
    close_episode("success", s.cycle_id);
  } else if (const auto* next = std::get_if<ReviseTryNext>(&action)) {
    try_case(next->rank, s, trace);
  } else {
    run_fallback(std::get<ReviseFallback>(action).directive, s, trace);
  }
}

void TwinRuntime::close_episode(std::string outcome, std::int64_t cycle) {
  if (!episode_) return;
  episode_->record.outcome = std::move(outcome);
  episode_->record.closed_cycle = cycle;
  if (explain_) explain_->append(episode_->record);
  ++summary_.episodes;
  episode_.reset();
}

void TwinRuntime::finish() {
  if (episode_) {
    const std::int64_t last = summary_.traces.empty() ? episode_->record.cycle : summary_.traces.back().cycle;
    close_episode("unresolved", last);
  }
}

RunSummary TwinRuntime::run(std::optional<std::size_t> cycles) {
  start();
  while (!cycles || summary_.cycles < *cycles) {
    if (!step()) break;
  }
  finish();
  return summary_;
}

}  // namespace casetwin
