#include "casetwin/cbr_engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

namespace casetwin {

std::vector<std::string> EngineConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(retrieval_threshold)) throw std::invalid_argument("retrieval threshold must lie in (0, 1]");
  if (!in_unit(learning_threshold)) throw std::invalid_argument("learning threshold must lie in (0, 1]");
  if (!in_unit(success_penalty)) throw std::invalid_argument("success penalty factor must lie in (0, 1]");
  std::vector<std::string> warnings;
  if (retrieval_threshold > learning_threshold) {
    warnings.push_back("retrieval threshold exceeds learning threshold; learned cases may duplicate retrievable ones");
  }
  return warnings;
}

double success_rate(const CaseStats& stats) {
  return static_cast<double>(stats.successes + 1) / static_cast<double>(stats.applications + 2);
}

double effective_score(double raw, const CaseStats& stats, const EngineConfig& cfg) {
  return raw + cfg.success_penalty * (1.0 - success_rate(stats));
}

// ---------------------------------------------------------------------------
// retrieve

namespace {

bool holds(const BoolExpr& condition, const Situation& s) {
  try {
    return eval_condition(condition, s);
  } catch (const EvalError& e) {
    spdlog::warn("condition skipped at cycle {}: {}", s.cycle_id, e.what());
    return false;
  }
}

struct Scored {
  std::optional<double> raw;
  bool extractable = true;
};

Scored score_case(const Case& c, const Situation& s, const Similarity& sim) {
  Scored out;
  ReferencePoint ref;
  try {
    ref = extract_reference(c);
  } catch (const ExtractError&) {
    out.extractable = false;
    return out;
  }
  try {
    out.raw = sim.global(s, ref);
  } catch (const MetricError& e) {
    spdlog::warn("case '{}' not scored: {}", c.name, e.what());
  }
  return out;
}

}  // namespace

RetrievalResult retrieve(const Situation& s, const CaseBase& cb, const Similarity& sim, const EngineConfig& cfg) {
  RetrievalResult result;
  result.threshold = cfg.retrieval_threshold;

  std::vector<const Case*> known;
  for (const auto& c : cb.cases) {
    if (c.kind() == CaseKind::Unknown) {
      if (holds(c.condition, s)) result.triggers.push_back(c.name);
    } else {
      known.push_back(&c);
    }
  }

  std::vector<Scored> scores(known.size());
  const unsigned workers = std::min<std::size_t>(cfg.workers, known.size());
  if (workers > 1 && sim.reentrant()) {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < known.size(); i += workers) scores[i] = score_case(*known[i], s, sim);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < known.size(); ++i) scores[i] = score_case(*known[i], s, sim);
  }

  for (std::size_t i = 0; i < known.size(); ++i) {
    const Case& c = *known[i];
    if (!scores[i].extractable) {
      if (holds(c.condition, s)) result.triggers.push_back(c.name);
      continue;
    }
    if (!scores[i].raw || !(*scores[i].raw < cfg.retrieval_threshold)) continue;
    result.ranked.push_back({c.name, *scores[i].raw, effective_score(*scores[i].raw, c.stats, cfg)});
  }
  std::sort(result.ranked.begin(), result.ranked.end(), [](const Candidate& a, const Candidate& b) {
    if (a.effective != b.effective) return a.effective < b.effective;
    return a.case_name < b.case_name;
  });
  return result;
}

// ---------------------------------------------------------------------------
// reuse

const SolutionHandler* HandlerRegistry::find(const std::string& name) const {
  auto it = handlers_.find(name);
  return it == handlers_.end() ? nullptr : &it->second;
}

std::string describe(const PlanStep& step) {
  if (const auto* a = std::get_if<PlannedAssignment>(&step)) return a->target.key() + " := " + format_value(a->value);
  const auto& call = std::get<PlannedCall>(step);
  std::string out = "call " + call.handler + "(";
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    if (i) out += ", ";
    out += format_value(call.args[i]);
  }
  return out + ")";
}

SolutionPlan instantiate(const Case& c, std::size_t rank, const Situation& s, const HandlerRegistry& handlers) {
  if (!c.solution) throw ReuseError("case '" + c.name + "' has no solution");
  SolutionPlan plan{c.name, rank, {}};
  for (const auto& part : c.solution->parts) {
    if (const auto* a = std::get_if<Assignment>(&part)) {
      plan.steps.push_back(PlannedAssignment{a->target, eval_arith(a->value, s)});
    } else {
      const auto& call = std::get<HandlerCall>(part);
      if (!handlers.find(call.handler)) {
        throw ReuseError("solution handler '" + call.handler + "' of case '" + c.name + "' is not registered");
      }
      PlannedCall planned{call.handler, {}};
      for (const auto& arg : call.args) planned.args.push_back(eval_arith(arg, s));
      plan.steps.push_back(std::move(planned));
    }
  }
  return plan;
}

std::optional<SolutionPlan> MostSimilarReuse::reuse(const RetrievalResult& r, std::size_t rank, const CaseBase& cb,
                                                    const Situation& s, const HandlerRegistry& handlers) const {
  if (rank >= r.ranked.size()) return std::nullopt;
  const Case* c = cb.find(r.ranked[rank].case_name);
  if (!c) throw ReuseError("retrieved case '" + r.ranked[rank].case_name + "' no longer in the case base");
  return instantiate(*c, rank, s, handlers);
}

std::optional<SolutionPlan> reuse(const RetrievalResult& r, const CaseBase& cb, const Situation& s,
                                  const HandlerRegistry& handlers) {
  return MostSimilarReuse{}.reuse(r, 0, cb, s, handlers);
}

// ---------------------------------------------------------------------------
// revise

Outcome observe_outcome(const Case& applied, Situation before, Situation after) {
  Outcome o;
  o.applied_case = applied.name;
  o.success = applied.solution && holds(applied.solution->yields, after);
  o.before = std::move(before);
  o.after = std::move(after);
  return o;
}

ReviseAction revise(const Outcome& o, CaseBase& cb, const std::optional<FallbackDirective>& fallback,
                    const RetrievalResult& r, std::size_t applied_rank) {
  if (Case* c = cb.find(o.applied_case)) {
    c->stats.applications += 1;
    if (o.success) c->stats.successes += 1;
  }
  if (o.success) return ReviseDone{};
  const std::size_t next = applied_rank + 1;
  if (next < r.ranked.size()) return ReviseTryNext{next, r.ranked[next].case_name};
  if (fallback) return ReviseFallback{*fallback};
  return ReviseFallback{NotifyDirective{"case '" + o.applied_case + "' failed and no alternative remains"}};
}

// ---------------------------------------------------------------------------
// retain

Case build_learned_case(const RetainRequest& req, const CaseBase& cb) {
  if (!req.outcome || !req.trigger_condition) throw std::invalid_argument("retain needs an outcome and a trigger");
  std::set<PathKey> touched;
  collect_paths(*req.trigger_condition, touched);
  for (const auto& a : req.executed) touched.insert(a.target.key());

  std::vector<BoolExpr> equalities;
  for (const auto& key : touched) {
    const Value* v = req.outcome->before.find(key);
    if (!v) continue;
    equalities.push_back(BoolExpr::compare(AttributePath::from_key(key), CompareOp::Equal, *v));
  }
  if (equalities.empty()) throw std::invalid_argument("outcome situation holds none of the touched attributes");

  Case learned;
  std::string base = "learned_" + req.name_stamp;
  learned.name = base;
  for (int n = 2; cb.find(learned.name); ++n) learned.name = base + "_" + std::to_string(n);
  learned.condition = BoolExpr::conjunction(std::move(equalities));
  Solution sol;
  for (const auto& a : req.executed) sol.parts.push_back(Assignment{a.target, ArithExpr::constant(a.value)});
  sol.yields = BoolExpr::negation(*req.trigger_condition);
  learned.solution = std::move(sol);
  return learned;
}

RetainResult retain(const RetainRequest& req, CaseBase& cb, const Similarity& sim, const EngineConfig& cfg) {
  RetainResult result;
  if (!req.outcome || !req.outcome->success) return result;
  const bool from_case = !req.outcome->applied_case.empty() && cb.find(req.outcome->applied_case);

  if (req.applied_raw_score && *req.applied_raw_score == 0.0) {
    result.min_score = 0.0;
    result.nearest_case = req.outcome->applied_case;
    if (from_case) result.reinforced_case = req.outcome->applied_case;
    return result;
  }
  if (req.executed.empty()) return result;

  Case candidate = build_learned_case(req, cb);
  const ReferencePoint candidate_ref = extract_reference(candidate);
  for (const auto& c : cb.cases) {
    if (c.kind() != CaseKind::Known) continue;
    ReferencePoint ref;
    try {
      ref = extract_reference(c);
    } catch (const ExtractError&) {
      continue;
    }
    const double d = sim.between(candidate_ref, ref);
    if (!result.nearest_case || d < result.min_score) {
      result.min_score = d;
      result.nearest_case = c.name;
    }
  }

  if (result.min_score > cfg.learning_threshold) {
    result.added = true;
    result.learned_case = candidate.name;
    cb.cases.push_back(std::move(candidate));
  } else if (from_case) {
    result.reinforced_case = req.outcome->applied_case;
  }
  return result;
}

}  // namespace casetwin
