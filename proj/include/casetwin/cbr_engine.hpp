#pragma once

// The four phases of the case-based reasoning cycle over a CaseBase.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "casetwin/case_base.hpp"
#include "casetwin/similarity.hpp"

namespace casetwin {

struct EngineConfig {
  double retrieval_threshold = 0.2;
  double learning_threshold = 0.3;
  double success_penalty = 0.5;
  unsigned workers = 1;  // >1 scores cases on worker threads when all plugins are reentrant

  /// Throws std::invalid_argument for values outside (0, 1]; returns advisory warnings.
  std::vector<std::string> validate() const;
};

/// Laplace-smoothed: (successes + 1) / (applications + 2).
double success_rate(const CaseStats& stats);
double effective_score(double raw, const CaseStats& stats, const EngineConfig& cfg);

struct Candidate {
  std::string case_name;
  double raw = 0;
  double effective = 0;
  bool operator==(const Candidate&) const = default;
};

struct RetrievalResult {
  std::vector<Candidate> ranked;      // ascending effective score, ties by name
  std::vector<std::string> triggers;  // unknown / non-extractable cases whose condition holds
  double threshold = 0;
  bool operator==(const RetrievalResult&) const = default;
};

RetrievalResult retrieve(const Situation& s, const CaseBase& cb, const Similarity& sim, const EngineConfig& cfg);

// ---------------------------------------------------------------------------
// reuse

struct PlannedAssignment {
  AttributePath target;
  Value value;
  bool operator==(const PlannedAssignment&) const = default;
};

struct PlannedCall {
  std::string handler;
  std::vector<Value> args;
  bool operator==(const PlannedCall&) const = default;
};

using PlanStep = std::variant<PlannedAssignment, PlannedCall>;

struct SolutionPlan {
  std::string case_name;
  std::size_t rank = 0;
  std::vector<PlanStep> steps;
};

std::string describe(const PlanStep& step);

/// In-process solution extension: receives evaluated call arguments and may
/// contribute further assignments to the write batch.
using SolutionHandler =
    std::function<std::vector<PlannedAssignment>(const std::vector<Value>& args, const Situation& s)>;

class HandlerRegistry {
 public:
  void add(std::string name, SolutionHandler handler) { handlers_[std::move(name)] = std::move(handler); }
  const SolutionHandler* find(const std::string& name) const;

 private:
  std::map<std::string, SolutionHandler> handlers_;
};

class ReuseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instantiates a case's solution against the situation.
SolutionPlan instantiate(const Case& c, std::size_t rank, const Situation& s, const HandlerRegistry& handlers);

class ReuseStrategy {
 public:
  virtual ~ReuseStrategy() = default;
  /// nullopt means NoCandidate.
  virtual std::optional<SolutionPlan> reuse(const RetrievalResult& r, std::size_t rank, const CaseBase& cb,
                                            const Situation& s, const HandlerRegistry& handlers) const = 0;
};

/// Applies the candidate at `rank` verbatim (rank 0 is the most similar case).
class MostSimilarReuse : public ReuseStrategy {
 public:
  std::optional<SolutionPlan> reuse(const RetrievalResult& r, std::size_t rank, const CaseBase& cb,
                                    const Situation& s, const HandlerRegistry& handlers) const override;
};

std::optional<SolutionPlan> reuse(const RetrievalResult& r, const CaseBase& cb, const Situation& s,
                                  const HandlerRegistry& handlers = {});

// ---------------------------------------------------------------------------
// revise

struct Outcome {
  Situation before;
  Situation after;
  std::string applied_case;
  bool success = false;
};

/// success is whether the case's `yields` holds on `after`.
Outcome observe_outcome(const Case& applied, Situation before, Situation after);

struct ReviseDone {};
struct ReviseTryNext {
  std::size_t rank = 0;
  std::string case_name;
};
struct ReviseFallback {
  FallbackDirective directive;
};
using ReviseAction = std::variant<ReviseDone, ReviseTryNext, ReviseFallback>;

/// Records the outcome in the applied case's stats and decides what to do next.
ReviseAction revise(const Outcome& o, CaseBase& cb, const std::optional<FallbackDirective>& fallback,
                    const RetrievalResult& r, std::size_t applied_rank);

// ---------------------------------------------------------------------------
// retain

struct RetainRequest {
  const Outcome* outcome = nullptr;
  const BoolExpr* trigger_condition = nullptr;    // becomes the negated `yields` of a learned case
  std::vector<PlannedAssignment> executed;        // the writes that produced the outcome
  std::optional<double> applied_raw_score;        // unset when the plan came from the fallback
  std::string name_stamp;                         // learned_<name_stamp>
};

struct RetainResult {
  bool added = false;
  std::optional<std::string> learned_case;
  double min_score = 1.0;
  std::optional<std::string> nearest_case;
  std::optional<std::string> reinforced_case;
};

/// Builds the equality-condition case for a successful outcome and adds it to
/// `cb` when it is farther than the learning threshold from every known case.
/// Callers persist `cb` when `added` is set.
RetainResult retain(const RetainRequest& req, CaseBase& cb, const Similarity& sim, const EngineConfig& cfg);

Case build_learned_case(const RetainRequest& req, const CaseBase& cb);

}  // namespace casetwin
