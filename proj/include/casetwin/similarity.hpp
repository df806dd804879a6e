#pragma once

// Case similarity models (.cs) and the local-global scoring they describe.
//
// Scores are distances in [0, 1]: 0 means identical, larger means less similar.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casetwin/case_base.hpp"
#include "casetwin/domain_model.hpp"

namespace casetwin {

enum class LocalMetricKind { Absolute, Squared, Manual };

struct LocalMetric {
  AttributePath path;
  LocalMetricKind kind = LocalMetricKind::Absolute;
  std::string plugin;              // Manual only
  std::optional<Range> range;      // effective normalization range
  bool range_overridden = false;   // declared in the .cs file rather than taken from the domain model
  PrimitiveType type = PrimitiveType::Float;
  bool operator==(const LocalMetric&) const = default;
};

struct WeightedAttribute {
  AttributePath path;
  double declared = 0;
  double normalized = 0;
  bool operator==(const WeightedAttribute&) const = default;
};

struct GlobalMetric {
  std::optional<std::string> manual_plugin;  // set for `global manual <name>;`
  std::vector<WeightedAttribute> weights;
  bool operator==(const GlobalMetric&) const = default;
};

struct SimilaritySpec {
  std::string name;
  std::vector<std::string> imports;
  std::vector<LocalMetric> locals;
  GlobalMetric global;

  const LocalMetric* local_for(const PathKey& key) const;
  const WeightedAttribute* weight_for(const PathKey& key) const;
  bool operator==(const SimilaritySpec&) const = default;
};

SimilaritySpec parse_similarity_spec(std::string_view source, const std::vector<DomainModel>& models);
std::string print_similarity_spec(const SimilaritySpec& spec);

/// Attribute path -> value a case is "centered" on.
using ReferencePoint = std::map<PathKey, Value>;

class ExtractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Turns a conjunctive condition into a comparable point:
///   a == v                  -> v
///   a > u && a < v          -> (u + v) / 2   (any strictness)
///   a single one-sided bound -> the bound itself
/// `!=` comparisons constrain nothing and are skipped. Disjunctions and
/// negations throw ExtractError; such cases only take part via exact matching.
ReferencePoint extract_reference(const BoolExpr& condition);
ReferencePoint extract_reference(const Case& c);

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LocalPlugin {
  std::function<double(const Value& current, const Value& reference, const LocalMetric& metric)> score;
  bool reentrant = false;
};

struct GlobalPlugin {
  std::function<double(const std::map<PathKey, Value>& current, const ReferencePoint& reference)> score;
  bool reentrant = false;
};

class PluginRegistry {
 public:
  void add_local(std::string name, LocalPlugin plugin) { locals_[std::move(name)] = std::move(plugin); }
  void add_global(std::string name, GlobalPlugin plugin) { globals_[std::move(name)] = std::move(plugin); }
  const LocalPlugin* local(const std::string& name) const;
  const GlobalPlugin* global(const std::string& name) const;

 private:
  std::map<std::string, LocalPlugin> locals_;
  std::map<std::string, GlobalPlugin> globals_;
};

/// The handcrafted metrics shipped with the runtime (`relativePressure`).
void register_builtin_plugins(PluginRegistry& registry);

/// Absolute / Squared local distance. Manual metrics go through Similarity.
double local_similarity(const LocalMetric& metric, double current, double reference);

/// A similarity spec bound to concrete plugin implementations.
class Similarity {
 public:
  /// Throws MetricError if a `manual` metric names an unregistered plugin.
  Similarity(SimilaritySpec spec, const PluginRegistry& plugins);

  const SimilaritySpec& spec() const { return spec_; }
  bool reentrant() const { return reentrant_; }

  double local(const LocalMetric& metric, const Value& current, const Value& reference) const;

  /// Weighted average of local distances over the weighted attributes the
  /// reference constrains (weights renormalized over that subset); 1 when the
  /// reference constrains none of them. Throws MetricError if the situation
  /// lacks a constrained weighted attribute.
  double global(const Situation& situation, const ReferencePoint& reference) const;

  /// Case-to-case distance over the weighted attributes both points constrain.
  double between(const ReferencePoint& lhs, const ReferencePoint& rhs) const;

 private:
  double combine(const std::map<PathKey, Value>& current, const ReferencePoint& reference, bool require_current) const;

  SimilaritySpec spec_;
  std::map<std::string, LocalPlugin> locals_;
  std::optional<GlobalPlugin> global_plugin_;
  bool reentrant_ = true;
};

}  // namespace casetwin
