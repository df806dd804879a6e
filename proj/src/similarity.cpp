#include "casetwin/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace casetwin {

const LocalMetric* SimilaritySpec::local_for(const PathKey& key) const {
  for (const auto& l : locals) {
    if (l.path.key() == key) return &l;
  }
  return nullptr;
}

const WeightedAttribute* SimilaritySpec::weight_for(const PathKey& key) const {
  for (const auto& w : global.weights) {
    if (w.path.key() == key) return &w;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

LocalMetric parse_local(Lexer& lex, const DomainScope& scope) {
  SourcePos at = lex.peek().pos;
  LocalMetric metric;
  metric.path = parse_attribute_path(lex);
  AttributeInfo info;
  try {
    info = scope.resolve(metric.path);
  } catch (const ResolutionError& e) {
    throw ParseError(at, e.what());
  }
  metric.type = info.type;
  metric.range = info.range;

  Token kind = lex.expect_identifier("metric kind");
  if (kind.text == "absolute") {
    metric.kind = LocalMetricKind::Absolute;
  } else if (kind.text == "squared") {
    metric.kind = LocalMetricKind::Squared;
  } else if (kind.text == "manual") {
    metric.kind = LocalMetricKind::Manual;
    metric.plugin = lex.expect_identifier("plugin name").text;
  } else {
    lex.fail(kind, "unknown local metric '" + kind.text + "' (expected absolute, squared or manual)");
  }

  if (lex.is_keyword("range")) {
    Token range_tok = lex.next();
    lex.expect_punct("[");
    double lo = lex.expect_number("range minimum");
    lex.expect_punct(",");
    double hi = lex.expect_number("range maximum");
    lex.expect_punct("]");
    if (!is_numeric(info.type)) lex.fail(range_tok, "range on non-numeric attribute '" + metric.path.key() + "'");
    if (!(lo < hi)) lex.fail(range_tok, "malformed range: minimum must be below maximum");
    metric.range = Range{lo, hi};
    metric.range_overridden = true;
  }
  if (metric.kind != LocalMetricKind::Manual) {
    if (!is_numeric(info.type)) {
      lex.fail(kind, "'" + kind.text + "' metric needs a numeric attribute, '" + metric.path.key() + "' is " +
                         std::string(to_string(info.type)));
    }
    if (!metric.range) {
      lex.fail(kind, "'" + kind.text + "' metric needs a range for '" + metric.path.key() +
                         "' (declare one in the domain model or here)");
    }
  }
  lex.expect_punct(";");
  return metric;
}

}  // namespace

SimilaritySpec parse_similarity_spec(std::string_view source, const std::vector<DomainModel>& models) {
  Lexer lex(source);
  SimilaritySpec spec;
  std::vector<SourcePos> import_pos;
  while (lex.is_keyword("import")) {
    lex.next();
    import_pos.push_back(lex.peek().pos);
    spec.imports.push_back(lex.expect_identifier("domain model name").text);
    lex.expect_punct(";");
  }
  if (spec.imports.empty()) lex.fail_here("similarity model must import at least one domain model");
  DomainScope scope = scope_for_imports(spec.imports, models, import_pos);

  lex.expect_keyword("similarity");
  spec.name = lex.expect_identifier("similarity name").text;
  lex.expect_punct("{");

  bool have_global = false;
  while (!lex.accept_punct("}")) {
    if (lex.accept_keyword("local")) {
      SourcePos at = lex.peek().pos;
      LocalMetric m = parse_local(lex, scope);
      if (spec.local_for(m.path.key())) throw ParseError(at, "duplicate local metric for '" + m.path.key() + "'");
      spec.locals.push_back(std::move(m));
      continue;
    }
    Token global_tok = lex.expect_keyword("global");
    if (have_global) lex.fail(global_tok, "only one global metric allowed");
    have_global = true;
    if (lex.accept_keyword("manual")) {
      spec.global.manual_plugin = lex.expect_identifier("plugin name").text;
      lex.expect_punct(";");
      continue;
    }
    lex.expect_keyword("weighted");
    lex.expect_punct("{");
    while (!lex.accept_punct("}")) {
      SourcePos at = lex.peek().pos;
      WeightedAttribute w;
      w.path = parse_attribute_path(lex);
      lex.expect_keyword("weight");
      SourcePos weight_at = lex.peek().pos;
      w.declared = lex.expect_number("weight");
      lex.expect_punct(";");
      if (!(w.declared > 0)) throw ParseError(weight_at, "weight for '" + w.path.key() + "' must be positive");
      if (!spec.local_for(w.path.key())) {
        throw ParseError(at, "weighted attribute '" + w.path.key() + "' has no local metric");
      }
      if (spec.weight_for(w.path.key())) throw ParseError(at, "duplicate weight for '" + w.path.key() + "'");
      spec.global.weights.push_back(std::move(w));
    }
    if (spec.global.weights.empty()) lex.fail(global_tok, "global weighted metric needs at least one weight");
  }
  if (!have_global) lex.fail_here("similarity model needs a global metric");
  if (!lex.at_end()) lex.fail_here("unexpected " + describe(lex.peek()) + " after similarity model");

  double total = 0;
  for (const auto& w : spec.global.weights) total += w.declared;
  for (auto& w : spec.global.weights) w.normalized = w.declared / total;
  return spec;
}

std::string print_similarity_spec(const SimilaritySpec& spec) {
  std::ostringstream out;
  for (const auto& imp : spec.imports) out << "import " << imp << ";\n";
  out << "\nsimilarity " << spec.name << " {\n";
  for (const auto& l : spec.locals) {
    out << "  local " << l.path.key() << ' ';
    switch (l.kind) {
      case LocalMetricKind::Absolute: out << "absolute"; break;
      case LocalMetricKind::Squared: out << "squared"; break;
      case LocalMetricKind::Manual: out << "manual " << l.plugin; break;
    }
    if (l.range_overridden && l.range) {
      out << " range [" << format_double(l.range->min) << ", " << format_double(l.range->max) << "]";
    }
    out << ";\n";
  }
  if (spec.global.manual_plugin) {
    out << "  global manual " << *spec.global.manual_plugin << ";\n";
  } else {
    out << "  global weighted {\n";
    for (const auto& w : spec.global.weights) {
      out << "    " << w.path.key() << " weight " << format_double(w.declared) << ";\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// reference extraction

namespace {

struct Bounds {
  std::optional<Value> equal;
  std::optional<double> lower;
  std::optional<double> upper;
};

void gather(const BoolExpr& e, std::map<PathKey, Bounds>& out) {
  if (e.kind == BoolExpr::Kind::And) {
    for (const auto& c : e.children) gather(c, out);
    return;
  }
  if (e.kind != BoolExpr::Kind::Compare) throw ExtractError("condition not reference-extractable");
  const auto& cmp = e.cmp;
  Bounds& b = out[cmp.path.key()];
  switch (cmp.op) {
    case CompareOp::Equal:
      if (!b.equal) b.equal = cmp.literal;
      break;
    case CompareOp::NotEqual: break;
    case CompareOp::Greater:
    case CompareOp::GreaterEq: {
      double v = as_double(cmp.literal);
      b.lower = b.lower ? std::max(*b.lower, v) : v;
      break;
    }
    case CompareOp::Less:
    case CompareOp::LessEq: {
      double v = as_double(cmp.literal);
      b.upper = b.upper ? std::min(*b.upper, v) : v;
      break;
    }
  }
}

}  // namespace

ReferencePoint extract_reference(const BoolExpr& condition) {
  std::map<PathKey, Bounds> bounds;
  gather(condition, bounds);
  ReferencePoint ref;
  for (const auto& [key, b] : bounds) {
    if (b.equal) {
      ref[key] = *b.equal;
    } else if (b.lower && b.upper) {
      ref[key] = (*b.lower + *b.upper) / 2.0;
    } else if (b.lower) {
      ref[key] = *b.lower;
    } else if (b.upper) {
      ref[key] = *b.upper;
    }
  }
  if (ref.empty()) throw ExtractError("condition not reference-extractable");
  return ref;
}

ReferencePoint extract_reference(const Case& c) { return extract_reference(c.condition); }

// ---------------------------------------------------------------------------
// scoring

const LocalPlugin* PluginRegistry::local(const std::string& name) const {
  auto it = locals_.find(name);
  return it == locals_.end() ? nullptr : &it->second;
}

const GlobalPlugin* PluginRegistry::global(const std::string& name) const {
  auto it = globals_.find(name);
  return it == globals_.end() ? nullptr : &it->second;
}

void register_builtin_plugins(PluginRegistry& registry) {
  // Deviation relative to the reference magnitude; pressures are judged by
  // how far they are off proportionally, not on the sensor's full scale.
  registry.add_local("relativePressure",
                     {[](const Value& current, const Value& reference, const LocalMetric&) {
                        const double r = as_double(reference);
                        return std::abs(as_double(current) - r) / std::max(std::abs(r), 1.0);
                      },
                      true});
}

double local_similarity(const LocalMetric& metric, double current, double reference) {
  if (!metric.range) throw MetricError("no normalization range for '" + metric.path.key() + "'");
  const double scaled = std::abs(current - reference) / metric.range->span();
  switch (metric.kind) {
    case LocalMetricKind::Absolute: return std::min(1.0, scaled);
    case LocalMetricKind::Squared: return std::min(1.0, scaled * scaled);
    case LocalMetricKind::Manual: break;
  }
  throw MetricError("manual metric for '" + metric.path.key() + "' needs a plugin");
}

Similarity::Similarity(SimilaritySpec spec, const PluginRegistry& plugins) : spec_(std::move(spec)) {
  for (const auto& l : spec_.locals) {
    if (l.kind != LocalMetricKind::Manual) continue;
    const LocalPlugin* p = plugins.local(l.plugin);
    if (!p) throw MetricError("no similarity plugin registered under '" + l.plugin + "' (for " + l.path.key() + ")");
    locals_[l.plugin] = *p;
    reentrant_ = reentrant_ && p->reentrant;
  }
  if (spec_.global.manual_plugin) {
    const GlobalPlugin* p = plugins.global(*spec_.global.manual_plugin);
    if (!p) throw MetricError("no global similarity plugin registered under '" + *spec_.global.manual_plugin + "'");
    global_plugin_ = *p;
    reentrant_ = reentrant_ && p->reentrant;
  }
}

double Similarity::local(const LocalMetric& metric, const Value& current, const Value& reference) const {
  if (metric.kind == LocalMetricKind::Manual) {
    double v = 0;
    try {
      v = locals_.at(metric.plugin).score(current, reference, metric);
    } catch (const std::exception& e) {
      throw MetricError("plugin '" + metric.plugin + "' failed: " + e.what());
    }
    if (std::isnan(v)) throw MetricError("plugin '" + metric.plugin + "' returned NaN");
    return std::clamp(v, 0.0, 1.0);
  }
  if (!is_numeric(current) || !is_numeric(reference)) {
    throw MetricError("non-numeric value for '" + metric.path.key() + "'");
  }
  return local_similarity(metric, as_double(current), as_double(reference));
}

double Similarity::combine(const std::map<PathKey, Value>& current, const ReferencePoint& reference,
                           bool require_current) const {
  if (global_plugin_) {
    double v = 0;
    try {
      v = global_plugin_->score(current, reference);
    } catch (const std::exception& e) {
      throw MetricError("global plugin failed: " + std::string(e.what()));
    }
    return std::isnan(v) ? 1.0 : std::clamp(v, 0.0, 1.0);
  }
  double weighted = 0;
  double weight_sum = 0;
  for (const auto& w : spec_.global.weights) {
    const PathKey key = w.path.key();
    auto ref_it = reference.find(key);
    if (ref_it == reference.end()) continue;
    auto cur_it = current.find(key);
    if (cur_it == current.end()) {
      if (require_current) throw MetricError("attribute '" + key + "' missing from situation");
      continue;
    }
    weighted += w.normalized * local(*spec_.local_for(key), cur_it->second, ref_it->second);
    weight_sum += w.normalized;
  }
  if (weight_sum <= 0) return 1.0;
  return std::clamp(weighted / weight_sum, 0.0, 1.0);
}

double Similarity::global(const Situation& situation, const ReferencePoint& reference) const {
  return combine(situation.values, reference, true);
}

double Similarity::between(const ReferencePoint& lhs, const ReferencePoint& rhs) const {
  return combine(lhs, rhs, false);
}

}  // namespace casetwin
