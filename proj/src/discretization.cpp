#include "casetwin/discretization.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace casetwin {

const AttributeMapping* MachineMapping::find(const PathKey& key) const {
  for (const auto& a : attributes) {
    if (a.path.key() == key) return &a;
  }
  return nullptr;
}

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& msg) {
  throw ParseError({static_cast<int>(line), 1}, msg);
}

double number(const std::string& word, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(word, &used);
    if (used == word.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  fail_line(line, "expected a number, got '" + word + "'");
}

}  // namespace

MachineMapping parse_mapping(std::string_view source) {
  MachineMapping m;
  std::istringstream in{std::string(source)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    std::string kw;
    if (!(words >> kw)) continue;
    std::vector<std::string> args;
    for (std::string w; words >> w;) args.push_back(w);

    if (kw == "domain") {
      if (args.size() != 1) fail_line(line_no, "usage: domain <name>");
      m.domain = args[0];
    } else if (kw == "object") {
      if (args.size() != 2) fail_line(line_no, "usage: object <name> <type>");
      m.objects.push_back({args[0], args[1]});
    } else if (kw == "attribute") {
      if (args.size() != 4 && !(args.size() == 5 && args[4] == "write")) {
        fail_line(line_no, "usage: attribute <Class.attr> <predicate> <subject> <level-type> [write]");
      }
      AttributeMapping a;
      try {
        a.path = AttributePath::from_key(args[0]);
      } catch (const std::invalid_argument& e) {
        fail_line(line_no, e.what());
      }
      if (m.find(a.path.key())) fail_line(line_no, "attribute '" + args[0] + "' mapped twice");
      a.predicate = args[1];
      a.subject = args[2];
      a.level_type = args[3];
      a.writable = args.size() == 5;
      m.attributes.push_back(std::move(a));
    } else if (kw == "bin") {
      if (m.attributes.empty()) fail_line(line_no, "bin before any attribute");
      if (args.size() != 4) fail_line(line_no, "usage: bin <object> <lo> <hi> <representative>");
      Bin b{args[0], number(args[1], line_no), number(args[2], line_no), number(args[3], line_no)};
      if (!(b.lo < b.hi)) fail_line(line_no, "bin '" + b.object + "' needs lo < hi");
      if (b.representative < b.lo || b.representative > b.hi) {
        fail_line(line_no, "representative of bin '" + b.object + "' lies outside the bin");
      }
      auto& bins = m.attributes.back().bins;
      if (!bins.empty() && bins.back().hi != b.lo) fail_line(line_no, "bins must be contiguous and ascending");
      bins.push_back(std::move(b));
    } else if (kw == "fact") {
      std::string rest = raw.substr(raw.find("fact") + 4);
      pddl::Literal lit;
      try {
        lit = pddl::parse_literal_text(rest);
      } catch (const ParseError& e) {
        fail_line(line_no, std::string("bad fact: ") + e.message());
      }
      if (!lit.positive) fail_line(line_no, "facts must be positive atoms");
      m.facts.push_back(std::move(lit.atom));
    } else {
      fail_line(line_no, "unknown directive '" + kw + "'");
    }
  }
  if (m.domain.empty()) fail_line(1, "mapping names no domain");
  for (const auto& a : m.attributes) {
    if (a.bins.empty()) throw ParseError({1, 1}, "attribute '" + a.path.key() + "' has no bins");
  }
  return m;
}

pddl::PddlProblem mapping_problem(const MachineMapping& m, const pddl::PddlDomain& d) {
  pddl::PddlProblem p;
  p.name = "fallback";
  p.domain_ref = d.name;
  std::set<std::string> declared;
  for (const auto& c : d.constants) declared.insert(c.name);
  for (const auto& o : m.objects) {
    if (declared.insert(o.name).second) p.objects.push_back(o);
  }
  for (const auto& a : m.attributes) {
    for (const auto& b : a.bins) {
      if (declared.insert(b.object).second) p.objects.push_back({b.object, a.level_type});
    }
  }
  p.init = m.facts;
  return p;
}

void check_mapping(const MachineMapping& m, const pddl::PddlDomain& d, const DomainScope& scope) {
  if (m.domain != d.name) throw MappingError("mapping targets domain '" + m.domain + "', loaded '" + d.name + "'");
  for (const auto& o : m.objects) {
    if (!d.has_type(o.type)) throw MappingError("object '" + o.name + "' has undeclared type '" + o.type + "'");
  }
  pddl::PddlProblem p = mapping_problem(m, d);
  for (const auto& a : m.attributes) {
    AttributeInfo info;
    try {
      info = scope.resolve(a.path);
    } catch (const ResolutionError& e) {
      throw MappingError(std::string("mapping: ") + e.what());
    }
    if (!is_numeric(info.type)) throw MappingError("mapped attribute '" + a.path.key() + "' is not numeric");
    if (!d.has_type(a.level_type)) throw MappingError("undeclared level type '" + a.level_type + "'");
    for (const auto& b : a.bins) {
      auto t = pddl::object_type(d, p, b.object);
      if (!t || !d.is_subtype(*t, a.level_type)) {
        throw MappingError("bin object '" + b.object + "' is not of type '" + a.level_type + "'");
      }
      if (auto err = pddl::check_ground_literal(d, p, {{a.predicate, {a.subject, b.object}}, true})) {
        throw MappingError("attribute '" + a.path.key() + "': " + *err);
      }
    }
  }
  for (const auto& f : m.facts) {
    if (auto err = pddl::check_ground_literal(d, p, {f, true})) throw MappingError("fact " + f.str() + ": " + *err);
  }
}

Discretized discretize(const AttributeMapping& a, double value) {
  const auto& bins = a.bins;
  if (value < bins.front().lo) return {bins.front().object, true};
  if (value > bins.back().hi || std::isnan(value)) return {bins.back().object, true};
  for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
    if (value < bins[i].hi) return {bins[i].object, false};
  }
  return {bins.back().object, false};
}

std::optional<std::string> check_goal_directive(const PddlGoalDirective& g, const MachineMapping& m,
                                                const pddl::PddlDomain& d) {
  if (g.knowledge_base && *g.knowledge_base != d.name) {
    return "goal names knowledge base '" + *g.knowledge_base + "', loaded '" + d.name + "'";
  }
  pddl::PddlProblem p = mapping_problem(m, d);
  for (const auto& text : g.literals) {
    pddl::Literal lit;
    try {
      lit = pddl::parse_literal_text(text);
    } catch (const ParseError& e) {
      return "goal literal " + text + ": " + e.message();
    }
    if (auto err = pddl::check_ground_literal(d, p, lit)) return "goal literal " + text + ": " + *err;
  }
  return std::nullopt;
}

FallbackProblem goal_from_fallback(const PddlGoalDirective& g, const Situation& s, const MachineMapping& m,
                                   const pddl::PddlDomain& d) {
  if (auto err = check_goal_directive(g, m, d)) throw MappingError(*err);
  FallbackProblem out;
  out.problem = mapping_problem(m, d);
  for (const auto& a : m.attributes) {
    const Value* v = s.find(a.path.key());
    if (!v || !is_numeric(*v)) {
      throw MappingError("attribute '" + a.path.key() + "' not coverable: missing from the situation");
    }
    const double x = as_double(*v);
    Discretized level = discretize(a, x);
    if (level.clamped) {
      out.warnings.push_back(a.path.key() + "=" + format_double(x) + " outside all bins, clamped to '" + level.object +
                             "'");
      spdlog::warn("{}", out.warnings.back());
    }
    out.problem.init.push_back({a.predicate, {a.subject, level.object}});
  }
  for (const auto& text : g.literals) out.problem.goal.push_back(pddl::parse_literal_text(text));
  return out;
}

std::vector<PlannedAssignment> writes_from_plan(const std::vector<std::string>& steps, const pddl::PddlProblem& p,
                                                const MachineMapping& m, const pddl::PddlDomain& d,
                                                const DomainScope& scope) {
  std::map<std::string, pddl::GroundAction> by_name;
  for (auto& g : pddl::ground(d, p)) by_name.emplace(g.name, std::move(g));
  std::set<pddl::Atom> state(p.init.begin(), p.init.end());
  for (const auto& step : steps) {
    auto it = by_name.find(step);
    if (it == by_name.end()) throw MappingError("plan step " + step + " is not a ground action of the problem");
    for (const auto& a : it->second.del) state.erase(a);
    for (const auto& a : it->second.add) state.insert(a);
  }

  auto level_in = [](const std::set<pddl::Atom>& atoms, const AttributeMapping& a) -> std::optional<std::string> {
    for (const auto& atom : atoms) {
      if (atom.predicate == a.predicate && atom.args.size() == 2 && atom.args[0] == a.subject) return atom.args[1];
    }
    return std::nullopt;
  };

  const std::set<pddl::Atom> initial(p.init.begin(), p.init.end());
  std::vector<PlannedAssignment> writes;
  for (const auto& a : m.attributes) {
    if (!a.writable) continue;
    auto before = level_in(initial, a);
    auto after = level_in(state, a);
    if (!after || after == before) continue;
    const Bin* bin = nullptr;
    for (const auto& b : a.bins) {
      if (b.object == *after) bin = &b;
    }
    if (!bin) throw MappingError("plan leaves '" + a.path.key() + "' at unmapped level '" + *after + "'");
    Value v = bin->representative;
    if (scope.resolve(a.path).type == PrimitiveType::Int) v = static_cast<std::int64_t>(std::llround(bin->representative));
    writes.push_back({a.path, std::move(v)});
  }
  return writes;
}

}  // namespace casetwin
