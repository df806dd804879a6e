#include "casetwin/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace casetwin::pddl {

// ---------------------------------------------------------------------------
// s-expressions

std::string SExpr::str() const {
  if (!is_list) return atom;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ' ';
    out += items[i].str();
  }
  return out + ")";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  bool done() {
    skip();
    return off_ >= src_.size();
  }

  SExpr read() {
    skip();
    if (off_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
    SExpr e;
    e.pos = pos_;
    char c = src_[off_];
    if (c == ')') throw ParseError(pos_, "unbalanced ')'");
    if (c == '(') {
      advance();
      e.is_list = true;
      while (true) {
        skip();
        if (off_ >= src_.size()) throw ParseError(e.pos, "unclosed '('");
        if (src_[off_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    while (off_ < src_.size()) {
      c = src_[off_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      e.atom += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      advance();
    }
    return e;
  }

 private:
  void advance() {
    if (src_[off_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++off_;
  }

  void skip() {
    while (off_ < src_.size()) {
      char c = src_[off_];
      if (c == ';') {
        while (off_ < src_.size() && src_[off_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t off_ = 0;
  SourcePos pos_;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view source) {
  Reader r(source);
  std::vector<SExpr> out;
  while (!r.done()) out.push_back(r.read());
  return out;
}

SExpr parse_sexpr(std::string_view source) {
  auto all = parse_sexprs(source);
  if (all.size() != 1) throw ParseError({1, 1}, "expected exactly one s-expression, got " + std::to_string(all.size()));
  return all.front();
}

UnsupportedFeature::UnsupportedFeature(SourcePos pos, std::string feature)
    : ParseError(pos, "unsupported feature: " + feature), feature_(std::move(feature)) {}

// ---------------------------------------------------------------------------
// model

std::string Atom::str() const {
  std::string out = "(" + predicate;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

std::string Literal::str() const { return positive ? atom.str() : "(not " + atom.str() + ")"; }

const PredicateDef* PddlDomain::find_predicate(std::string_view n) const {
  for (const auto& p : predicates) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const ActionSchema* PddlDomain::find_action(std::string_view n) const {
  for (const auto& a : actions) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

bool PddlDomain::has_type(std::string_view t) const { return t == "object" || types.count(std::string(t)); }

bool PddlDomain::is_subtype(std::string_view t, std::string_view ancestor) const {
  std::string cur(t);
  for (std::size_t guard = 0; guard <= types.size() + 1; ++guard) {
    if (cur == ancestor) return true;
    if (cur == "object") return false;
    auto it = types.find(cur);
    if (it == types.end()) return false;
    cur = it->second;
  }
  return false;
}

namespace {

[[noreturn]] void fail(const SExpr& at, const std::string& msg) { throw ParseError(at.pos, msg); }

const std::map<std::string, std::string>& unsupported_keywords() {
  static const std::map<std::string, std::string> table{
      {":functions", "numeric fluents"},     {":durative-action", "durative actions"},
      {":derived", "derived predicates"},    {"or", "disjunctive conditions"},
      {"imply", "disjunctive conditions"},   {"forall", "quantified conditions"},
      {"exists", "quantified conditions"},   {"when", "conditional effects"},
      {"increase", "numeric fluents"},       {"decrease", "numeric fluents"},
      {"assign", "numeric fluents"},         {"scale-up", "numeric fluents"},
      {"scale-down", "numeric fluents"},     {"=", "equality"},
      {":metric", "plan metrics"},           {":constraints", "constraints"},
      {":fluents", "numeric fluents"},
      {":numeric-fluents", "numeric fluents"}, {":durative-actions", "durative actions"},
      {":adl", "ADL"},                       {":conditional-effects", "conditional effects"},
      {":disjunctive-preconditions", "disjunctive conditions"},
      {":existential-preconditions", "quantified conditions"},
      {":universal-preconditions", "quantified conditions"},
      {":quantified-preconditions", "quantified conditions"},
      {":derived-predicates", "derived predicates"},
      {":equality", "equality"},             {":timed-initial-literals", "timed literals"},
      {":preferences", "preferences"},       {":action-costs", "numeric fluents"}};
  return table;
}

void reject_unsupported(const SExpr& e) {
  if (e.is_list || e.atom.empty()) return;
  const auto& table = unsupported_keywords();
  auto it = table.find(e.atom);
  if (it != table.end()) throw UnsupportedFeature(e.pos, it->second);
}

const std::string& head(const SExpr& e) {
  static const std::string none;
  if (!e.is_list || e.items.empty() || e.items[0].is_list) return none;
  return e.items[0].atom;
}

bool is_variable(std::string_view s) { return !s.empty() && s[0] == '?'; }

// `a b - t c` -> [a:t, b:t, c:object]
std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t from, bool variables) {
  std::vector<TypedName> out;
  std::size_t untyped_start = 0;
  for (std::size_t i = from; i < items.size(); ++i) {
    const SExpr& it = items[i];
    if (it.is_list) {
      if (head(it) == "either") throw UnsupportedFeature(it.pos, "either types");
      fail(it, "unexpected list in typed list");
    }
    if (it.atom == "-") {
      if (i + 1 >= items.size() || items[i + 1].is_list) fail(it, "expected type name after '-'");
      const std::string& type = items[i + 1].atom;
      for (std::size_t k = untyped_start; k < out.size(); ++k) out[k].type = type;
      untyped_start = out.size();
      ++i;
      continue;
    }
    if (variables != is_variable(it.atom)) {
      fail(it, variables ? "expected variable '?name', got '" + it.atom + "'" : "unexpected variable '" + it.atom + "'");
    }
    out.push_back({it.atom, "object"});
  }
  return out;
}

struct Scope {
  const PddlDomain& domain;
  const std::vector<TypedName>* params = nullptr;   // action parameters
  const std::vector<TypedName>* objects = nullptr;  // problem objects

  std::optional<std::string> type_of(const std::string& term) const {
    auto find_in = [&](const std::vector<TypedName>* list) -> std::optional<std::string> {
      if (!list) return std::nullopt;
      for (const auto& t : *list) {
        if (t.name == term) return t.type;
      }
      return std::nullopt;
    };
    if (is_variable(term)) return find_in(params);
    if (auto t = find_in(&domain.constants)) return t;
    return find_in(objects);
  }
};

Atom parse_atom(const SExpr& e, const Scope& scope) {
  if (!e.is_list || e.items.empty() || e.items[0].is_list) fail(e, "expected atom '(predicate args...)'");
  reject_unsupported(e.items[0]);
  Atom a;
  a.predicate = e.items[0].atom;
  const PredicateDef* def = scope.domain.find_predicate(a.predicate);
  if (!def) fail(e, "undeclared predicate '" + a.predicate + "'");
  if (def->params.size() + 1 != e.items.size()) {
    fail(e, "predicate '" + a.predicate + "' expects " + std::to_string(def->params.size()) + " arguments");
  }
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const SExpr& arg = e.items[i];
    if (arg.is_list) fail(arg, "nested term in atom");
    auto t = scope.type_of(arg.atom);
    if (!t) fail(arg, (is_variable(arg.atom) ? "unbound variable '" : "unknown object '") + arg.atom + "'");
    const std::string& want = def->params[i - 1].type;
    if (!scope.domain.is_subtype(*t, want)) {
      fail(arg, "'" + arg.atom + "' of type '" + *t + "' does not fit parameter of type '" + want + "' of '" +
                    a.predicate + "'");
    }
    a.args.push_back(arg.atom);
  }
  return a;
}

Literal parse_literal(const SExpr& e, const Scope& scope) {
  if (head(e) == "not") {
    if (e.items.size() != 2) fail(e, "'not' takes one atom");
    return {parse_atom(e.items[1], scope), false};
  }
  return {parse_atom(e, scope), true};
}

std::vector<Literal> parse_conjunction(const SExpr& e, const Scope& scope) {
  if (!e.is_list) fail(e, "expected a condition");
  if (e.items.empty()) return {};
  reject_unsupported(e.items[0]);
  if (head(e) == "and") {
    std::vector<Literal> out;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      if (head(e.items[i]) == "and") {
        auto inner = parse_conjunction(e.items[i], scope);
        out.insert(out.end(), inner.begin(), inner.end());
        continue;
      }
      if (e.items[i].is_list && !e.items[i].items.empty()) reject_unsupported(e.items[i].items[0]);
      out.push_back(parse_literal(e.items[i], scope));
    }
    return out;
  }
  return {parse_literal(e, scope)};
}

void check_types_declared(const PddlDomain& d, const std::vector<TypedName>& list, const SExpr& at) {
  for (const auto& t : list) {
    if (!d.has_type(t.type)) fail(at, "undeclared type '" + t.type + "'");
  }
}

ActionSchema parse_action(const SExpr& e, const PddlDomain& d) {
  if (e.items.size() < 2 || e.items[1].is_list) fail(e, "action needs a name");
  ActionSchema a;
  a.name = e.items[1].atom;
  std::optional<SExpr> pre, eff;
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const SExpr& key = e.items[i];
    if (key.is_list || i + 1 >= e.items.size()) fail(key, "expected ':keyword value' pair in action '" + a.name + "'");
    const SExpr& val = e.items[i + 1];
    if (key.atom == ":parameters") {
      if (!val.is_list) fail(val, "parameters must be a list");
      a.params = parse_typed_list(val.items, 0, true);
      check_types_declared(d, a.params, val);
    } else if (key.atom == ":precondition") {
      pre = val;
    } else if (key.atom == ":effect") {
      eff = val;
    } else {
      reject_unsupported(key);
      fail(key, "unknown action field '" + key.atom + "'");
    }
  }
  Scope scope{d, &a.params, nullptr};
  if (pre) a.precondition = parse_conjunction(*pre, scope);
  if (eff) {
    for (auto& lit : parse_conjunction(*eff, scope)) (lit.positive ? a.add : a.del).push_back(std::move(lit.atom));
  }
  return a;
}

std::string expect_name_form(const SExpr& e, std::string_view kw) {
  if (head(e) != kw || e.items.size() != 2 || e.items[1].is_list) fail(e, "expected (" + std::string(kw) + " <name>)");
  return e.items[1].atom;
}

}  // namespace

PddlDomain parse_pddl_domain(std::string_view source) {
  SExpr root = parse_sexpr(source);
  if (head(root) != "define" || root.items.size() < 2) fail(root, "expected (define (domain <name>) ...)");
  PddlDomain d;
  d.name = expect_name_form(root.items[1], "domain");

  std::vector<const SExpr*> actions;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& sec = root.items[i];
    const std::string& kw = head(sec);
    if (kw.empty()) fail(sec, "expected a domain section");
    reject_unsupported(sec.items[0]);
    if (kw == ":requirements") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        reject_unsupported(sec.items[k]);
        d.requirements.push_back(sec.items[k].atom);
      }
    } else if (kw == ":types") {
      for (const auto& t : parse_typed_list(sec.items, 1, false)) {
        if (t.name == "object") continue;
        d.types[t.name] = t.type;
        if (t.type != "object" && !d.types.count(t.type)) d.types[t.type] = "object";
      }
    } else if (kw == ":constants") {
      d.constants = parse_typed_list(sec.items, 1, false);
      check_types_declared(d, d.constants, sec);
    } else if (kw == ":predicates") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const SExpr& p = sec.items[k];
        if (!p.is_list || p.items.empty() || p.items[0].is_list) fail(p, "expected predicate declaration");
        PredicateDef def{p.items[0].atom, parse_typed_list(p.items, 1, true)};
        check_types_declared(d, def.params, p);
        if (d.find_predicate(def.name)) fail(p, "duplicate predicate '" + def.name + "'");
        d.predicates.push_back(std::move(def));
      }
    } else if (kw == ":action") {
      actions.push_back(&sec);
    } else {
      fail(sec, "unknown domain section '" + kw + "'");
    }
  }
  for (const SExpr* a : actions) {
    ActionSchema schema = parse_action(*a, d);
    if (d.find_action(schema.name)) fail(*a, "duplicate action '" + schema.name + "'");
    d.actions.push_back(std::move(schema));
  }
  return d;
}

PddlProblem parse_pddl_problem(std::string_view source, const PddlDomain& d) {
  SExpr root = parse_sexpr(source);
  if (head(root) != "define" || root.items.size() < 2) fail(root, "expected (define (problem <name>) ...)");
  PddlProblem p;
  p.name = expect_name_form(root.items[1], "problem");
  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& sec = root.items[i];
    const std::string& kw = head(sec);
    if (kw.empty()) fail(sec, "expected a problem section");
    reject_unsupported(sec.items[0]);
    if (kw == ":domain") {
      p.domain_ref = expect_name_form(sec, ":domain");
      if (p.domain_ref != d.name) fail(sec, "problem targets domain '" + p.domain_ref + "', loaded '" + d.name + "'");
    } else if (kw == ":objects") {
      p.objects = parse_typed_list(sec.items, 1, false);
      check_types_declared(d, p.objects, sec);
    } else if (kw == ":init") {
      init = &sec;
    } else if (kw == ":goal") {
      if (sec.items.size() != 2) fail(sec, "goal takes one condition");
      goal = &sec.items[1];
    } else {
      fail(sec, "unknown problem section '" + kw + "'");
    }
  }
  Scope scope{d, nullptr, &p.objects};
  if (init) {
    for (std::size_t k = 1; k < init->items.size(); ++k) {
      if (head(init->items[k]) == "not") fail(init->items[k], "negative literal in init");
      p.init.push_back(parse_atom(init->items[k], scope));
    }
  }
  if (!goal) fail(root, "problem has no :goal");
  p.goal = parse_conjunction(*goal, scope);
  return p;
}

std::optional<std::string> object_type(const PddlDomain& d, const PddlProblem& p, std::string_view name) {
  for (const auto& c : d.constants) {
    if (c.name == name) return c.type;
  }
  for (const auto& o : p.objects) {
    if (o.name == name) return o.type;
  }
  return std::nullopt;
}

std::optional<std::string> check_ground_literal(const PddlDomain& d, const PddlProblem& p, const Literal& lit) {
  const PredicateDef* def = d.find_predicate(lit.atom.predicate);
  if (!def) return "undeclared predicate '" + lit.atom.predicate + "'";
  if (def->params.size() != lit.atom.args.size()) {
    return "predicate '" + def->name + "' expects " + std::to_string(def->params.size()) + " arguments";
  }
  for (std::size_t i = 0; i < def->params.size(); ++i) {
    auto t = object_type(d, p, lit.atom.args[i]);
    if (!t) return "unknown object '" + lit.atom.args[i] + "'";
    if (!d.is_subtype(*t, def->params[i].type)) {
      return "'" + lit.atom.args[i] + "' does not fit parameter of type '" + def->params[i].type + "'";
    }
  }
  return std::nullopt;
}

Literal parse_literal_text(std::string_view text) {
  SExpr e = parse_sexpr(text);
  bool positive = true;
  if (head(e) == "not") {
    if (e.items.size() != 2) fail(e, "'not' takes one atom");
    e = e.items[1];
    positive = false;
  }
  if (!e.is_list || e.items.empty()) fail(e, "expected a ground atom");
  Literal lit;
  lit.positive = positive;
  for (const auto& item : e.items) {
    if (item.is_list) fail(item, "nested term in ground atom");
  }
  lit.atom.predicate = e.items[0].atom;
  for (std::size_t i = 1; i < e.items.size(); ++i) lit.atom.args.push_back(e.items[i].atom);
  return lit;
}

// ---------------------------------------------------------------------------
// grounding

namespace {

Atom substitute(const Atom& a, const std::map<std::string, std::string>& binding) {
  Atom out{a.predicate, {}};
  for (const auto& arg : a.args) {
    auto it = binding.find(arg);
    out.args.push_back(it == binding.end() ? arg : it->second);
  }
  return out;
}

}  // namespace

std::vector<GroundAction> ground(const PddlDomain& d, const PddlProblem& p) {
  std::vector<TypedName> universe = d.constants;
  universe.insert(universe.end(), p.objects.begin(), p.objects.end());
  for (const auto& o : universe) {
    if (!d.has_type(o.type)) throw GroundingError("object '" + o.name + "' has undeclared type '" + o.type + "'");
  }

  std::vector<GroundAction> out;
  std::set<std::string> seen;
  for (const auto& schema : d.actions) {
    std::vector<std::vector<std::string>> domains;
    for (const auto& param : schema.params) {
      std::vector<std::string> fits;
      std::set<std::string> uniq;
      for (const auto& o : universe) {
        if (d.is_subtype(o.type, param.type) && uniq.insert(o.name).second) fits.push_back(o.name);
      }
      domains.push_back(std::move(fits));
    }
    std::vector<std::size_t> idx(schema.params.size(), 0);
    if (std::any_of(domains.begin(), domains.end(), [](const auto& v) { return v.empty(); })) continue;
    for (bool more = true; more;) {
      std::map<std::string, std::string> binding;
      std::string name = "(" + schema.name;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        binding[schema.params[i].name] = domains[i][idx[i]];
        name += " " + domains[i][idx[i]];
      }
      name += ")";
      if (seen.insert(name).second) {
        GroundAction g;
        g.name = std::move(name);
        for (const auto& lit : schema.precondition) {
          (lit.positive ? g.pre_pos : g.pre_neg).push_back(substitute(lit.atom, binding));
        }
        for (const auto& a : schema.add) g.add.push_back(substitute(a, binding));
        for (const auto& a : schema.del) g.del.push_back(substitute(a, binding));
        out.push_back(std::move(g));
      }
      more = false;
      for (std::size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < domains[k].size()) {
          more = true;
          break;
        }
        idx[k] = 0;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// validation

Validation validate_plan(const PddlDomain& d, const PddlProblem& p, const std::vector<std::string>& steps) {
  std::set<std::string> state;
  for (const auto& a : p.init) state.insert(a.str());

  for (std::size_t i = 0; i < steps.size(); ++i) {
    Validation bad{false, i, {}};
    SExpr e;
    try {
      e = parse_sexpr(steps[i]);
    } catch (const ParseError& err) {
      bad.message = "step " + std::to_string(i + 1) + " unreadable: " + err.what();
      return bad;
    }
    if (!e.is_list || e.items.empty() || e.items[0].is_list) {
      bad.message = "step " + std::to_string(i + 1) + " is not an action application";
      return bad;
    }
    const ActionSchema* schema = d.find_action(e.items[0].atom);
    if (!schema || schema->params.size() + 1 != e.items.size()) {
      bad.message = "step " + std::to_string(i + 1) + " names an unknown action or wrong arity: " + steps[i];
      return bad;
    }
    std::map<std::string, std::string> binding;
    for (std::size_t k = 0; k < schema->params.size(); ++k) {
      const std::string& obj = e.items[k + 1].atom;
      auto t = object_type(d, p, obj);
      if (!t || !d.is_subtype(*t, schema->params[k].type)) {
        bad.message = "step " + std::to_string(i + 1) + ": '" + obj + "' does not fit '" + schema->params[k].type + "'";
        return bad;
      }
      binding[schema->params[k].name] = obj;
    }
    for (const auto& lit : schema->precondition) {
      const std::string atom = substitute(lit.atom, binding).str();
      if (state.count(atom) != static_cast<std::size_t>(lit.positive)) {
        bad.message = "step " + std::to_string(i + 1) + " " + steps[i] + ": precondition " +
                      (lit.positive ? atom : "(not " + atom + ")") + " does not hold";
        return bad;
      }
    }
    for (const auto& a : schema->del) state.erase(substitute(a, binding).str());
    for (const auto& a : schema->add) state.insert(substitute(a, binding).str());
  }
  for (const auto& g : p.goal) {
    if (state.count(g.atom.str()) != static_cast<std::size_t>(g.positive)) {
      return {false, std::nullopt, "goal " + g.str() + " not reached"};
    }
  }
  return {true, std::nullopt, "valid"};
}

}  // namespace casetwin::pddl
