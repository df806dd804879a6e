#include "casetwin/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <unordered_set>

namespace casetwin::pddl {

namespace {

using Bits = std::vector<std::uint64_t>;

struct Fact {
  std::size_t id;
  bool positive;
};

struct Op {
  std::string name;
  std::vector<std::size_t> pre_pos, pre_neg, add, del;
};

class Index {
 public:
  std::size_t id(const Atom& a) {
    auto [it, fresh] = ids_.emplace(a.str(), ids_.size());
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::map<std::string, std::size_t> ids_;
};

bool test(const Bits& s, std::size_t i) { return (s[i / 64] >> (i % 64)) & 1u; }
void set(Bits& s, std::size_t i) { s[i / 64] |= std::uint64_t{1} << (i % 64); }
void clear(Bits& s, std::size_t i) { s[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

std::string key_of(const Bits& s) {
  return std::string(reinterpret_cast<const char*>(s.data()), s.size() * sizeof(std::uint64_t));
}

struct Node {
  Bits state;
  std::size_t parent;
  std::size_t op;
  std::size_t depth;
};

}  // namespace

PlanResult plan(const PddlDomain& d, const PddlProblem& p, const PlanLimits& limits) {
  Index index;
  std::vector<Op> ops;
  for (const auto& g : ground(d, p)) {
    Op op{g.name, {}, {}, {}, {}};
    for (const auto& a : g.pre_pos) op.pre_pos.push_back(index.id(a));
    for (const auto& a : g.pre_neg) op.pre_neg.push_back(index.id(a));
    for (const auto& a : g.add) op.add.push_back(index.id(a));
    for (const auto& a : g.del) op.del.push_back(index.id(a));
    ops.push_back(std::move(op));
  }
  std::vector<Fact> goal;
  for (const auto& lit : p.goal) goal.push_back({index.id(lit.atom), lit.positive});
  std::vector<std::size_t> init_ids;
  for (const auto& a : p.init) init_ids.push_back(index.id(a));

  SearchStats stats;
  stats.ground_actions = ops.size();
  const std::size_t words = (index.size() + 63) / 64 + 1;
  Bits init(words, 0);
  for (auto id : init_ids) set(init, id);

  auto h = [&](const Bits& s) {
    std::size_t unmet = 0;
    for (const auto& f : goal) unmet += test(s, f.id) != f.positive;
    return unmet;
  };

  std::vector<Node> nodes;
  std::unordered_set<std::string> seen;
  using Entry = std::pair<std::size_t, std::size_t>;  // (h, node index); index order gives FIFO ties
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  nodes.push_back({init, SIZE_MAX, SIZE_MAX, 0});
  seen.insert(key_of(init));
  open.push({h(init), 0});
  bool pruned_by_length = false;

  while (!open.empty()) {
    const auto [hv, idx] = open.top();
    open.pop();
    if (hv == 0) {
      Plan out;
      for (std::size_t n = idx; nodes[n].parent != SIZE_MAX; n = nodes[n].parent) out.steps.push_back(ops[nodes[n].op].name);
      std::reverse(out.steps.begin(), out.steps.end());
      stats.distinct_states = seen.size();
      out.stats = stats;
      return out;
    }
    if (stats.expansions >= limits.max_expansions) {
      stats.distinct_states = seen.size();
      return LimitExceeded{"max-expansions", stats};
    }
    ++stats.expansions;
    if (nodes[idx].depth >= limits.max_plan_length) {
      pruned_by_length = true;
      continue;
    }
    for (std::size_t o = 0; o < ops.size(); ++o) {
      const Op& op = ops[o];
      const Bits& s = nodes[idx].state;
      bool ok = true;
      for (auto f : op.pre_pos) ok = ok && test(s, f);
      for (auto f : op.pre_neg) ok = ok && !test(s, f);
      if (!ok) continue;
      Bits next = s;
      for (auto f : op.del) clear(next, f);
      for (auto f : op.add) set(next, f);
      ++stats.generated;
      if (!seen.insert(key_of(next)).second) continue;
      const std::size_t hn = h(next);
      const std::size_t depth = nodes[idx].depth + 1;
      nodes.push_back({std::move(next), idx, o, depth});
      open.push({hn, nodes.size() - 1});
    }
  }
  stats.distinct_states = seen.size();
  if (pruned_by_length) return LimitExceeded{"max-plan-length", stats};
  return Unsolvable{stats};
}

std::string describe(const PlanResult& result) {
  auto stats_text = [](const SearchStats& s) {
    return "ground actions " + std::to_string(s.ground_actions) + ", expansions " + std::to_string(s.expansions) +
           ", generated " + std::to_string(s.generated) + ", states " + std::to_string(s.distinct_states);
  };
  if (const auto* p = std::get_if<Plan>(&result)) {
    return "plan of " + std::to_string(p->steps.size()) + " steps (" + stats_text(p->stats) + ")";
  }
  if (const auto* u = std::get_if<Unsolvable>(&result)) return "unsolvable (" + stats_text(u->stats) + ")";
  const auto& l = std::get<LimitExceeded>(result);
  return "limit exceeded: " + l.limit + " (" + stats_text(l.stats) + ")";
}

}  // namespace casetwin::pddl
