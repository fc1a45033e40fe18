// Copyright 2026 The treeshred Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "treeshred/optimizer.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace treeshred {

namespace {

bool is_negation_of(const Predicate& a, const Predicate& b) {
  return a.kind == Predicate::Kind::kNot && a.operands[0] == b;
}

// Clause sets of p (negated when `neg`), or nullopt past the cap.
std::optional<std::vector<Clause>> cnf(const Predicate& p, bool neg, std::size_t cap) {
  using K = Predicate::Kind;
  if (p.is_atom()) return std::vector<Clause>{{neg ? Predicate::negate(p) : p}};
  if (p.kind == K::kNot) return cnf(p.operands[0], !neg, cap);
  const bool conj = (p.kind == K::kAnd) != neg;
  if (conj) {
    std::vector<Clause> out;
    for (const auto& q : p.operands) {
      auto part = cnf(q, neg, cap);
      if (!part) return std::nullopt;
      out.insert(out.end(), part->begin(), part->end());
      if (out.size() > cap) return std::nullopt;
    }
    return out;
  }
  std::vector<Clause> acc{Clause{}};
  for (const auto& q : p.operands) {
    auto part = cnf(q, neg, cap);
    if (!part) return std::nullopt;
    if (acc.size() * part->size() > cap) return std::nullopt;
    std::vector<Clause> next;
    for (const auto& a : acc) {
      for (const auto& b : *part) {
        Clause c = a;
        c.insert(c.end(), b.begin(), b.end());
        next.push_back(std::move(c));
      }
    }
    acc = std::move(next);
  }
  return acc;
}

void collect_slots(const Predicate& p, std::set<std::uint32_t>& out) {
  if (p.kind == Predicate::Kind::kCmpConst) {
    out.insert(p.lhs_slot);
  } else if (p.kind == Predicate::Kind::kCmpNodes) {
    out.insert(p.lhs_slot);
    out.insert(p.rhs_slot);
  }
  for (const auto& q : p.operands) collect_slots(q, out);
}

Predicate clause_predicate(const Clause& c) {
  return c.size() == 1 ? c[0] : Predicate::any_of(c);
}

bool one_level_down(const ColumnStep& s) { return s.op != ColumnOp::kDescendants; }

// Splits a column so that the last `depth` steps each move exactly one level
// down; then parent^depth of a column node is a node of the prefix.
std::optional<std::pair<std::vector<ColumnStep>, std::vector<ColumnStep>>> peel(
    const std::vector<ColumnStep>& steps, std::size_t depth) {
  if (depth > steps.size()) return std::nullopt;
  const auto cut = steps.begin() + static_cast<std::ptrdiff_t>(steps.size() - depth);
  if (!std::all_of(cut, steps.end(), one_level_down)) return std::nullopt;
  return std::pair{std::vector<ColumnStep>(steps.begin(), cut),
                   std::vector<ColumnStep>(cut, steps.end())};
}

bool is_equi_join(const Predicate& p) {
  return p.kind == Predicate::Kind::kCmpNodes && p.op == CmpOp::kEq &&
         p.lhs_slot != p.rhs_slot;
}

struct Member {
  std::uint32_t slot;
  std::vector<ColumnStep> suffix;
};

struct Group {
  std::vector<ColumnStep> prefix;
  std::vector<std::vector<ColumnStep>> guards;
  std::vector<Member> members;

  const Member* find(std::uint32_t slot) const {
    for (const auto& m : members) {
      if (m.slot == slot) return &m;
    }
    return nullptr;
  }
};

struct Probe {
  std::uint32_t partner;
  NodeExtractor key;
  NodeExtractor probe;
};

}  // namespace

bool to_cnf(const Predicate& p, std::vector<Clause>& out, std::size_t max_clauses) {
  auto c = cnf(p, false, max_clauses);
  out.clear();
  if (!c) {
    out.push_back(Clause{p});
    return false;
  }
  std::set<std::string> seen;
  for (auto& clause : *c) {
    Clause lits;
    bool tautology = false;
    for (auto& l : clause) {
      if (std::find(lits.begin(), lits.end(), l) != lits.end()) continue;
      for (const auto& m : lits) {
        if (is_negation_of(l, m) || is_negation_of(m, l)) tautology = true;
      }
      lits.push_back(std::move(l));
    }
    if (tautology) continue;
    if (seen.insert(to_string(clause_predicate(lits))).second) out.push_back(std::move(lits));
  }
  return true;
}

Equivalence equiv_extractors(std::span<const ColumnStep> a, std::span<const ColumnStep> b,
                             std::span<const Hdt* const> trees) {
  // No rewrite law identifies distinct step sequences in general: every
  // operator filters by tag and children/pchildren/descendants never
  // collapse under composition. Normal form is the sequence itself.
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) return Equivalence::kStructural;
  if (trees.empty()) return Equivalence::kDifferent;
  for (const Hdt* t : trees) {
    if (apply_column_steps(a, {t->root()}, *t) != apply_column_steps(b, {t->root()}, *t)) {
      return Equivalence::kDifferent;
    }
  }
  return Equivalence::kObserved;
}

ExecutionPlan optimize(const Program& program, std::span<const Hdt* const> trees,
                       const OptimizeOptions& options) {
  ExecutionPlan plan;
  const std::size_t k = program.extractor.width();
  plan.width = k;
  std::vector<Clause> clauses;
  plan.cnf_capped = !to_cnf(program.predicate, clauses, options.max_clauses);
  std::vector<char> consumed(clauses.size(), 0);
  const auto& cols = program.extractor.columns;

  std::vector<Group> groups;
  std::vector<int> group_of(k, -1);
  if (options.fusion && !plan.cnf_capped) {
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      if (clauses[c].size() != 1 || !is_equi_join(clauses[c][0])) continue;
      const Predicate& atom = clauses[c][0];
      if (!atom.lhs.is_parent_chain() || !atom.rhs.is_parent_chain()) continue;
      const std::uint32_t i = atom.lhs_slot, j = atom.rhs_slot;
      auto pi = peel(cols[i].steps, atom.lhs.depth());
      auto pj = peel(cols[j].steps, atom.rhs.depth());
      if (!pi || !pj) continue;
      const int gi = group_of[i], gj = group_of[j];
      if (gi >= 0 && gi == gj) {
        // Both already hang off the same anchor: implied when the conjunct
        // climbs exactly to it from both sides.
        const Group& g = groups[gi];
        if (g.find(i)->suffix.size() == atom.lhs.depth() &&
            g.find(j)->suffix.size() == atom.rhs.depth()) {
          consumed[c] = 1;
          ++plan.fused_conjuncts;
        }
        continue;
      }
      if (gi >= 0 && gj >= 0) continue;
      if (gi < 0 && gj < 0) {
        Equivalence e = equiv_extractors(pi->first, pj->first, trees);
        if (e == Equivalence::kDifferent) continue;
        Group g{pi->first, {}, {{i, pi->second}, {j, pj->second}}};
        if (e == Equivalence::kObserved) g.guards.push_back(pj->first);
        group_of[i] = group_of[j] = static_cast<int>(groups.size());
        groups.push_back(std::move(g));
      } else {
        const bool i_in = gi >= 0;
        Group& g = groups[i_in ? gi : gj];
        const std::uint32_t in = i_in ? i : j, out = i_in ? j : i;
        const auto& pin = i_in ? *pi : *pj;
        const auto& pout = i_in ? *pj : *pi;
        if (g.find(in)->suffix.size() != pin.second.size()) continue;
        Equivalence e = equiv_extractors(g.prefix, pout.first, trees);
        if (e == Equivalence::kDifferent) continue;
        if (e == Equivalence::kObserved) g.guards.push_back(pout.first);
        g.members.push_back({out, pout.second});
        group_of[out] = group_of[in];
      }
      consumed[c] = 1;
      ++plan.fused_conjuncts;
    }
  }

  std::map<std::uint32_t, Probe> probes;
  if (options.probes && !plan.cnf_capped) {
    auto free_col = [&](std::uint32_t s) { return group_of[s] < 0 && !probes.count(s); };
    auto reaches = [&](std::uint32_t from, std::uint32_t target) {
      for (std::uint32_t s = from;;) {
        if (s == target) return true;
        auto it = probes.find(s);
        if (it == probes.end()) return false;
        s = it->second.partner;
      }
    };
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      if (consumed[c] || clauses[c].size() != 1 || !is_equi_join(clauses[c][0])) continue;
      const Predicate& atom = clauses[c][0];
      const std::uint32_t hi = std::max(atom.lhs_slot, atom.rhs_slot);
      const std::uint32_t lo = std::min(atom.lhs_slot, atom.rhs_slot);
      for (std::uint32_t p : {hi, lo}) {
        const std::uint32_t partner = p == hi ? lo : hi;
        if (!free_col(p) || reaches(partner, p)) continue;
        const bool p_left = atom.lhs_slot == p;
        probes[p] = Probe{partner, p_left ? atom.lhs : atom.rhs, p_left ? atom.rhs : atom.lhs};
        consumed[c] = 1;
        ++plan.probe_conjuncts;
        break;
      }
    }
  }

  std::vector<char> bound(k, 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    PlanLevel anchor;
    anchor.kind = PlanLevel::Kind::kAnchor;
    anchor.anchor = g;
    anchor.steps = groups[g].prefix;
    anchor.guards = groups[g].guards;
    plan.levels.push_back(std::move(anchor));
    auto members = groups[g].members;
    std::sort(members.begin(), members.end(),
              [](const Member& a, const Member& b) { return a.slot < b.slot; });
    for (auto& m : members) {
      PlanLevel lv;
      lv.kind = PlanLevel::Kind::kSuffix;
      lv.slot = m.slot;
      lv.anchor = g;
      lv.steps = std::move(m.suffix);
      plan.levels.push_back(std::move(lv));
      bound[m.slot] = 1;
    }
  }
  plan.anchors = groups.size();
  for (std::uint32_t s = 0; s < k; ++s) {
    if (group_of[s] >= 0 || probes.count(s)) continue;
    PlanLevel lv;
    lv.slot = s;
    lv.steps = cols[s].steps;
    plan.levels.push_back(std::move(lv));
    bound[s] = 1;
  }
  while (true) {
    bool progress = false;
    for (auto& [s, pr] : probes) {
      if (bound[s] || !bound[pr.partner]) continue;
      PlanLevel lv;
      lv.kind = PlanLevel::Kind::kProbe;
      lv.slot = s;
      lv.steps = cols[s].steps;
      lv.key = pr.key;
      lv.probe = pr.probe;
      lv.probe_slot = pr.partner;
      plan.levels.push_back(std::move(lv));
      bound[s] = 1;
      progress = true;
    }
    if (!progress) break;
  }

  // Residual clauses go to the first level after which their slots are bound.
  std::vector<std::size_t> level_of_slot(k, 0);
  std::optional<std::size_t> first_binding, last_binding;
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    if (plan.levels[l].kind == PlanLevel::Kind::kAnchor) continue;
    level_of_slot[plan.levels[l].slot] = l;
    if (!first_binding) first_binding = l;
    last_binding = l;
  }
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    if (consumed[c]) continue;
    std::set<std::uint32_t> slots;
    for (const auto& l : clauses[c]) collect_slots(l, slots);
    std::size_t at = *first_binding;
    for (std::uint32_t s : slots) at = std::max(at, level_of_slot[s]);
    if (!options.pushdown) at = *last_binding;
    plan.levels[at].filters.push_back(clause_predicate(clauses[c]));
  }
  return plan;
}

namespace {

std::string probe_key(const Hdt& tree, NodeId n) {
  if (tree.is_leaf(n)) return "L" + std::string(cell_value(tree, n));
  return "N" + std::to_string(n.value);
}

class Executor {
 public:
  Executor(const ExecutionPlan& plan, const Hdt& tree, const RowSink& sink)
      : plan_(plan), tree_(tree), sink_(sink), tuple_(plan.width),
        anchors_(plan.anchors), domains_(plan.levels.size()),
        indexes_(plan.levels.size()) {}

  ExecStats run() {
    for (std::size_t l = 0; l < plan_.levels.size(); ++l) {
      const PlanLevel& lv = plan_.levels[l];
      if (lv.kind == PlanLevel::Kind::kScan) {
        domains_[l] = apply_column_steps(lv.steps, {tree_.root()}, tree_);
        hold(domains_[l].size());
      } else if (lv.kind == PlanLevel::Kind::kProbe) {
        std::size_t entries = 0;
        for (NodeId n : apply_column_steps(lv.steps, {tree_.root()}, tree_)) {
          auto v = eval_node_extractor(lv.key, n, tree_);
          if (!v) continue;
          indexes_[l][probe_key(tree_, *v)].push_back(n);
          ++entries;
        }
        hold(entries);
      }
    }
    descend(0);
    return stats_;
  }

 private:
  void hold(std::size_t n) {
    held_ += n;
    stats_.peak_buffer = std::max(stats_.peak_buffer, held_);
  }
  void release(std::size_t n) { held_ -= n; }

  bool pass(const PlanLevel& lv) {
    for (const auto& f : lv.filters) {
      ++stats_.filter_checks;
      if (!eval_predicate(f, tuple_, tree_)) return false;
    }
    return true;
  }

  void bind(std::size_t l, NodeId n) {
    tuple_[plan_.levels[l].slot] = n;
    if (pass(plan_.levels[l])) descend(l + 1);
  }

  void descend(std::size_t l) {
    if (l == plan_.levels.size()) {
      ++stats_.rows;
      sink_(tuple_);
      return;
    }
    const PlanLevel& lv = plan_.levels[l];
    switch (lv.kind) {
      case PlanLevel::Kind::kScan:
        for (NodeId n : domains_[l]) bind(l, n);
        break;
      case PlanLevel::Kind::kAnchor: {
        std::vector<NodeId> dom = apply_column_steps(lv.steps, {tree_.root()}, tree_);
        for (const auto& g : lv.guards) {
          std::vector<NodeId> other = apply_column_steps(g, {tree_.root()}, tree_);
          std::vector<NodeId> both;
          std::set_intersection(dom.begin(), dom.end(), other.begin(), other.end(),
                                std::back_inserter(both));
          dom = std::move(both);
        }
        hold(dom.size());
        for (NodeId m : dom) {
          anchors_[lv.anchor] = m;
          descend(l + 1);
        }
        release(dom.size());
        break;
      }
      case PlanLevel::Kind::kSuffix: {
        std::vector<NodeId> dom = apply_column_steps(lv.steps, {anchors_[lv.anchor]}, tree_);
        hold(dom.size());
        for (NodeId n : dom) bind(l, n);
        release(dom.size());
        break;
      }
      case PlanLevel::Kind::kProbe: {
        auto v = eval_node_extractor(lv.probe, tuple_[lv.probe_slot], tree_);
        if (!v) break;
        auto it = indexes_[l].find(probe_key(tree_, *v));
        if (it == indexes_[l].end()) break;
        for (NodeId n : it->second) bind(l, n);
        break;
      }
    }
  }

  const ExecutionPlan& plan_;
  const Hdt& tree_;
  const RowSink& sink_;
  NodeRow tuple_;
  std::vector<NodeId> anchors_;
  std::vector<std::vector<NodeId>> domains_;
  std::vector<std::unordered_map<std::string, std::vector<NodeId>>> indexes_;
  std::size_t held_ = 0;
  ExecStats stats_;
};

}  // namespace

ExecStats execute_plan(const ExecutionPlan& plan, const Hdt& tree, const RowSink& sink) {
  if (plan.width == 0 || plan.levels.empty()) return {};
  return Executor(plan, tree, sink).run();
}

ValueTable run_plan(const ExecutionPlan& plan, const Hdt& tree, ExecStats* stats) {
  ValueTable out{plan.width, {}};
  ExecStats s = execute_plan(plan, tree, [&](std::span<const NodeId> row) {
    out.rows.push_back(project(row, tree));
  });
  if (stats) *stats = s;
  return out;
}

std::string ExecutionPlan::to_text() const {
  std::ostringstream os;
  auto steps = [](const std::vector<ColumnStep>& s) {
    return to_string(ColumnExtractor{s});
  };
  std::size_t indent = 0;
  for (const auto& lv : levels) {
    os << std::string(indent * 2, ' ');
    switch (lv.kind) {
      case PlanLevel::Kind::kScan:
        os << "for t" << lv.slot << " in " << steps(lv.steps);
        break;
      case PlanLevel::Kind::kAnchor:
        os << "for m" << lv.anchor << " in " << steps(lv.steps);
        for (const auto& g : lv.guards) os << " & " << steps(g);
        break;
      case PlanLevel::Kind::kSuffix:
        os << "for t" << lv.slot << " in " << steps(lv.steps) << " from m" << lv.anchor;
        break;
      case PlanLevel::Kind::kProbe:
        os << "for t" << lv.slot << " in " << steps(lv.steps) << " where "
           << to_string(lv.key) << " = " << to_string(lv.probe) << " of t" << lv.probe_slot;
        break;
    }
    os << "\n";
    for (const auto& f : lv.filters) {
      os << std::string(indent * 2 + 2, ' ') << "if " << to_string(f) << "\n";
    }
    ++indent;
  }
  return os.str();
}

}  // namespace treeshred
