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

#include "treeshred/predicate_learner.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace treeshred {
namespace {

struct RowHash {
  std::size_t operator()(const std::vector<std::int32_t>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct SigHash {
  std::size_t operator()(const std::vector<NodeId>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto x : v) {
      h ^= x.value;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr std::int32_t kInternal = -1;

// Shared state of one learning run: evaluated columns, interned values and
// labeled tuples stored as column indices.
class Context {
 public:
  struct Tuple {
    std::uint32_t example;
    std::vector<std::uint32_t> idx;
  };

  Context(std::span<const Example> examples, const TableExtractor& psi)
      : ex_(examples), psi_(psi), k_(psi.width()) {
    for (const auto& e : ex_) {
      if (e.table.width != k_) {
        throw std::invalid_argument("example table has " + std::to_string(e.table.width) +
                                    " columns, extractor has " + std::to_string(k_));
      }
      cols_.push_back(eval_columns(psi, *e.tree));
    }
  }

  std::size_t width() const { return k_; }
  std::size_t num_examples() const { return ex_.size(); }
  const Hdt& tree(std::size_t e) const { return *ex_[e].tree; }
  const std::vector<NodeId>& column(std::size_t e, std::size_t i) const { return cols_[e][i]; }

  std::int32_t intern(std::string_view v) {
    auto it = ids_.find(std::string(v));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(values_.size());
    values_.emplace_back(v);
    nums_.push_back(parse_decimal(v));
    ids_.emplace(std::string(v), id);
    return id;
  }
  std::int32_t find(std::string_view v) const {
    auto it = ids_.find(std::string(v));
    return it == ids_.end() ? -2 : it->second;
  }
  const std::string& value(std::int32_t id) const { return values_[id]; }
  const std::optional<double>& number(std::int32_t id) const { return nums_[id]; }

  std::int32_t leaf_value(std::size_t e, NodeId n) {
    const Hdt& t = tree(e);
    return t.is_leaf(n) ? intern(cell_value(t, n)) : kInternal;
  }

  // Returns false with `failure` set when the labels cannot be formed.
  bool label(std::size_t max_tuples) {
    for (std::size_t e = 0; e < ex_.size(); ++e) {
      std::size_t total = 1;
      for (std::size_t i = 0; i < k_; ++i) {
        total *= cols_[e][i].size();
        if (total > max_tuples) {
          failure = "intermediate table of example " + std::to_string(e + 1) +
                    " exceeds " + std::to_string(max_tuples) + " tuples";
          return false;
        }
      }
      tuples_ += total;
      if (tuples_ > max_tuples) {
        failure = "intermediate tables exceed " + std::to_string(max_tuples) + " tuples";
        return false;
      }
      std::vector<std::vector<std::int32_t>> cell(k_);
      for (std::size_t i = 0; i < k_; ++i) {
        for (NodeId n : cols_[e][i]) cell[i].push_back(intern(cell_value(tree(e), n)));
      }
      std::unordered_map<std::vector<std::int32_t>, std::size_t, RowHash> want;
      for (const auto& row : ex_[e].table.rows) {
        std::vector<std::int32_t> key;
        for (const auto& v : row) key.push_back(intern(v));
        ++want[key];
      }
      if (total > 0) {
        std::vector<std::uint32_t> idx(k_, 0);
        std::vector<std::int32_t> key(k_);
        for (;;) {
          for (std::size_t i = 0; i < k_; ++i) key[i] = cell[i][idx[i]];
          auto it = want.find(key);
          if (it != want.end() && it->second > 0) {
            --it->second;
            pos.push_back({static_cast<std::uint32_t>(e), idx});
          } else {
            neg.push_back({static_cast<std::uint32_t>(e), idx});
          }
          std::size_t i = k_;
          bool done = true;
          while (i > 0) {
            --i;
            if (++idx[i] < cols_[e][i].size()) {
              done = false;
              break;
            }
            idx[i] = 0;
          }
          if (done) break;
        }
      }
      for (const auto& row : ex_[e].table.rows) {
        std::vector<std::int32_t> key;
        for (const auto& v : row) key.push_back(intern(v));
        if (want[key] > 0) {
          std::string text;
          for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + row[i];
          failure = "example " + std::to_string(e + 1) + ": no tuple produces row (" + text + ")";
          return false;
        }
      }
    }
    return true;
  }

  LabeledTuple to_nodes(const Tuple& t) const {
    LabeledTuple out{t.example, {}};
    for (std::size_t i = 0; i < k_; ++i) out.nodes.push_back(cols_[t.example][i][t.idx[i]]);
    return out;
  }

  std::vector<Tuple> pos;
  std::vector<Tuple> neg;
  std::string failure;

 private:
  std::span<const Example> ex_;
  const TableExtractor& psi_;
  std::size_t k_;
  std::vector<std::vector<std::vector<NodeId>>> cols_;
  std::vector<std::string> values_;
  std::vector<std::optional<double>> nums_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::size_t tuples_ = 0;
};

// Node extractor closure for one column, deduplicated by behaviour on the
// column's nodes (extractors agreeing on all of them stay in agreement under
// any further step).
std::vector<NodeExtractor> build_chi(const Context& ctx, std::size_t i,
                                     std::size_t max_depth, std::size_t cap) {
  struct Item {
    NodeExtractor phi;
    std::vector<NodeId> res;  // aligned with the concatenated column nodes
  };
  std::vector<std::uint32_t> owner;  // example of each position
  Item self;
  for (std::size_t e = 0; e < ctx.num_examples(); ++e) {
    for (NodeId n : ctx.column(e, i)) {
      self.res.push_back(n);
      owner.push_back(static_cast<std::uint32_t>(e));
    }
  }
  std::vector<NodeExtractor> chi{NodeExtractor{}};
  if (self.res.empty()) return chi;
  std::unordered_set<std::vector<NodeId>, SigHash> seen{self.res};
  std::vector<Item> frontier{std::move(self)};
  for (std::size_t depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
    std::vector<Item> next;
    auto offer = [&](Item item) {
      if (chi.size() >= cap) return;
      if (!seen.insert(item.res).second) return;
      chi.push_back(item.phi);
      next.push_back(std::move(item));
    };
    for (const Item& cur : frontier) {
      {
        Item up{cur.phi, {}};
        up.phi.steps.push_back(NodeStep::parent());
        bool total = true;
        for (std::size_t p = 0; p < cur.res.size() && total; ++p) {
          auto q = ctx.tree(owner[p]).parent(cur.res[p]);
          if (!q) total = false;
          else up.res.push_back(*q);
        }
        if (total) offer(std::move(up));
      }
      // (tag, pos) pairs present under every current node.
      const Hdt& t0 = ctx.tree(owner[0]);
      std::vector<std::pair<std::string, std::uint32_t>> steps;
      for (NodeId c : t0.children(cur.res[0])) steps.emplace_back(t0.tag(c), t0.pos(c));
      std::sort(steps.begin(), steps.end());
      for (const auto& [tag, pos] : steps) {
        Item down{cur.phi, {}};
        down.phi.steps.push_back(NodeStep::child(tag, pos));
        bool total = true;
        for (std::size_t p = 0; p < cur.res.size() && total; ++p) {
          auto q = ctx.tree(owner[p]).child(cur.res[p], tag, pos);
          if (!q) total = false;
          else down.res.push_back(*q);
        }
        if (total) offer(std::move(down));
      }
    }
    frontier = std::move(next);
  }
  return chi;
}

// Atom with everything needed for fast evaluation over labeled tuples.
struct AtomSpec {
  Predicate::Kind kind;
  std::uint32_t i, x;  // column and chi index of the left side
  CmpOp op;
  std::int32_t constant;
  std::uint32_t j, y;  // right side of node comparisons
};

struct Resolved {
  std::uint32_t node;
  std::int32_t value;  // kInternal for internal nodes
};

class Universe {
 public:
  Universe(Context& ctx, std::size_t max_depth) : ctx_(ctx) {
    const std::size_t k = ctx.width();
    chi.resize(k);
    res_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      chi[i] = build_chi(ctx, i, max_depth, 4096);
      res_[i].resize(chi[i].size());
      for (std::size_t x = 0; x < chi[i].size(); ++x) {
        res_[i][x].resize(ctx.num_examples());
        for (std::size_t e = 0; e < ctx.num_examples(); ++e) {
          for (NodeId n : ctx.column(e, i)) {
            auto r = eval_node_extractor(chi[i][x], n, ctx.tree(e));
            res_[i][x][e].push_back({r->value, ctx.leaf_value(e, *r)});
          }
        }
      }
    }
    // Constants: every leaf value of every example tree.
    std::vector<std::int32_t> constants;
    {
      std::set<std::string> seen;
      for (std::size_t e = 0; e < ctx.num_examples(); ++e) {
        const Hdt& t = ctx.tree(e);
        for (std::uint32_t n = 0; n < t.size(); ++n) {
          if (t.is_leaf(NodeId{n})) seen.insert(std::string(cell_value(t, NodeId{n})));
        }
      }
      for (const auto& v : seen) constants.push_back(ctx.intern(v));
    }
    for (std::uint32_t i = 0; i < k; ++i) {
      for (std::uint32_t x = 0; x < chi[i].size(); ++x) {
        const Kinds kx = kinds(i, x);
        if (!kx.leaf) continue;
        for (auto c : constants) {
          for (CmpOp op : kAllCmpOps) {
            const bool order = op != CmpOp::kEq && op != CmpOp::kNe;
            if (order && (!ctx.number(c) || !kx.numeric)) continue;
            specs.push_back({Predicate::Kind::kCmpConst, i, x, op, c, 0, 0});
          }
        }
      }
    }
    for (std::uint32_t i = 0; i < k; ++i) {
      for (std::uint32_t j = i; j < k; ++j) {
        for (std::uint32_t x = 0; x < chi[i].size(); ++x) {
          const Kinds kx = kinds(i, x);
          for (std::uint32_t y = (i == j ? x + 1 : 0); y < chi[j].size(); ++y) {
            const Kinds ky = kinds(j, y);
            const bool leaves = kx.leaf && ky.leaf;
            const bool internals = kx.internal && ky.internal;
            if (!leaves && !internals) continue;
            for (CmpOp op : kAllCmpOps) {
              if (!leaves && op != CmpOp::kEq) continue;
              const bool order = op != CmpOp::kEq && op != CmpOp::kNe;
              if (order && !(kx.numeric && ky.numeric)) continue;
              specs.push_back({Predicate::Kind::kCmpNodes, i, x, op, 0, j, y});
            }
          }
        }
      }
    }
  }

  Predicate atom(const AtomSpec& s) const {
    if (s.kind == Predicate::Kind::kCmpConst) {
      return Predicate::cmp_const(chi[s.i][s.x], s.i, s.op, ctx_.value(s.constant));
    }
    return Predicate::cmp_nodes(chi[s.i][s.x], s.i, s.op, chi[s.j][s.y], s.j);
  }

  std::uint64_t weight(const AtomSpec& s) const {
    std::uint64_t w = chi[s.i][s.x].depth();
    if (s.kind == Predicate::Kind::kCmpNodes) w += chi[s.j][s.y].depth();
    return w;
  }

  bool eval(const AtomSpec& s, const Context::Tuple& t) const {
    const Resolved& a = res_[s.i][s.x][t.example][t.idx[s.i]];
    if (s.kind == Predicate::Kind::kCmpConst) {
      if (a.value == kInternal) return false;
      return compare(a.value, s.op, s.constant);
    }
    const Resolved& b = res_[s.j][s.y][t.example][t.idx[s.j]];
    if (a.value != kInternal && b.value != kInternal) return compare(a.value, s.op, b.value);
    if (a.value == kInternal && b.value == kInternal && s.op == CmpOp::kEq) {
      return a.node == b.node;
    }
    return false;
  }

  std::vector<std::vector<NodeExtractor>> chi;
  std::vector<AtomSpec> specs;

 private:
  struct Kinds {
    bool leaf = false, internal = false, numeric = false;
  };

  Kinds kinds(std::size_t i, std::size_t x) const {
    Kinds k;
    for (const auto& per_example : res_[i][x]) {
      for (const Resolved& r : per_example) {
        if (r.value == kInternal) {
          k.internal = true;
        } else {
          k.leaf = true;
          if (ctx_.number(r.value)) k.numeric = true;
        }
      }
    }
    return k;
  }

  bool compare(std::int32_t a, CmpOp op, std::int32_t b) const {
    switch (op) {
      case CmpOp::kEq: return a == b;
      case CmpOp::kNe: return a != b;
      default: break;
    }
    const auto& x = ctx_.number(a);
    const auto& y = ctx_.number(b);
    if (!x || !y) return false;
    switch (op) {
      case CmpOp::kLt: return *x < *y;
      case CmpOp::kLe: return *x <= *y;
      case CmpOp::kGt: return *x > *y;
      case CmpOp::kGe: return *x >= *y;
      default: return false;
    }
  }

  Context& ctx_;
  // res_[i][x][e][p]: chi[i][x] applied to the p-th node of column i.
  std::vector<std::vector<std::vector<std::vector<Resolved>>>> res_;
};

std::string row_bits(const Bits& b, std::size_t n) {
  std::string s;
  for (std::size_t k = 0; k < n; ++k) s += b[k] ? '1' : '0';
  return s;
}

}  // namespace

Labels label_tuples(std::span<const Example> examples, const TableExtractor& psi,
                    std::size_t max_tuples) {
  Context ctx(examples, psi);
  Labels out;
  if (!ctx.label(max_tuples)) {
    out.failure = ctx.failure;
    return out;
  }
  for (const auto& t : ctx.pos) out.positives.push_back(ctx.to_nodes(t));
  for (const auto& t : ctx.neg) out.negatives.push_back(ctx.to_nodes(t));
  return out;
}

PredicateUniverse build_universe(std::span<const Example> examples,
                                 const TableExtractor& psi,
                                 std::size_t max_node_depth) {
  Context ctx(examples, psi);
  Universe u(ctx, max_node_depth);
  PredicateUniverse out;
  out.chi = u.chi;
  for (const auto& s : u.specs) out.atoms.push_back(u.atom(s));
  return out;
}

std::optional<MinCover> find_min_cover(const CoverProblem& problem,
                                       std::uint64_t node_budget) {
  // Elements are pairs of distinct positive and negative signatures.
  auto classes = [](const std::vector<Bits>& rows) {
    std::vector<Bits> out = rows;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  const auto pos = classes(problem.positive_values);
  const auto neg = classes(problem.negative_values);
  WeightedCover cover;
  cover.num_elements = pos.size() * neg.size();
  cover.sets.assign(problem.num_atoms, Bits(cover.num_elements));
  for (std::size_t p = 0; p < pos.size(); ++p) {
    for (std::size_t n = 0; n < neg.size(); ++n) {
      const Bits diff = pos[p] ^ neg[n];
      if (diff.none()) return std::nullopt;
      for (auto k = diff.find_first(); k != Bits::npos; k = diff.find_next(k)) {
        cover.sets[k].set(p * neg.size() + n);
      }
    }
  }
  cover.primary.assign(problem.num_atoms, 1);
  cover.secondary = problem.weights;
  cover.secondary.resize(problem.num_atoms, 0);
  auto sol = solve_cover(cover, node_budget);
  if (!sol) return std::nullopt;
  return MinCover{sol->chosen, sol->optimal};
}

std::string PredicateReport::to_text() const {
  std::ostringstream out;
  out << "universe " << universe_size << " atoms, " << distinct_atoms
      << " distinct on the examples\n";
  out << "tuples " << positives << " positive, " << negatives << " negative\n";
  if (!failure.empty()) out << "failure: " << failure << "\n";
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    out << "x" << k << " = " << to_string(chosen[k]) << "\n";
  }
  if (!optimal) out << "cover search hit its node budget; cover may not be minimum\n";
  out << truth_table;
  return std::move(out).str();
}

std::optional<Predicate> learn_predicate(std::span<const Example> examples,
                                         const TableExtractor& psi,
                                         const PredicateConfig& config,
                                         PredicateReport* report) {
  PredicateReport local;
  PredicateReport& rep = report ? *report : local;
  rep = PredicateReport{};
  Context ctx(examples, psi);
  if (!ctx.label(config.max_tuples)) {
    rep.failure = ctx.failure;
    return std::nullopt;
  }
  rep.positives = ctx.pos.size();
  rep.negatives = ctx.neg.size();
  if (ctx.neg.empty()) return Predicate::always();
  if (ctx.pos.empty()) return Predicate::never();

  Universe u(ctx, config.max_node_depth);
  rep.universe_size = u.specs.size();
  const std::size_t n_tuples = ctx.pos.size() + ctx.neg.size();
  if (u.specs.size() * n_tuples > config.max_atom_bits) {
    rep.failure = "predicate universe too large (" + std::to_string(u.specs.size()) +
                  " atoms over " + std::to_string(n_tuples) + " tuples)";
    return std::nullopt;
  }

  // Truth value of every atom on every tuple, positives first; atoms with
  // identical columns are interchangeable, keep the lightest.
  std::vector<std::size_t> kept;
  std::vector<Bits> columns;
  {
    std::unordered_map<Bits, std::size_t, boost::hash<Bits>> by_bits;
    for (std::size_t a = 0; a < u.specs.size(); ++a) {
      Bits col(n_tuples);
      for (std::size_t t = 0; t < ctx.pos.size(); ++t) {
        if (u.eval(u.specs[a], ctx.pos[t])) col.set(t);
      }
      for (std::size_t t = 0; t < ctx.neg.size(); ++t) {
        if (u.eval(u.specs[a], ctx.neg[t])) col.set(ctx.pos.size() + t);
      }
      auto [it, fresh] = by_bits.try_emplace(col, kept.size());
      if (fresh) {
        kept.push_back(a);
        columns.push_back(std::move(col));
      } else if (u.weight(u.specs[a]) < u.weight(u.specs[kept[it->second]])) {
        kept[it->second] = a;
      }
    }
  }
  rep.distinct_atoms = kept.size();

  CoverProblem problem;
  problem.num_atoms = kept.size();
  problem.positive_values.assign(ctx.pos.size(), Bits(kept.size()));
  problem.negative_values.assign(ctx.neg.size(), Bits(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    problem.weights.push_back(u.weight(u.specs[kept[k]]));
    for (auto t = columns[k].find_first(); t != Bits::npos; t = columns[k].find_next(t)) {
      if (t < ctx.pos.size()) {
        problem.positive_values[t].set(k);
      } else {
        problem.negative_values[t - ctx.pos.size()].set(k);
      }
    }
  }
  auto cover = find_min_cover(problem, config.node_budget);
  if (!cover) {
    rep.failure = "no predicate in the universe separates the positive and negative tuples";
    return std::nullopt;
  }
  rep.optimal = cover->optimal;
  if (cover->atoms.size() > 63) {
    rep.failure = "minimum cover needs more than 63 atoms";
    return std::nullopt;
  }

  TruthTable table;
  table.num_vars = cover->atoms.size();
  std::vector<Predicate> atoms;
  for (std::size_t k : cover->atoms) {
    atoms.push_back(u.atom(u.specs[kept[k]]));
  }
  auto project = [&](const Bits& row) {
    std::uint64_t m = 0;
    for (std::size_t v = 0; v < cover->atoms.size(); ++v) {
      if (row[cover->atoms[v]]) m |= std::uint64_t{1} << v;
    }
    return m;
  };
  for (const auto& row : problem.positive_values) table.positives.push_back(project(row));
  for (const auto& row : problem.negative_values) table.negatives.push_back(project(row));
  rep.chosen = atoms;
  {
    std::ostringstream tt;
    std::set<std::pair<std::uint64_t, bool>> rows;
    for (auto m : table.positives) rows.insert({m, true});
    for (auto m : table.negatives) rows.insert({m, false});
    for (const auto& [m, positive] : rows) {
      Bits b(table.num_vars, m);
      tt << (positive ? "+ " : "- ") << row_bits(b, table.num_vars) << "\n";
    }
    rep.truth_table = std::move(tt).str();
  }
  auto dnf = minimize_dnf(table);
  if (!dnf) {
    rep.failure = "chosen atoms do not yield a consistent truth table";
    return std::nullopt;
  }
  return dnf_to_predicate(*dnf, atoms);
}

std::size_t atom_lower_bound(std::span<const Example> examples,
                             const TableExtractor& psi) {
  Context ctx(examples, psi);
  if (!ctx.label(std::size_t{1} << 24)) return 1;
  return ctx.neg.empty() ? 0 : 1;
}

}  // namespace treeshred
