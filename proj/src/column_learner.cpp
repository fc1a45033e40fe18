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

#include "treeshred/column_learner.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace treeshred {
namespace {

struct NodeSetHash {
  std::size_t operator()(const std::vector<NodeId>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (NodeId n : v) {
      h ^= n.value;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct PairHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{p.first} << 32) | p.second);
  }
};

std::string_view op_name(ColumnOp op) {
  switch (op) {
    case ColumnOp::kChildren: return "children";
    case ColumnOp::kPChildren: return "pchildren";
    case ColumnOp::kDescendants: return "descendants";
  }
  return "?";
}

}  // namespace

bool covers(const Hdt& tree, std::span<const NodeId> nodes,
            std::span<const std::string> target, Coverage coverage) {
  if (coverage == Coverage::kValueSet) {
    std::unordered_set<std::string_view> have;
    for (NodeId n : nodes) have.insert(cell_value(tree, n));
    for (const auto& v : target) {
      if (!have.contains(v)) return false;
    }
    return true;
  }
  if (nodes.size() < target.size()) return false;
  std::unordered_map<std::string_view, std::size_t> have;
  for (NodeId n : nodes) ++have[cell_value(tree, n)];
  for (const auto& v : target) {
    auto it = have.find(v);
    if (it == have.end() || it->second == 0) return false;
    --it->second;
  }
  return true;
}

bool symbol_less(const ColumnStep& a, const ColumnStep& b) {
  return std::make_tuple(op_name(a.op), std::string_view(a.tag), a.pos) <
         std::make_tuple(op_name(b.op), std::string_view(b.tag), b.pos);
}

std::string symbol_name(const ColumnStep& s) {
  std::string out(op_name(s.op));
  out += '_';
  out += s.tag;
  if (s.op == ColumnOp::kPChildren) out += "," + std::to_string(s.pos);
  return out;
}

std::vector<ColumnStep> tree_alphabet(const Hdt& tree) {
  std::vector<ColumnStep> out;
  std::vector<std::uint32_t> max_pos(tree.tags().size(), 0);
  std::vector<char> seen(tree.tags().size(), 0);
  for (std::uint32_t i = 1; i < tree.size(); ++i) {
    NodeId n{i};
    const TagId t = tree.tag_id(n);
    seen[t] = 1;
    max_pos[t] = std::max(max_pos[t], tree.pos(n));
  }
  for (TagId t = 0; t < tree.tags().size(); ++t) {
    if (!seen[t]) continue;
    const std::string& tag = tree.tags()[t];
    out.push_back({ColumnOp::kChildren, tag, 0});
    out.push_back({ColumnOp::kDescendants, tag, 0});
    // Every rank below an occurring rank occurs too.
    for (std::uint32_t p = 0; p <= max_pos[t]; ++p) {
      out.push_back({ColumnOp::kPChildren, tag, p});
    }
  }
  std::sort(out.begin(), out.end(), symbol_less);
  return out;
}

bool ExtractorDfa::empty_language() const {
  return std::none_of(final_.begin(), final_.end(), [](char f) { return f != 0; });
}

std::size_t ExtractorDfa::symbol_index(const ColumnStep& s) const {
  auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), s, symbol_less);
  if (it == alphabet_.end() || symbol_less(s, *it)) return alphabet_.size();
  return static_cast<std::size_t>(it - alphabet_.begin());
}

ExtractorDfa::State ExtractorDfa::add_state(bool is_final) {
  const auto q = static_cast<State>(final_.size());
  final_.push_back(is_final ? 1 : 0);
  delta_.resize(delta_.size() + alphabet_.size(), kNone);
  return q;
}

bool ExtractorDfa::accepts(const ColumnExtractor& pi) const {
  State q = initial();
  for (const auto& step : pi.steps) {
    const std::size_t s = symbol_index(step);
    if (s == alphabet_.size()) return false;
    q = next(q, s);
    if (q == kNone) return false;
  }
  return is_final(q);
}

ExtractorDfa construct_dfa(const Hdt& tree, std::span<const std::string> target,
                           Coverage coverage, std::size_t max_states) {
  ExtractorDfa dfa;
  dfa.alphabet_ = tree_alphabet(tree);
  std::unordered_map<std::vector<NodeId>, ExtractorDfa::State, NodeSetHash> index;
  auto intern = [&](std::vector<NodeId> nodes) {
    auto it = index.find(nodes);
    if (it != index.end()) return it->second;
    if (dfa.num_states() >= max_states) {
      throw std::length_error("column automaton exceeds " +
                              std::to_string(max_states) + " states");
    }
    const auto q = dfa.add_state(covers(tree, nodes, target, coverage));
    index.emplace(nodes, q);
    dfa.nodes_.push_back(std::move(nodes));
    return q;
  };
  intern({tree.root()});
  for (ExtractorDfa::State q = 0; q < dfa.num_states(); ++q) {
    for (std::size_t s = 0; s < dfa.alphabet_.size(); ++s) {
      auto succ = apply_column_steps(std::span(&dfa.alphabet_[s], 1),
                                     dfa.nodes_[q], tree);
      if (succ.empty()) continue;
      const auto r = intern(std::move(succ));
      dfa.delta_[q * dfa.alphabet_.size() + s] = r;
    }
  }
  return dfa;
}

ExtractorDfa intersect(const ExtractorDfa& a, const ExtractorDfa& b) {
  ExtractorDfa out;
  std::set_union(a.alphabet_.begin(), a.alphabet_.end(), b.alphabet_.begin(),
                 b.alphabet_.end(), std::back_inserter(out.alphabet_), symbol_less);
  const std::size_t m = out.alphabet_.size();
  std::vector<std::size_t> ia(m), ib(m);
  for (std::size_t s = 0; s < m; ++s) {
    ia[s] = a.symbol_index(out.alphabet_[s]);
    ib[s] = b.symbol_index(out.alphabet_[s]);
  }
  using Pair = std::pair<std::uint32_t, std::uint32_t>;
  std::unordered_map<Pair, ExtractorDfa::State, PairHash> index;
  std::vector<Pair> members;
  auto intern = [&](Pair p) {
    auto it = index.find(p);
    if (it != index.end()) return it->second;
    const auto q = out.add_state(a.is_final(p.first) && b.is_final(p.second));
    index.emplace(p, q);
    members.push_back(p);
    return q;
  };
  intern({a.initial(), b.initial()});
  for (ExtractorDfa::State q = 0; q < out.num_states(); ++q) {
    const Pair p = members[q];
    for (std::size_t s = 0; s < m; ++s) {
      if (ia[s] == a.alphabet_.size() || ib[s] == b.alphabet_.size()) continue;
      const auto x = a.next(p.first, ia[s]);
      const auto y = b.next(p.second, ib[s]);
      if (x == ExtractorDfa::kNone || y == ExtractorDfa::kNone) continue;
      const auto r = intern({x, y});
      out.delta_[q * m + s] = r;
    }
  }
  return out;
}

namespace {

ColumnExtractor word_to_extractor(const ExtractorDfa& dfa,
                                  const std::vector<std::uint32_t>& word) {
  ColumnExtractor pi;
  for (auto s : word) pi.steps.push_back(dfa.alphabet()[s]);
  return pi;
}

}  // namespace

std::vector<ColumnExtractor> enumerate_language(const ExtractorDfa& dfa,
                                                std::size_t max_programs,
                                                std::size_t max_len) {
  std::vector<ColumnExtractor> out;
  if (max_programs == 0 || dfa.num_states() == 0) return out;
  const std::size_t n = dfa.num_states();
  const std::size_t m = dfa.alphabet().size();
  // can[r][q]: some word of length exactly r leads from q to a final state.
  std::vector<std::vector<char>> can(max_len + 1, std::vector<char>(n, 0));
  for (std::size_t q = 0; q < n; ++q) can[0][q] = dfa.is_final(q);
  for (std::size_t r = 1; r <= max_len; ++r) {
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t s = 0; s < m && !can[r][q]; ++s) {
        auto t = dfa.next(static_cast<ExtractorDfa::State>(q), s);
        if (t != ExtractorDfa::kNone && can[r - 1][t]) can[r][q] = 1;
      }
    }
  }
  std::vector<std::uint32_t> word;
  auto dfs = [&](auto&& self, ExtractorDfa::State q, std::size_t rem) -> void {
    if (out.size() >= max_programs) return;
    if (rem == 0) {
      out.push_back(word_to_extractor(dfa, word));
      return;
    }
    for (std::size_t s = 0; s < m; ++s) {
      auto t = dfa.next(q, s);
      if (t == ExtractorDfa::kNone || !can[rem - 1][t]) continue;
      word.push_back(static_cast<std::uint32_t>(s));
      self(self, t, rem - 1);
      word.pop_back();
      if (out.size() >= max_programs) return;
    }
  };
  for (std::size_t len = 0; len <= max_len && out.size() < max_programs; ++len) {
    if (can[len][dfa.initial()]) dfs(dfs, dfa.initial(), len);
  }
  return out;
}

std::vector<ColumnExtractor> representatives(const ExtractorDfa& dfa,
                                             std::size_t max_programs,
                                             std::size_t max_len) {
  std::vector<ColumnExtractor> out;
  if (dfa.num_states() == 0) return out;
  const std::size_t m = dfa.alphabet().size();
  constexpr auto kUnseen = ExtractorDfa::kNone;
  std::vector<ExtractorDfa::State> via_state(dfa.num_states(), kUnseen);
  std::vector<std::uint32_t> via_symbol(dfa.num_states(), 0);
  std::vector<std::size_t> depth(dfa.num_states(), 0);
  std::deque<ExtractorDfa::State> queue{dfa.initial()};
  via_state[dfa.initial()] = dfa.initial();
  while (!queue.empty() && out.size() < max_programs) {
    const auto q = queue.front();
    queue.pop_front();
    if (dfa.is_final(q)) {
      std::vector<std::uint32_t> word;
      for (auto x = q; x != dfa.initial(); x = via_state[x]) word.push_back(via_symbol[x]);
      std::reverse(word.begin(), word.end());
      out.push_back(word_to_extractor(dfa, word));
    }
    if (depth[q] == max_len) continue;
    for (std::size_t s = 0; s < m; ++s) {
      auto t = dfa.next(q, s);
      if (t == ExtractorDfa::kNone || via_state[t] != kUnseen) continue;
      via_state[t] = q;
      via_symbol[t] = static_cast<std::uint32_t>(s);
      depth[t] = depth[q] + 1;
      queue.push_back(t);
    }
  }
  return out;
}

std::string dump(const ExtractorDfa& dfa, const Hdt* tree) {
  std::ostringstream out;
  std::size_t finals = 0;
  for (std::size_t q = 0; q < dfa.num_states(); ++q) finals += dfa.is_final(q) ? 1 : 0;
  out << "dfa states=" << dfa.num_states() << " finals=" << finals
      << " alphabet=" << dfa.alphabet().size() << " initial=" << dfa.initial()
      << "\n";
  for (std::size_t q = 0; q < dfa.num_states(); ++q) {
    const auto state = static_cast<ExtractorDfa::State>(q);
    out << "state " << q << (dfa.is_final(state) ? " final" : "");
    if (dfa.has_node_sets()) {
      out << " nodes=[";
      const auto& nodes = dfa.nodes(state);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0) out << ' ';
        out << nodes[i].value;
        if (tree && tree->data(nodes[i])) out << ':' << *tree->data(nodes[i]);
      }
      out << ']';
    }
    out << '\n';
    for (std::size_t s = 0; s < dfa.alphabet().size(); ++s) {
      const auto t = dfa.next(state, s);
      if (t == ExtractorDfa::kNone) continue;
      out << "  " << symbol_name(dfa.alphabet()[s]) << " -> " << t << '\n';
    }
  }
  return std::move(out).str();
}

ExtractorDfa learn_column_dfa(std::span<const ColumnExample> examples,
                              Coverage coverage, std::size_t max_states) {
  if (examples.empty()) throw std::invalid_argument("no column examples");
  ExtractorDfa acc = construct_dfa(*examples[0].tree, examples[0].values,
                                   coverage, max_states);
  for (std::size_t i = 1; i < examples.size(); ++i) {
    acc = intersect(acc, construct_dfa(*examples[i].tree, examples[i].values,
                                       coverage, max_states));
  }
  return acc;
}

}  // namespace treeshred
