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

#ifndef TREESHRED_COLUMN_LEARNER_HPP_
#define TREESHRED_COLUMN_LEARNER_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "treeshred/dsl.hpp"
#include "treeshred/hdt.hpp"

namespace treeshred {

// How a node set is compared with a target column of values.
enum class Coverage {
  // Every distinct target value is the value of some node in the set.
  kValueSet,
  // Every target value is matched by a distinct node (value multiplicities
  // must be met).
  kValueMultiset,
};

bool covers(const Hdt& tree, std::span<const NodeId> nodes,
            std::span<const std::string> target, Coverage coverage);

// Alphabet symbols are single column-extractor steps. Symbols are ordered by
// (operator name, tag, pos); "children" < "descendants" < "pchildren".
bool symbol_less(const ColumnStep& a, const ColumnStep& b);
std::string symbol_name(const ColumnStep& s);

// Deterministic automaton over extractor steps. For a single-example DFA the
// states are the distinct node sets reachable from {root}; a transition to
// the empty node set is left out (the empty set covers nothing and only
// reaches itself, so it is a dead state).
class ExtractorDfa {
 public:
  using State = std::uint32_t;
  static constexpr State kNone = std::numeric_limits<State>::max();

  const std::vector<ColumnStep>& alphabet() const { return alphabet_; }
  std::size_t num_states() const { return final_.size(); }
  State initial() const { return 0; }
  bool is_final(State q) const { return final_[q]; }
  State next(State q, std::size_t symbol) const {
    return delta_[q * alphabet_.size() + symbol];
  }
  // Node set of q; only available on single-example automata.
  const std::vector<NodeId>& nodes(State q) const { return nodes_.at(q); }
  bool has_node_sets() const { return !nodes_.empty(); }
  bool empty_language() const;

  // Runs the automaton on the steps of pi; symbols outside the alphabet
  // reject.
  bool accepts(const ColumnExtractor& pi) const;

 private:
  friend ExtractorDfa construct_dfa(const Hdt&, std::span<const std::string>,
                                    Coverage, std::size_t);
  friend ExtractorDfa intersect(const ExtractorDfa&, const ExtractorDfa&);

  std::size_t symbol_index(const ColumnStep& s) const;
  State add_state(bool is_final);

  std::vector<ColumnStep> alphabet_;  // sorted by symbol_less
  std::vector<char> final_;
  std::vector<State> delta_;          // num_states x alphabet, kNone = dead
  std::vector<std::vector<NodeId>> nodes_;
};

// Alphabet harvested from a tree: children/descendants for every tag and
// pchildren for every (tag, pos) pair occurring in it.
std::vector<ColumnStep> tree_alphabet(const Hdt& tree);

// Builds the automaton of all node sets reachable from {root}. Throws
// std::length_error when more than max_states states would be created.
ExtractorDfa construct_dfa(const Hdt& tree, std::span<const std::string> target,
                           Coverage coverage = Coverage::kValueSet,
                           std::size_t max_states = std::size_t{1} << 20);

// Product automaton over the union of both alphabets; only reachable product
// states are kept.
ExtractorDfa intersect(const ExtractorDfa& a, const ExtractorDfa& b);

// Accepted words of length <= max_len in shortlex order, at most max_programs.
std::vector<ColumnExtractor> enumerate_language(const ExtractorDfa& dfa,
                                                std::size_t max_programs,
                                                std::size_t max_len);

// One word per reachable final state: the shortlex-least word reaching it.
// Words reaching the same state select the same node set on every example,
// so these are the only extractors worth combining. Sorted shortlex.
std::vector<ColumnExtractor> representatives(const ExtractorDfa& dfa,
                                             std::size_t max_programs,
                                             std::size_t max_len);

std::string dump(const ExtractorDfa& dfa, const Hdt* tree = nullptr);

struct ColumnExample {
  const Hdt* tree;
  std::vector<std::string> values;
};

// Per-example automata intersected in input order.
ExtractorDfa learn_column_dfa(std::span<const ColumnExample> examples,
                              Coverage coverage = Coverage::kValueSet,
                              std::size_t max_states = std::size_t{1} << 20);

}  // namespace treeshred

#endif  // TREESHRED_COLUMN_LEARNER_HPP_
