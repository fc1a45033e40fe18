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

#ifndef TREESHRED_PREDICATE_LEARNER_HPP_
#define TREESHRED_PREDICATE_LEARNER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeshred/cover.hpp"
#include "treeshred/dsl.hpp"
#include "treeshred/hdt.hpp"
#include "treeshred/logic_min.hpp"

namespace treeshred {

// One input-output example: a tree and the table expected from it.
struct Example {
  const Hdt* tree = nullptr;
  ValueTable table;
};

struct LabeledTuple {
  std::uint32_t example = 0;
  NodeRow nodes;
};

struct Labels {
  std::vector<LabeledTuple> positives;
  std::vector<LabeledTuple> negatives;
  std::string failure;  // set when some expected row has no node tuple

  bool ok() const { return failure.empty(); }
};

// Walks each example's cross product in order; a tuple is positive when its
// projection matches a not yet consumed row of the expected table.
Labels label_tuples(std::span<const Example> examples, const TableExtractor& psi,
                    std::size_t max_tuples = 5'000'000);

struct PredicateUniverse {
  // Per column: node extractors returning a node on every column node of
  // every example, one per distinct behaviour, shortest first.
  std::vector<std::vector<NodeExtractor>> chi;
  std::vector<Predicate> atoms;
};

PredicateUniverse build_universe(std::span<const Example> examples,
                                 const TableExtractor& psi,
                                 std::size_t max_node_depth);

// Alg. 4 input: atom k's truth value on each positive and negative tuple.
struct CoverProblem {
  std::size_t num_atoms = 0;
  std::vector<Bits> positive_values;  // [i] has bit k = atom k on e_i+
  std::vector<Bits> negative_values;  // [j] has bit k = atom k on e_j-
  std::vector<std::uint64_t> weights;  // tie-break among equal-size covers

  // 1 iff atom k evaluates differently on positive i and negative j.
  bool a(std::size_t i, std::size_t j, std::size_t k) const {
    return positive_values[i][k] != negative_values[j][k];
  }
};

struct MinCover {
  std::vector<std::size_t> atoms;  // sorted
  bool optimal = true;
};

// Minimum number of atoms separating every positive/negative pair, ties
// broken by total weight and then by index. nullopt if a pair is inseparable.
std::optional<MinCover> find_min_cover(const CoverProblem& problem,
                                       std::uint64_t node_budget = 20'000'000);

struct PredicateConfig {
  std::size_t max_node_depth = 4;
  std::size_t max_tuples = 2'000'000;
  std::size_t max_atom_bits = std::size_t{1} << 31;  // atoms x tuples
  std::uint64_t node_budget = 20'000'000;
};

struct PredicateReport {
  std::size_t universe_size = 0;
  std::size_t distinct_atoms = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<Predicate> chosen;
  std::string truth_table;
  std::string failure;
  bool optimal = true;

  std::string to_text() const;
};

// Label, build the universe, find the minimum cover, minimize the DNF.
std::optional<Predicate> learn_predicate(std::span<const Example> examples,
                                         const TableExtractor& psi,
                                         const PredicateConfig& config,
                                         PredicateReport* report = nullptr);

// Cheap lower bound on the atoms any consistent predicate for psi needs: 0 when
// the unfiltered table already equals the expected rows, else 1.
std::size_t atom_lower_bound(std::span<const Example> examples,
                             const TableExtractor& psi);

}  // namespace treeshred

#endif  // TREESHRED_PREDICATE_LEARNER_HPP_
