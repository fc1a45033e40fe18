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

#ifndef TREESHRED_SYNTHESIZER_HPP_
#define TREESHRED_SYNTHESIZER_HPP_

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeshred/column_learner.hpp"
#include "treeshred/dsl.hpp"
#include "treeshred/predicate_learner.hpp"

namespace treeshred {

// Ranking of programs: fewer atoms first, then fewer extractor constructs,
// then the canonical text.
struct Cost {
  std::size_t atoms = 0;
  std::size_t constructs = 0;
  std::string key;

  friend auto operator<=>(const Cost&, const Cost&) = default;
};

Cost cost(const Program& program);

// Multiset equality of the program output with every expected table.
bool verify(const Program& program, std::span<const Example> examples);

struct SynthConfig {
  std::size_t max_len = 8;           // steps per column extractor
  std::size_t max_programs = 64;     // extractors kept per column
  std::size_t max_candidates = 4096; // table extractors tried
  std::size_t max_node_depth = 4;
  std::size_t max_dfa_states = std::size_t{1} << 20;
  double budget_secs = 60;
  std::size_t threads = 0;  // 0: hardware concurrency
  Coverage coverage = Coverage::kValueSet;
  PredicateConfig predicate;  // max_node_depth is taken from this struct's field
};

enum class SynthFailure {
  kNone,
  kInvalidInput,  // no examples, ragged widths, empty tables
  kColumn,        // some column has no consistent extractor
  kPredicate,     // no table extractor admits a separating predicate
  kBudget,        // time ran out before any consistent program
};

struct ColumnReport {
  std::size_t dfa_states = 0;
  std::size_t extractors = 0;
};

struct SynthReport {
  SynthFailure failure = SynthFailure::kNone;
  std::size_t failed_column = 0;
  std::string message;
  std::vector<ColumnReport> columns;
  std::size_t candidates = 0;   // table extractors generated
  std::size_t pruned = 0;       // skipped by the cost bound
  std::size_t learned = 0;      // predicate learner runs
  std::size_t no_predicate = 0; // runs without a separating predicate
  std::size_t rejected = 0;     // learned programs failing verify
  std::size_t consistent = 0;   // verified programs
  bool timed_out = false;
  bool optimal_covers = true;   // every cover search finished
  double seconds = 0;
  std::optional<Cost> best_cost;

  std::string to_text() const;
};

// Learns column automata, tries table extractors in nondecreasing construct
// count, learns a predicate for each and keeps the cheapest verified program.
std::optional<Program> synthesize(std::span<const Example> examples,
                                  const SynthConfig& config,
                                  SynthReport* report = nullptr);

// Column automata and their representative extractors, exposed for
// inspection; throws std::invalid_argument on malformed examples.
struct ColumnSpace {
  std::vector<ExtractorDfa> dfas;
  std::vector<std::vector<ColumnExtractor>> extractors;
};
ColumnSpace learn_columns(std::span<const Example> examples,
                          const SynthConfig& config);

}  // namespace treeshred

#endif  // TREESHRED_SYNTHESIZER_HPP_
