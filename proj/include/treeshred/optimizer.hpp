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

#ifndef TREESHRED_OPTIMIZER_HPP_
#define TREESHRED_OPTIMIZER_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "treeshred/dsl.hpp"
#include "treeshred/hdt.hpp"

namespace treeshred {

// A clause of a CNF predicate: the disjunction of its literals, each an atom
// or a negated atom.
using Clause = std::vector<Predicate>;

// Conjunctive normal form by distribution. Returns false, leaving `out`
// holding the single clause {p}, when more than max_clauses would be needed.
bool to_cnf(const Predicate& p, std::vector<Clause>& out, std::size_t max_clauses = 256);

enum class Equivalence {
  kDifferent,   // node sets differ on some given tree
  kObserved,    // same node sets on every given tree, syntax differs
  kStructural,  // identical after normalization
};

Equivalence equiv_extractors(std::span<const ColumnStep> a, std::span<const ColumnStep> b,
                             std::span<const Hdt* const> trees);

// One loop of the nested execution. Anchor levels bind no slot: they iterate
// the shared prefix nodes of a fused group. Suffix levels bind a slot from
// the current anchor node. Probe levels bind a slot by hash lookup on a key
// computed from an already bound slot.
struct PlanLevel {
  enum class Kind { kScan, kAnchor, kSuffix, kProbe };
  Kind kind = Kind::kScan;
  std::uint32_t slot = 0;                // kScan, kSuffix, kProbe
  std::size_t anchor = 0;                // kAnchor, kSuffix
  std::vector<ColumnStep> steps;         // scan/probe: column; anchor: prefix; suffix: rest
  std::vector<std::vector<ColumnStep>> guards;  // kAnchor: prefixes to intersect with
  NodeExtractor key;                     // kProbe: applied to this slot's nodes
  NodeExtractor probe;                   // kProbe: applied to probe_slot
  std::uint32_t probe_slot = 0;
  std::vector<Predicate> filters;        // clauses checked once this level binds
};

struct ExecutionPlan {
  std::size_t width = 0;
  std::vector<PlanLevel> levels;
  std::size_t anchors = 0;
  std::size_t fused_conjuncts = 0;
  std::size_t probe_conjuncts = 0;
  bool cnf_capped = false;

  std::string to_text() const;
};

struct OptimizeOptions {
  bool fusion = true;
  bool probes = true;
  bool pushdown = true;  // apply each clause as soon as its slots are bound
  std::size_t max_clauses = 256;
};

// Trees, when given, let extensionally equal prefixes fuse (with a runtime
// guard); without trees only structurally equal prefixes fuse.
ExecutionPlan optimize(const Program& program, std::span<const Hdt* const> trees = {},
                       const OptimizeOptions& options = {});

struct ExecStats {
  std::size_t rows = 0;
  std::size_t filter_checks = 0;
  // Largest number of node entries held at once in loop domains and hash
  // indexes; the unfused cross product is never stored.
  std::size_t peak_buffer = 0;
};

using RowSink = std::function<void(std::span<const NodeId>)>;

// Streams the node rows of the plan to sink. Rows come in plan order.
ExecStats execute_plan(const ExecutionPlan& plan, const Hdt& tree, const RowSink& sink);

// Convenience: runs the plan and projects rows to values.
ValueTable run_plan(const ExecutionPlan& plan, const Hdt& tree, ExecStats* stats = nullptr);

}  // namespace treeshred

#endif  // TREESHRED_OPTIMIZER_HPP_
