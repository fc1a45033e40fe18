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

#ifndef TREESHRED_DSL_HPP_
#define TREESHRED_DSL_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeshred/hdt.hpp"

namespace treeshred {

// ----------------------------------------------------------------------------
// Column extractors: s | children(pi, tag) | pchildren(pi, tag, pos) |
// descendants(pi, tag). Stored as the sequence of operators applied to {root},
// innermost first, so an extractor is also a word over the automaton alphabet.

enum class ColumnOp : std::uint8_t { kChildren, kPChildren, kDescendants };

struct ColumnStep {
  ColumnOp op = ColumnOp::kChildren;
  std::string tag;
  std::uint32_t pos = 0;  // kPChildren only

  friend auto operator<=>(const ColumnStep&, const ColumnStep&) = default;
};

struct ColumnExtractor {
  std::vector<ColumnStep> steps;

  std::size_t constructs() const { return steps.size(); }
  friend auto operator<=>(const ColumnExtractor&, const ColumnExtractor&) = default;
};

struct TableExtractor {
  std::vector<ColumnExtractor> columns;

  std::size_t width() const { return columns.size(); }
  std::size_t constructs() const;
  friend bool operator==(const TableExtractor&, const TableExtractor&) = default;
};

// ----------------------------------------------------------------------------
// Node extractors: n | parent(phi) | child(phi, tag, pos), innermost first.

struct NodeStep {
  enum class Kind : std::uint8_t { kParent, kChild };
  Kind kind = Kind::kParent;
  std::string tag;
  std::uint32_t pos = 0;

  static NodeStep parent() { return {}; }
  static NodeStep child(std::string tag, std::uint32_t pos) {
    return {Kind::kChild, std::move(tag), pos};
  }
  friend auto operator<=>(const NodeStep&, const NodeStep&) = default;
};

struct NodeExtractor {
  std::vector<NodeStep> steps;

  std::size_t depth() const { return steps.size(); }
  bool is_parent_chain() const;
  friend auto operator<=>(const NodeExtractor&, const NodeExtractor&) = default;
};

// ----------------------------------------------------------------------------
// Predicates.

enum class CmpOp : std::uint8_t { kEq, kNe, kLt, kLe, kGt, kGe };

inline constexpr CmpOp kAllCmpOps[] = {CmpOp::kEq, CmpOp::kNe, CmpOp::kLt,
                                      CmpOp::kLe, CmpOp::kGt, CmpOp::kGe};

std::string_view to_string(CmpOp op);
// The operator with its operands swapped: a < b  <=>  b > a.
CmpOp mirror(CmpOp op);

struct Predicate {
  enum class Kind : std::uint8_t { kCmpConst, kCmpNodes, kAnd, kOr, kNot };

  Kind kind = Kind::kAnd;
  // Atom fields. kCmpConst compares lhs(t[lhs_slot]).data with `constant`;
  // kCmpNodes compares lhs(t[lhs_slot]) with rhs(t[rhs_slot]).
  NodeExtractor lhs;
  std::uint32_t lhs_slot = 0;
  CmpOp op = CmpOp::kEq;
  std::string constant;
  NodeExtractor rhs;
  std::uint32_t rhs_slot = 0;
  // Connective operands. An empty kAnd is true, an empty kOr is false.
  std::vector<Predicate> operands;

  static Predicate cmp_const(NodeExtractor lhs, std::uint32_t slot, CmpOp op,
                             std::string constant);
  static Predicate cmp_nodes(NodeExtractor lhs, std::uint32_t lhs_slot,
                             CmpOp op, NodeExtractor rhs, std::uint32_t rhs_slot);
  static Predicate all_of(std::vector<Predicate> operands);
  static Predicate any_of(std::vector<Predicate> operands);
  static Predicate negate(Predicate operand);
  static Predicate always() { return all_of({}); }
  static Predicate never() { return any_of({}); }

  bool is_atom() const {
    return kind == Kind::kCmpConst || kind == Kind::kCmpNodes;
  }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// Distinct atoms occurring in p.
std::size_t atom_count(const Predicate& p);
// Atom occurrences in p (negations are not counted).
std::size_t literal_count(const Predicate& p);
// Largest tuple slot referenced by p, if any.
std::optional<std::uint32_t> max_slot(const Predicate& p);

struct Program {
  TableExtractor extractor;
  Predicate predicate;

  friend bool operator==(const Program&, const Program&) = default;
};

// ----------------------------------------------------------------------------
// Tables.

using ValueRow = std::vector<std::string>;
using NodeRow = std::vector<NodeId>;

// Bag of value tuples.
struct ValueTable {
  std::size_t width = 0;
  std::vector<ValueRow> rows;
};

// Bag of node tuples (the intermediate table of a table extractor).
struct NodeTable {
  std::size_t width = 0;
  std::vector<NodeRow> rows;
};

// Multiset equality of rows.
bool same_rows(const ValueTable& a, const ValueTable& b);

// ----------------------------------------------------------------------------
// Semantics.

// Value a node contributes to an output cell: its data, or "" for nodes
// without data (internal nodes).
std::string_view cell_value(const Hdt& tree, NodeId n);

// Applies column steps to a node set; result is sorted and duplicate-free.
std::vector<NodeId> apply_column_steps(std::span<const ColumnStep> steps,
                                       std::vector<NodeId> nodes,
                                       const Hdt& tree);
std::vector<NodeId> eval_column(const ColumnExtractor& pi, const Hdt& tree);

std::optional<NodeId> eval_node_extractor(const NodeExtractor& phi, NodeId n,
                                          const Hdt& tree);

// Data comparison. Equality operators compare the strings; order operators
// apply only when both sides parse as decimal numbers and are false otherwise.
bool compare_data(std::string_view a, CmpOp op, std::string_view b);
// The numeric reading used by order comparisons: an optionally signed decimal
// or scientific literal spanning the whole string.
std::optional<double> parse_decimal(std::string_view s);
bool eval_atom(const Predicate& atom, std::span<const NodeId> tuple,
               const Hdt& tree);
bool eval_predicate(const Predicate& p, std::span<const NodeId> tuple,
                    const Hdt& tree);

// Column node sets of a table extractor, one vector per column.
std::vector<std::vector<NodeId>> eval_columns(const TableExtractor& psi,
                                              const Hdt& tree);
// Calls fn(row) for every tuple of the cross product in lexicographic order
// of the column positions. Stops early when fn returns false.
template <typename Fn>
void for_each_tuple(const std::vector<std::vector<NodeId>>& columns, Fn&& fn);

NodeTable eval_table(const TableExtractor& psi, const Hdt& tree);

struct EvalStats {
  std::size_t internal_cells = 0;  // cells projected from nodes without data
};

ValueTable eval_program(const Program& program, const Hdt& tree,
                        EvalStats* stats = nullptr);
NodeTable eval_program_nodes(const Program& program, const Hdt& tree);
ValueRow project(std::span<const NodeId> row, const Hdt& tree,
                 EvalStats* stats = nullptr);

// ----------------------------------------------------------------------------
// Canonical s-expression text.

std::string to_string(const ColumnExtractor& pi);
std::string to_string(const NodeExtractor& phi);
std::string to_string(const Predicate& p);
std::string to_string(const Program& program);

ColumnExtractor parse_column_extractor(std::string_view text);
NodeExtractor parse_node_extractor(std::string_view text);
Predicate parse_predicate(std::string_view text);
Program parse_program(std::string_view text);

// ----------------------------------------------------------------------------

template <typename Fn>
void for_each_tuple(const std::vector<std::vector<NodeId>>& columns, Fn&& fn) {
  const std::size_t k = columns.size();
  if (k == 0) return;
  for (const auto& c : columns) {
    if (c.empty()) return;
  }
  std::vector<std::size_t> idx(k, 0);
  NodeRow row(k);
  for (std::size_t i = 0; i < k; ++i) row[i] = columns[i][0];
  for (;;) {
    if (!fn(std::span<const NodeId>(row))) return;
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (++idx[i] < columns[i].size()) {
        row[i] = columns[i][idx[i]];
        break;
      }
      idx[i] = 0;
      row[i] = columns[i][0];
      if (i == 0) return;
    }
  }
}

}  // namespace treeshred

#endif  // TREESHRED_DSL_HPP_
