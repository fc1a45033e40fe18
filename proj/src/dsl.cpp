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

#include "treeshred/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <stdexcept>
#include <utility>

namespace treeshred {

std::size_t TableExtractor::constructs() const {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.constructs();
  return n;
}

bool NodeExtractor::is_parent_chain() const {
  return std::all_of(steps.begin(), steps.end(), [](const NodeStep& s) {
    return s.kind == NodeStep::Kind::kParent;
  });
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::kEq: return "=";
    case CmpOp::kNe: return "!=";
    case CmpOp::kLt: return "<";
    case CmpOp::kLe: return "<=";
    case CmpOp::kGt: return ">";
    case CmpOp::kGe: return ">=";
  }
  return "?";
}

CmpOp mirror(CmpOp op) {
  switch (op) {
    case CmpOp::kLt: return CmpOp::kGt;
    case CmpOp::kLe: return CmpOp::kGe;
    case CmpOp::kGt: return CmpOp::kLt;
    case CmpOp::kGe: return CmpOp::kLe;
    default: return op;
  }
}

Predicate Predicate::cmp_const(NodeExtractor lhs, std::uint32_t slot, CmpOp op,
                               std::string constant) {
  Predicate p;
  p.kind = Kind::kCmpConst;
  p.lhs = std::move(lhs);
  p.lhs_slot = slot;
  p.op = op;
  p.constant = std::move(constant);
  return p;
}

Predicate Predicate::cmp_nodes(NodeExtractor lhs, std::uint32_t lhs_slot,
                               CmpOp op, NodeExtractor rhs,
                               std::uint32_t rhs_slot) {
  Predicate p;
  p.kind = Kind::kCmpNodes;
  p.lhs = std::move(lhs);
  p.lhs_slot = lhs_slot;
  p.op = op;
  p.rhs = std::move(rhs);
  p.rhs_slot = rhs_slot;
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> operands) {
  Predicate p;
  p.kind = Kind::kAnd;
  p.operands = std::move(operands);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> operands) {
  Predicate p;
  p.kind = Kind::kOr;
  p.operands = std::move(operands);
  return p;
}

Predicate Predicate::negate(Predicate operand) {
  Predicate p;
  p.kind = Kind::kNot;
  p.operands.push_back(std::move(operand));
  return p;
}

namespace {

void collect_atoms(const Predicate& p, std::set<std::string>& out,
                   std::size_t& occurrences) {
  if (p.is_atom()) {
    out.insert(to_string(p));
    ++occurrences;
    return;
  }
  for (const auto& q : p.operands) collect_atoms(q, out, occurrences);
}

}  // namespace

std::size_t atom_count(const Predicate& p) {
  std::set<std::string> atoms;
  std::size_t occ = 0;
  collect_atoms(p, atoms, occ);
  return atoms.size();
}

std::size_t literal_count(const Predicate& p) {
  std::set<std::string> atoms;
  std::size_t occ = 0;
  collect_atoms(p, atoms, occ);
  return occ;
}

std::optional<std::uint32_t> max_slot(const Predicate& p) {
  std::optional<std::uint32_t> best;
  auto bump = [&](std::uint32_t s) { best = best ? std::max(*best, s) : s; };
  if (p.kind == Predicate::Kind::kCmpConst) bump(p.lhs_slot);
  if (p.kind == Predicate::Kind::kCmpNodes) {
    bump(p.lhs_slot);
    bump(p.rhs_slot);
  }
  for (const auto& q : p.operands) {
    if (auto s = max_slot(q)) bump(*s);
  }
  return best;
}

bool same_rows(const ValueTable& a, const ValueTable& b) {
  if (a.width != b.width || a.rows.size() != b.rows.size()) return false;
  auto x = a.rows;
  auto y = b.rows;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

// ---------------------------------------------------------------------------

std::string_view cell_value(const Hdt& tree, NodeId n) {
  const auto& d = tree.data(n);
  return d ? std::string_view(*d) : std::string_view();
}

std::vector<NodeId> apply_column_steps(std::span<const ColumnStep> steps,
                                       std::vector<NodeId> nodes,
                                       const Hdt& tree) {
  for (const auto& step : steps) {
    std::vector<NodeId> next;
    auto tag = tree.find_tag(step.tag);
    if (!tag) return {};
    switch (step.op) {
      case ColumnOp::kChildren:
        for (NodeId n : nodes) {
          for (NodeId c : tree.children(n)) {
            if (tree.tag_id(c) == *tag) next.push_back(c);
          }
        }
        break;
      case ColumnOp::kPChildren:
        for (NodeId n : nodes) {
          if (auto c = tree.child(n, *tag, step.pos)) next.push_back(*c);
        }
        break;
      case ColumnOp::kDescendants: {
        // A node nested in an already expanded subtree adds nothing new.
        std::uint32_t covered = 0;
        for (NodeId n : nodes) {
          if (n.value < covered) continue;
          auto d = tree.descendants(n, *tag);
          next.insert(next.end(), d.begin(), d.end());
          covered = tree.subtree_end(n).value;
        }
        break;
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    nodes = std::move(next);
    if (nodes.empty()) break;
  }
  return nodes;
}

std::vector<NodeId> eval_column(const ColumnExtractor& pi, const Hdt& tree) {
  return apply_column_steps(pi.steps, {tree.root()}, tree);
}

std::optional<NodeId> eval_node_extractor(const NodeExtractor& phi, NodeId n,
                                          const Hdt& tree) {
  std::optional<NodeId> cur = n;
  for (const auto& step : phi.steps) {
    if (step.kind == NodeStep::Kind::kParent) {
      cur = tree.parent(*cur);
    } else {
      cur = tree.child(*cur, step.tag, step.pos);
    }
    if (!cur) return std::nullopt;
  }
  return cur;
}

std::optional<double> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string_view body = s;
  if (body.front() == '+') body.remove_prefix(1);
  if (body.empty()) return std::nullopt;
  for (char c : body) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
          c == 'e' || c == 'E' || c == '+')) {
      return std::nullopt;
    }
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc() || ptr != body.data() + body.size()) return std::nullopt;
  return v;
}

bool compare_data(std::string_view a, CmpOp op, std::string_view b) {
  switch (op) {
    case CmpOp::kEq: return a == b;
    case CmpOp::kNe: return a != b;
    default: break;
  }
  auto x = parse_decimal(a);
  auto y = parse_decimal(b);
  if (!x || !y) return false;
  switch (op) {
    case CmpOp::kLt: return *x < *y;
    case CmpOp::kLe: return *x <= *y;
    case CmpOp::kGt: return *x > *y;
    case CmpOp::kGe: return *x >= *y;
    default: return false;
  }
}

bool eval_atom(const Predicate& atom, std::span<const NodeId> tuple,
               const Hdt& tree) {
  if (atom.kind == Predicate::Kind::kCmpConst) {
    auto v = eval_node_extractor(atom.lhs, tuple[atom.lhs_slot], tree);
    if (!v || !tree.is_leaf(*v)) return false;
    return compare_data(cell_value(tree, *v), atom.op, atom.constant);
  }
  auto v1 = eval_node_extractor(atom.lhs, tuple[atom.lhs_slot], tree);
  if (!v1) return false;
  auto v2 = eval_node_extractor(atom.rhs, tuple[atom.rhs_slot], tree);
  if (!v2) return false;
  const bool l1 = tree.is_leaf(*v1);
  const bool l2 = tree.is_leaf(*v2);
  if (l1 && l2) {
    return compare_data(cell_value(tree, *v1), atom.op, cell_value(tree, *v2));
  }
  if (!l1 && !l2 && atom.op == CmpOp::kEq) return *v1 == *v2;
  return false;
}

bool eval_predicate(const Predicate& p, std::span<const NodeId> tuple,
                    const Hdt& tree) {
  switch (p.kind) {
    case Predicate::Kind::kCmpConst:
    case Predicate::Kind::kCmpNodes:
      return eval_atom(p, tuple, tree);
    case Predicate::Kind::kAnd:
      for (const auto& q : p.operands) {
        if (!eval_predicate(q, tuple, tree)) return false;
      }
      return true;
    case Predicate::Kind::kOr:
      for (const auto& q : p.operands) {
        if (eval_predicate(q, tuple, tree)) return true;
      }
      return false;
    case Predicate::Kind::kNot:
      return !eval_predicate(p.operands.at(0), tuple, tree);
  }
  return false;
}

std::vector<std::vector<NodeId>> eval_columns(const TableExtractor& psi,
                                              const Hdt& tree) {
  std::vector<std::vector<NodeId>> out;
  out.reserve(psi.columns.size());
  for (const auto& c : psi.columns) out.push_back(eval_column(c, tree));
  return out;
}

NodeTable eval_table(const TableExtractor& psi, const Hdt& tree) {
  NodeTable t;
  t.width = psi.width();
  for_each_tuple(eval_columns(psi, tree), [&](std::span<const NodeId> row) {
    t.rows.emplace_back(row.begin(), row.end());
    return true;
  });
  return t;
}

ValueRow project(std::span<const NodeId> row, const Hdt& tree,
                 EvalStats* stats) {
  ValueRow out;
  out.reserve(row.size());
  for (NodeId n : row) {
    if (stats && !tree.data(n)) ++stats->internal_cells;
    out.emplace_back(cell_value(tree, n));
  }
  return out;
}

namespace {

void check_slots(const Program& program) {
  auto s = max_slot(program.predicate);
  if (program.extractor.width() == 0) {
    throw std::invalid_argument("program has no columns");
  }
  if (s && *s >= program.extractor.width()) {
    throw std::invalid_argument("predicate refers to column " +
                                std::to_string(*s) + " of a " +
                                std::to_string(program.extractor.width()) +
                                "-column table");
  }
}

}  // namespace

NodeTable eval_program_nodes(const Program& program, const Hdt& tree) {
  check_slots(program);
  NodeTable t;
  t.width = program.extractor.width();
  for_each_tuple(eval_columns(program.extractor, tree),
                 [&](std::span<const NodeId> row) {
                   if (eval_predicate(program.predicate, row, tree)) {
                     t.rows.emplace_back(row.begin(), row.end());
                   }
                   return true;
                 });
  return t;
}

ValueTable eval_program(const Program& program, const Hdt& tree,
                        EvalStats* stats) {
  check_slots(program);
  ValueTable t;
  t.width = program.extractor.width();
  for_each_tuple(eval_columns(program.extractor, tree),
                 [&](std::span<const NodeId> row) {
                   if (eval_predicate(program.predicate, row, tree)) {
                     t.rows.push_back(project(row, tree, stats));
                   }
                   return true;
                 });
  return t;
}

// ---------------------------------------------------------------------------
// Printing.

namespace {

void quote(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
}

void print(std::string& out, const ColumnExtractor& pi) {
  std::string s = "s";
  for (const auto& step : pi.steps) {
    std::string next;
    switch (step.op) {
      case ColumnOp::kChildren: next = "(children "; break;
      case ColumnOp::kPChildren: next = "(pchildren "; break;
      case ColumnOp::kDescendants: next = "(descendants "; break;
    }
    next += s;
    next += ' ';
    quote(next, step.tag);
    if (step.op == ColumnOp::kPChildren) {
      next += ' ';
      next += std::to_string(step.pos);
    }
    next += ')';
    s = std::move(next);
  }
  out += s;
}

void print(std::string& out, const NodeExtractor& phi) {
  std::string s = "(self)";
  for (const auto& step : phi.steps) {
    std::string next;
    if (step.kind == NodeStep::Kind::kParent) {
      next = "(parent " + s + ")";
    } else {
      next = "(child " + s + " ";
      quote(next, step.tag);
      next += " " + std::to_string(step.pos) + ")";
    }
    s = std::move(next);
  }
  out += s;
}

void print(std::string& out, const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::kCmpConst:
      out += "(cmpc ";
      print(out, p.lhs);
      out += ' ';
      out += std::to_string(p.lhs_slot);
      out += ' ';
      out += to_string(p.op);
      out += ' ';
      quote(out, p.constant);
      out += ')';
      return;
    case Predicate::Kind::kCmpNodes:
      out += "(cmpn ";
      print(out, p.lhs);
      out += ' ';
      out += std::to_string(p.lhs_slot);
      out += ' ';
      out += to_string(p.op);
      out += ' ';
      print(out, p.rhs);
      out += ' ';
      out += std::to_string(p.rhs_slot);
      out += ')';
      return;
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr:
    case Predicate::Kind::kNot:
      out += p.kind == Predicate::Kind::kAnd  ? "(and"
             : p.kind == Predicate::Kind::kOr ? "(or"
                                              : "(not";
      for (const auto& q : p.operands) {
        out += ' ';
        print(out, q);
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const ColumnExtractor& pi) {
  std::string out;
  print(out, pi);
  return out;
}

std::string to_string(const NodeExtractor& phi) {
  std::string out;
  print(out, phi);
  return out;
}

std::string to_string(const Predicate& p) {
  std::string out;
  print(out, p);
  return out;
}

std::string to_string(const Program& program) {
  std::string out = "(filter (cross";
  for (const auto& c : program.extractor.columns) {
    out += ' ';
    print(out, c);
  }
  out += ") ";
  print(out, program.predicate);
  out += ')';
  return out;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace {

struct Token {
  enum class Kind { kOpen, kClose, kSymbol, kString, kEnd };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { advance(); }

  ColumnExtractor column() {
    if (tok_.kind == Token::Kind::kSymbol && tok_.text == "s") {
      advance();
      return {};
    }
    expect_open();
    const Token head = expect_symbol();
    ColumnStep step;
    if (head.text == "children") {
      step.op = ColumnOp::kChildren;
    } else if (head.text == "pchildren") {
      step.op = ColumnOp::kPChildren;
    } else if (head.text == "descendants") {
      step.op = ColumnOp::kDescendants;
    } else {
      fail(head, "expected a column extractor, got '" + head.text + "'");
    }
    ColumnExtractor inner = column();
    step.tag = expect_string();
    if (step.op == ColumnOp::kPChildren) step.pos = expect_number();
    expect_close();
    inner.steps.push_back(std::move(step));
    return inner;
  }

  NodeExtractor node() {
    expect_open();
    const Token head = expect_symbol();
    if (head.text == "self") {
      expect_close();
      return {};
    }
    if (head.text != "parent" && head.text != "child") {
      fail(head, "expected a node extractor, got '" + head.text + "'");
    }
    NodeExtractor inner = node();
    if (head.text == "parent") {
      inner.steps.push_back(NodeStep::parent());
    } else {
      std::string tag = expect_string();
      inner.steps.push_back(NodeStep::child(std::move(tag), expect_number()));
    }
    expect_close();
    return inner;
  }

  Predicate predicate() {
    expect_open();
    const Token head = expect_symbol();
    if (head.text == "cmpc") {
      NodeExtractor lhs = node();
      std::uint32_t slot = expect_number();
      CmpOp op = expect_op();
      std::string c = expect_string();
      expect_close();
      return Predicate::cmp_const(std::move(lhs), slot, op, std::move(c));
    }
    if (head.text == "cmpn") {
      NodeExtractor lhs = node();
      std::uint32_t i = expect_number();
      CmpOp op = expect_op();
      NodeExtractor rhs = node();
      std::uint32_t j = expect_number();
      expect_close();
      return Predicate::cmp_nodes(std::move(lhs), i, op, std::move(rhs), j);
    }
    if (head.text == "and" || head.text == "or") {
      std::vector<Predicate> ops;
      while (tok_.kind != Token::Kind::kClose) ops.push_back(predicate());
      expect_close();
      return head.text == "and" ? Predicate::all_of(std::move(ops))
                                : Predicate::any_of(std::move(ops));
    }
    if (head.text == "not") {
      Predicate inner = predicate();
      expect_close();
      return Predicate::negate(std::move(inner));
    }
    fail(head, "expected a predicate, got '" + head.text + "'");
  }

  Program program() {
    const Token start = tok_;
    expect_open();
    expect_keyword("filter");
    expect_open();
    expect_keyword("cross");
    Program p;
    while (tok_.kind != Token::Kind::kClose) p.extractor.columns.push_back(column());
    if (p.extractor.columns.empty()) fail(tok_, "cross needs at least one column");
    expect_close();
    p.predicate = predicate();
    expect_close();
    if (auto s = max_slot(p.predicate); s && *s >= p.extractor.width()) {
      fail(start, "predicate refers to column " + std::to_string(*s) +
                      " but the table has " +
                      std::to_string(p.extractor.width()));
    }
    return p;
  }

  void finish() {
    if (tok_.kind != Token::Kind::kEnd) fail(tok_, "trailing input");
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& what) const {
    throw ParseError("program: " + what, at.line, at.column);
  }

  void advance() {
    for (;;) {
      while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) {
        bump();
      }
      if (i_ < text_.size() && text_[i_] == ';') {
        while (i_ < text_.size() && text_[i_] != '\n') bump();
        continue;
      }
      break;
    }
    tok_ = Token{Token::Kind::kEnd, {}, line_, col_};
    if (i_ >= text_.size()) return;
    const char c = text_[i_];
    if (c == '(') {
      tok_.kind = Token::Kind::kOpen;
      bump();
    } else if (c == ')') {
      tok_.kind = Token::Kind::kClose;
      bump();
    } else if (c == '"') {
      tok_.kind = Token::Kind::kString;
      bump();
      for (;;) {
        if (i_ >= text_.size()) fail(tok_, "unterminated string");
        char d = text_[i_];
        bump();
        if (d == '"') break;
        if (d == '\\') {
          if (i_ >= text_.size()) fail(tok_, "unterminated string");
          char e = text_[i_];
          bump();
          switch (e) {
            case 'n': tok_.text += '\n'; break;
            case 't': tok_.text += '\t'; break;
            case 'r': tok_.text += '\r'; break;
            case '"': tok_.text += '"'; break;
            case '\\': tok_.text += '\\'; break;
            default: fail(tok_, std::string("unknown escape \\") + e);
          }
        } else {
          tok_.text += d;
        }
      }
    } else {
      tok_.kind = Token::Kind::kSymbol;
      while (i_ < text_.size()) {
        char d = text_[i_];
        if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' ||
            d == '"' || d == ';') {
          break;
        }
        tok_.text += d;
        bump();
      }
    }
  }

  void bump() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void expect_open() {
    if (tok_.kind != Token::Kind::kOpen) fail(tok_, "expected '('");
    advance();
  }
  void expect_close() {
    if (tok_.kind != Token::Kind::kClose) fail(tok_, "expected ')'");
    advance();
  }
  Token expect_symbol() {
    if (tok_.kind != Token::Kind::kSymbol) fail(tok_, "expected a keyword");
    Token t = tok_;
    advance();
    return t;
  }
  void expect_keyword(std::string_view kw) {
    Token t = expect_symbol();
    if (t.text != kw) fail(t, "expected '" + std::string(kw) + "'");
  }
  std::string expect_string() {
    if (tok_.kind != Token::Kind::kString) fail(tok_, "expected a quoted string");
    std::string s = std::move(tok_.text);
    advance();
    return s;
  }
  std::uint32_t expect_number() {
    if (tok_.kind != Token::Kind::kSymbol) fail(tok_, "expected a number");
    std::uint32_t v = 0;
    const auto& s = tok_.text;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(tok_, "expected a non-negative integer, got '" + s + "'");
    }
    advance();
    return v;
  }
  CmpOp expect_op() {
    Token t = expect_symbol();
    for (CmpOp op : kAllCmpOps) {
      if (t.text == to_string(op)) return op;
    }
    fail(t, "unknown comparison operator '" + t.text + "'");
  }

  std::string_view text_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  Token tok_{Token::Kind::kEnd, {}, 1, 1};
};

}  // namespace

ColumnExtractor parse_column_extractor(std::string_view text) {
  Parser p(text);
  auto r = p.column();
  p.finish();
  return r;
}

NodeExtractor parse_node_extractor(std::string_view text) {
  Parser p(text);
  auto r = p.node();
  p.finish();
  return r;
}

Predicate parse_predicate(std::string_view text) {
  Parser p(text);
  auto r = p.predicate();
  p.finish();
  return r;
}

Program parse_program(std::string_view text) {
  Parser p(text);
  auto r = p.program();
  p.finish();
  return r;
}

}  // namespace treeshred
