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

#include <random>
#include <string>

#include "doctest.h"
#include "support/oracles.hpp"
#include "treeshred/csv.hpp"
#include "treeshred/dsl.hpp"

using namespace treeshred;

namespace {

Hdt friends() { return load_document(TREESHRED_FIXTURES "/friends.xml", DocumentFormat::kXml); }
Program friends_program() { return parse_program(read_file(TREESHRED_FIXTURES "/friends_program.txt")); }

}  // namespace

TEST_CASE("column extractors") {
  Hdt t = friends();
  SUBCASE("person names") {
    auto names = eval_column(parse_column_extractor(
                                 R"((pchildren (children s "Person") "name" 0))"),
                             t);
    REQUIRE(names.size() == 4);
    CHECK(cell_value(t, names[0]) == "Alice");
    CHECK(cell_value(t, names[1]) == "Bob");
    CHECK(cell_value(t, names[3]) == "Dave");
  }
  SUBCASE("identity") {
    CHECK(eval_column(ColumnExtractor{}, t) == std::vector<NodeId>{t.root()});
  }
  SUBCASE("absent tag") {
    CHECK(eval_column(parse_column_extractor(R"((children s "nope"))"), t).empty());
  }
  SUBCASE("descendants match a preorder walk") {
    Hdt x = load_document(TREESHRED_FIXTURES "/objects.xml", DocumentFormat::kXml);
    auto got = eval_column(parse_column_extractor(R"((descendants s "object"))"), x);
    CHECK(got.size() == 7);
    CHECK(got == oracle::descendants(x, x.root(), "object"));
  }
}

TEST_CASE("node extractors") {
  Hdt t = friends();
  NodeId person = t.children(t.root(), "Person")[0];
  NodeId name = *t.child(person, "name", 0);
  CHECK(eval_node_extractor(NodeExtractor{}, name, t) == name);
  CHECK_FALSE(eval_node_extractor(parse_node_extractor("(parent (self))"), t.root(), t));
  auto id = eval_node_extractor(
      parse_node_extractor(R"((child (parent (self)) "id" 0))"), name, t);
  REQUIRE(id.has_value());
  CHECK(t.tag(*id) == "id");
  CHECK(t.parent(*id) == person);
  CHECK_FALSE(eval_node_extractor(
      parse_node_extractor(R"((child (parent (self)) "id" 1))"), name, t));
}

TEST_CASE("motivating program") {
  Hdt t = friends();
  Program p = friends_program();
  ValueTable out = eval_program(p, t);
  CsvTable want = load_csv(TREESHRED_FIXTURES "/friends_expected.csv");
  CHECK(same_rows(out, want.table));
  CHECK(atom_count(p.predicate) == 2);

  NodeId alice = t.children(t.root(), "Person")[0];
  NodeId alice_name = *t.child(alice, "name", 0);
  NodeId friend0 = *t.child(*t.child(alice, "Friendship", 0), "Friend", 0);
  NodeId years = *t.child(friend0, "years", 0);
  const NodeRow spurious{alice_name, alice_name, years};

  SUBCASE("spurious tuple is in the intermediate table and filtered out") {
    NodeTable mid = eval_table(p.extractor, t);
    CHECK(std::find(mid.rows.begin(), mid.rows.end(), spurious) != mid.rows.end());
    CHECK(mid.rows.size() == 4 * 4 * 4);
    const Predicate& phi2 = p.predicate.operands[1];
    CHECK_FALSE(eval_predicate(phi2, spurious, t));
    CHECK(eval_predicate(p.predicate.operands[0], spurious, t));
  }
  SUBCASE("rows come out in cross-product order") {
    std::vector<ValueRow> expect = {{"Alice", "Bob", "3"},
                                    {"Bob", "Alice", "4"},
                                    {"Carol", "Dave", "1"},
                                    {"Dave", "Carol", "2"}};
    CHECK(out.rows == expect);
  }
}

TEST_CASE("nested objects program") {
  Hdt t = load_document(TREESHRED_FIXTURES "/objects.xml", DocumentFormat::kXml);
  Program parsed = parse_program(read_file(TREESHRED_FIXTURES "/objects_program.txt"));
  ColumnExtractor pi;
  pi.steps = {{ColumnOp::kDescendants, "object", 0}, {ColumnOp::kPChildren, "text", 0}};
  NodeExtractor id_of{{NodeStep::parent(), NodeStep::child("id", 0)}};
  NodeExtractor up1{{NodeStep::parent()}};
  NodeExtractor up2{{NodeStep::parent(), NodeStep::parent()}};
  Program built{TableExtractor{{pi, pi}},
                Predicate::all_of({Predicate::cmp_const(id_of, 0, CmpOp::kLt, "20"),
                                   Predicate::cmp_nodes(up1, 0, CmpOp::kEq, up2, 1)})};
  CHECK(parsed == built);
  ValueTable a = eval_program(parsed, t);
  ValueTable b = eval_program(built, t);
  CHECK(a.rows == b.rows);
  CHECK(same_rows(a, load_csv(TREESHRED_FIXTURES "/objects_expected.csv").table));
}

TEST_CASE("predicate semantics") {
  Hdt t = friends();
  Predicate p = Predicate::cmp_const(NodeExtractor{}, 0, CmpOp::kEq, "Alice");
  Predicate contradiction = Predicate::all_of({p, Predicate::negate(p)});
  for (std::uint32_t i = 0; i < t.size(); ++i) {
    NodeRow row{NodeId{i}};
    CHECK_FALSE(eval_predicate(contradiction, row, t));
  }
  CHECK(eval_predicate(Predicate::always(), NodeRow{t.root()}, t));
  CHECK_FALSE(eval_predicate(Predicate::never(), NodeRow{t.root()}, t));

  SUBCASE("comparison operators") {
    CHECK(compare_data("3", CmpOp::kLt, "20"));
    CHECK_FALSE(compare_data("3", CmpOp::kLt, "abc"));
    CHECK(compare_data("abc", CmpOp::kNe, "abd"));
    CHECK(compare_data("1.5", CmpOp::kGe, "1.50"));
    CHECK_FALSE(compare_data("1.5", CmpOp::kEq, "1.50"));
    CHECK(compare_data("-2", CmpOp::kLe, "+1"));
    CHECK_FALSE(compare_data("", CmpOp::kLe, ""));
    CHECK_FALSE(compare_data("inf", CmpOp::kGt, "1"));
  }

  SUBCASE("node comparisons follow the leaf/internal case split") {
    Hdt small = parse_xml(R"(<r><a><b>1</b><c>1</c></a><a><b>2</b></a><d/></r>)");
    REQUIRE(small.size() <= 10);
    NodeExtractor self;
    for (CmpOp op : kAllCmpOps) {
      Predicate atom = Predicate::cmp_nodes(self, 0, op, self, 1);
      for (std::uint32_t i = 0; i < small.size(); ++i) {
        for (std::uint32_t j = 0; j < small.size(); ++j) {
          std::vector<NodeId> row{NodeId{i}, NodeId{j}};
          CHECK(eval_predicate(atom, row, small) ==
                oracle::eval_predicate(atom, row, small));
          if (op == CmpOp::kEq && !small.is_leaf(NodeId{i}) &&
              !small.is_leaf(NodeId{j})) {
            CHECK(eval_predicate(atom, row, small) == (i == j));
          }
        }
      }
    }
  }
}

TEST_CASE("false predicate gives an empty table") {
  Program p = friends_program();
  p.predicate = Predicate::negate(Predicate::always());
  CHECK(eval_program(p, friends()).rows.empty());
}

TEST_CASE("internal nodes project to the empty string") {
  Hdt t = friends();
  Program p{TableExtractor{{parse_column_extractor(R"((children s "Person"))")}},
            Predicate::always()};
  EvalStats stats;
  ValueTable out = eval_program(p, t, &stats);
  CHECK(out.rows.size() == 4);
  CHECK(out.rows[0][0].empty());
  CHECK(stats.internal_cells == 4);
}

TEST_CASE("text round trip") {
  Program p = friends_program();
  std::string text = to_string(p);
  CHECK(parse_program(text) == p);
  CHECK(to_string(parse_program(text)) == text);

  Predicate tricky = Predicate::cmp_const(NodeExtractor{}, 0, CmpOp::kNe,
                                          "a \"quoted\"\\ line\nbreak");
  CHECK(parse_predicate(to_string(tricky)) == tricky);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Program q;
    const std::uint32_t k = std::uniform_int_distribution<std::uint32_t>(1, 3)(rng);
    for (std::uint32_t c = 0; c < k; ++c) {
      q.extractor.columns.push_back(oracle::random_column(rng, 4));
    }
    q.predicate = oracle::random_predicate(rng, k, 3);
    CHECK(parse_program(to_string(q)) == q);
  }
}

TEST_CASE("malformed program text") {
  auto bad = [](std::string_view text) {
    CHECK_THROWS_AS(parse_program(text), ParseError);
  };
  bad("");
  bad("(filter (cross) (and))");
  bad("(filter (cross s) (and)");
  bad("(filter (cross s) (cmpc (self) 1 = \"x\"))");
  bad("(filter (cross s) (cmpc (self) 0 ~ \"x\"))");
  bad("(filter (cross (children s tag)) (and))");
  bad("(filter (cross s) (and)) extra");
  bad("(filter (cross (pchildren s \"a\" -1)) (and))");
  try {
    parse_program("(filter (cross s)\n  (bogus))");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 4);
  }
}

TEST_CASE("random programs agree with the reference evaluator") {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 400; ++iter) {
    Hdt t = oracle::random_tree(rng, 30, 4);
    ColumnExtractor pi = oracle::random_column(rng, 4);
    CHECK(eval_column(pi, t) == oracle::eval_column(pi, t));

    Program p;
    const std::uint32_t k = std::uniform_int_distribution<std::uint32_t>(1, 3)(rng);
    for (std::uint32_t c = 0; c < k; ++c) {
      p.extractor.columns.push_back(oracle::random_column(rng, 3));
    }
    p.predicate = oracle::random_predicate(rng, k, 3);
    ValueTable out = eval_program(p, t);
    CHECK(oracle::sorted_rows(out) == oracle::eval_program(p, t));

    // Filtering only removes rows from the projected cross product.
    Program unfiltered{p.extractor, Predicate::always()};
    auto all = oracle::sorted_rows(eval_program(unfiltered, t));
    auto kept = oracle::sorted_rows(out);
    CHECK(std::includes(all.begin(), all.end(), kept.begin(), kept.end()));
  }
}

TEST_CASE("csv") {
  CsvTable c = parse_csv("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n,\n");
  CHECK(c.header == std::vector<std::string>{"a", "b"});
  REQUIRE(c.table.rows.size() == 2);
  CHECK(c.table.rows[0] == ValueRow{"x,1", "say \"hi\""});
  CHECK(c.table.rows[1] == ValueRow{"", ""});
  CHECK(render_csv(c.header, c.table) ==
        "a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n,\r\n");
  CHECK_THROWS_AS(parse_csv("a,b\r\n1\r\n"), CsvError);
  CHECK_THROWS_AS(parse_csv("a\r\n\"open\r\n"), CsvError);
  CHECK_THROWS_AS(parse_csv(""), CsvError);
}
