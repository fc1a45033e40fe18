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

#include <algorithm>
#include <random>
#include <string>

#include "doctest.h"
#include "support/oracles.hpp"
#include "treeshred/column_learner.hpp"

using namespace treeshred;

namespace {

Hdt load(const char* name) {
  std::string path = std::string(TREESHRED_FIXTURES "/") + name;
  return load_document(path, guess_format(path));
}


bool shortlex_less(const std::vector<ColumnStep>& a, const std::vector<ColumnStep>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), symbol_less);
}

bool contains(const std::vector<ColumnExtractor>& list, std::string_view text) {
  ColumnExtractor pi = parse_column_extractor(text);
  return std::find(list.begin(), list.end(), pi) != list.end();
}

}  // namespace

TEST_CASE("motivating example columns") {
  Hdt t = load("friends.xml");
  std::vector<std::string> names{"Alice", "Bob", "Carol", "Dave"};
  std::vector<std::string> friends{"Bob", "Alice", "Dave", "Carol"};
  std::vector<std::string> years{"3", "4", "1", "2"};

  ExtractorDfa a = construct_dfa(t, names);
  CHECK(a.accepts(parse_column_extractor(R"((pchildren (children s "Person") "name" 0))")));
  auto first = enumerate_language(a, 64, 8);
  REQUIRE_FALSE(first.empty());
  // The single descendants step is the shortest extractor for the names.
  CHECK(to_string(first[0]) == R"((descendants s "name"))");

  ExtractorDfa y = construct_dfa(t, years);
  auto words = enumerate_language(y, 10000, 4);
  CHECK(contains(words, R"((pchildren (children (pchildren (children s "Person") "Friendship" 0) "Friend") "years" 0))"));
  CHECK(contains(words, R"((pchildren (children (pchildren (children s "Person") "Friendship" 0) "Friend") "fid" 0))"));
  CHECK(contains(words, R"((pchildren (pchildren (pchildren (children s "Person") "Friendship" 0) "Friend" 0) "years" 0))"));
  CHECK(contains(words, R"((pchildren (children s "Person") "id" 0))"));

  ExtractorDfa f = construct_dfa(t, friends);
  CHECK(f.accepts(parse_column_extractor(R"((pchildren (children s "Person") "name" 0))")));

  SUBCASE("strict multiset coverage needs a node per repeated value") {
    std::vector<std::string> repeated{"Alice", "Alice"};
    auto pi = parse_column_extractor(R"((pchildren (children s "Person") "name" 0))");
    CHECK(construct_dfa(t, repeated).accepts(pi));
    CHECK_FALSE(construct_dfa(t, repeated, Coverage::kValueMultiset).accepts(pi));
  }
}

TEST_CASE("nested objects column") {
  Hdt t = load("objects.xml");
  ExtractorDfa a = construct_dfa(t, std::vector<std::string>{"A", "A", "D"});
  CHECK(a.accepts(parse_column_extractor(R"((pchildren (descendants s "object") "text" 0))")));
  auto reps = representatives(a, 64, 8);
  const bool found = contains(reps, R"((pchildren (descendants s "object") "text" 0))") ||
                     contains(reps, R"((descendants s "text"))");
  CHECK(found);
}

TEST_CASE("identity extractor") {
  Hdt t = parse_xml("<v>42</v>");
  ExtractorDfa a = construct_dfa(t, std::vector<std::string>{"42"});
  CHECK(a.is_final(a.initial()));
  auto words = enumerate_language(a, 5, 3);
  REQUIRE_FALSE(words.empty());
  CHECK(words[0].steps.empty());
  auto reps = representatives(a, 5, 3);
  REQUIRE_FALSE(reps.empty());
  CHECK(reps[0].steps.empty());
}

TEST_CASE("construction is deterministic") {
  Hdt t = load("friends.xml");
  std::vector<std::string> target{"Alice"};
  CHECK(dump(construct_dfa(t, target), &t) == dump(construct_dfa(t, target), &t));
  CHECK(dump(construct_dfa(t, target)).find("state 0") != std::string::npos);
}

TEST_CASE("empty language and intersection identities") {
  Hdt t = load("friends.xml");
  ExtractorDfa none = construct_dfa(t, std::vector<std::string>{"Zed"});
  CHECK(none.empty_language());
  CHECK(enumerate_language(none, 10, 8).empty());
  ExtractorDfa a = construct_dfa(t, std::vector<std::string>{"Bob"});
  CHECK(intersect(a, none).empty_language());
  CHECK(enumerate_language(intersect(a, a), 100000, 4) == enumerate_language(a, 100000, 4));
}

TEST_CASE("intersection equals consistency with both examples") {
  Hdt t1 = load("friends.xml");
  Hdt t2 = parse_xml(R"(<Persons>
      <Person id="7"><name>Dan</name>
        <Friendship><Friend fid="8" years="5"/></Friendship></Person>
      <Person id="8"><name>Eve</name><Friendship/></Person>
      <Extra><name>Dan</name></Extra></Persons>)");
  std::vector<std::string> v1{"Alice", "Bob"};
  std::vector<std::string> v2{"Dan"};
  ExtractorDfa both = intersect(construct_dfa(t1, v1), construct_dfa(t2, v2));

  auto tags = t1.tags();
  for (const auto& tg : t2.tags()) {
    if (std::find(tags.begin(), tags.end(), tg) == tags.end()) tags.push_back(tg);
  }
  auto alphabet = oracle::grammar_alphabet(tags, 1);
  std::vector<std::vector<ColumnStep>> expect;
  oracle::for_each_word(t1, alphabet, 3, [&](const auto& word, const auto& nodes) {
    if (!oracle::covers(t1, nodes, v1, false)) return;
    auto n2 = oracle::eval_column(ColumnExtractor{word}, t2);
    if (oracle::covers(t2, n2, v2, false)) expect.push_back(word);
  });
  std::sort(expect.begin(), expect.end(), shortlex_less);
  auto got = enumerate_language(both, 1000000, 3);
  REQUIRE(got.size() == expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].steps == expect[i]);
  CHECK_FALSE(got.empty());
}

TEST_CASE("automaton language equals brute-force enumeration") {
  std::mt19937_64 rng(99);
  const std::vector<std::string> tags{"a", "b", "c", "r", "zz"};
  const auto alphabet = oracle::grammar_alphabet(tags, 3);
  for (int iter = 0; iter < 40; ++iter) {
    Hdt t = oracle::random_tree(rng, 20, 4);
    auto col = oracle::eval_column(oracle::random_column(rng, 3), t);
    std::vector<std::string> target;
    if (col.empty() || iter % 5 == 0) {
      target.push_back(std::to_string(iter % 5));
    } else {
      for (NodeId n : col) {
        if (rng() % 2) target.push_back(t.data(n).value_or(""));
      }
      if (target.empty()) target.push_back(t.data(col[0]).value_or(""));
    }
    for (bool multiset : {false, true}) {
      ExtractorDfa dfa = construct_dfa(
          t, target, multiset ? Coverage::kValueMultiset : Coverage::kValueSet);
      std::vector<std::vector<ColumnStep>> expect;
      oracle::for_each_word(t, alphabet, 3, [&](const auto& word, const auto& nodes) {
        const bool ok = oracle::covers(t, nodes, target, multiset);
        CHECK(dfa.accepts(ColumnExtractor{word}) == ok);
        if (ok) expect.push_back(word);
      });
      std::sort(expect.begin(), expect.end(), shortlex_less);
      auto got = enumerate_language(dfa, 1000000, 3);
      REQUIRE(got.size() == expect.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].steps == expect[i]);
    }
  }
}

TEST_CASE("representatives cover every reachable final node set") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 30; ++iter) {
    Hdt t = oracle::random_tree(rng, 25, 4);
    std::vector<std::string> target{t.data(t.nodes_with_tag(t.tag_id(NodeId{
                                        static_cast<std::uint32_t>(t.size() - 1)}))[0])
                                        .value_or("")};
    ExtractorDfa dfa = construct_dfa(t, target);
    auto reps = representatives(dfa, 1000000, 6);
    std::set<std::vector<NodeId>> rep_sets;
    for (const auto& r : reps) {
      CHECK(rep_sets.insert(eval_column(r, t)).second);
    }
    for (const auto& w : enumerate_language(dfa, 2000, 4)) {
      CHECK(rep_sets.contains(eval_column(w, t)));
    }
  }
}
