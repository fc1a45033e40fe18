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

// Acceptance suite: one PASS/FAIL line per criterion. Thresholds are pinned
// below; the process exits nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "treeshred/column_learner.hpp"
#include "treeshred/csv.hpp"
#include "treeshred/db_migrator.hpp"
#include "treeshred/optimizer.hpp"
#include "treeshred/predicate_learner.hpp"
#include "treeshred/synthesizer.hpp"

using namespace treeshred;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr double kMotivatingSecs = 5.0;
constexpr std::size_t kMotivatingAtoms = 2;
constexpr std::size_t kExample4CoverSize = 3;
constexpr std::size_t kAutomatonInstances = 200;
constexpr std::size_t kAutomatonMaxNodes = 30;
constexpr std::size_t kAutomatonDepth = 4;
constexpr std::size_t kSoundnessPairs = 100;
constexpr std::size_t kRandomPlanPairs = 200;
constexpr std::size_t kAdversarialMinNodes = 100000;
constexpr std::size_t kAdversarialMinTuples = 1000000;
constexpr std::size_t kAdversarialMaxRows = 1000;
constexpr double kAdversarialSecs = 10.0;
constexpr std::size_t kAdversarialMaxBuffer = 10000;
constexpr std::size_t kScaledElements = 100000;
constexpr double kScaledSecs = 60.0;

const std::string kFix = TREESHRED_FIXTURES;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Cli {
  int code;
  std::string out, err;
};

Cli cli_call(std::vector<std::string> args) {
  args.insert(args.begin(), "treeshred");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("treeshred-acceptance-" +
                                              std::to_string(std::random_device{}()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (!line.starts_with(";")) out += line + "\n";
  }
  return out;
}

// 1. Motivating example through the synth command.
Outcome motivating() {
  const auto prog = (scratch() / "friends_program.txt").string();
  const auto t0 = Clock::now();
  Cli s = cli_call({"--mode", "synth", "--input", kFix + "/friends.xml", "--examples",
                    kFix + "/friends_expected.csv", "--out", prog});
  const double secs = since(t0);
  if (s.code != cli::kOk) return {false, "synth exit " + std::to_string(s.code) + ": " + s.err};
  Program p = parse_program(strip_comments(read_file(prog)));
  Hdt t = load_document(kFix + "/friends.xml", DocumentFormat::kXml);
  const bool exact =
      same_rows(eval_program(p, t), load_csv(kFix + "/friends_expected.csv").table);
  const std::size_t atoms = atom_count(p.predicate);
  std::ostringstream d;
  d << atoms << " atoms, table " << (exact ? "exact" : "differs") << ", " << secs << " s";
  return {atoms == kMotivatingAtoms && exact && secs < kMotivatingSecs, d.str()};
}

// 2. Nested objects: the learned predicate agrees with the reference one on
// every tuple of the learned table extractor.
Outcome nested_objects() {
  Hdt t = load_document(kFix + "/objects.xml", DocumentFormat::kXml);
  Example ex{&t, load_csv(kFix + "/objects_expected.csv").table};
  auto p = synthesize(std::span(&ex, 1), SynthConfig{});
  if (!p) return {false, "no program"};
  Program reference = parse_program(read_file(kFix + "/objects_program.txt"));
  std::size_t tuples = 0, agree = 0;
  for_each_tuple(eval_columns(p->extractor, t), [&](std::span<const NodeId> row) {
    ++tuples;
    if (eval_predicate(p->predicate, row, t) == eval_predicate(reference.predicate, row, t)) {
      ++agree;
    }
    return true;
  });
  const bool exact = same_rows(eval_program(*p, t), ex.table);
  std::ostringstream d;
  d << agree << "/" << tuples << " tuples agree, table " << (exact ? "exact" : "differs");
  return {tuples > 0 && agree == tuples && exact, d.str()};
}

// 3. The worked cover and minimization example.
Outcome worked_cover() {
  const bool rows[6][7] = {
      {true, true, false, false, true, true, false},
      {false, true, true, true, true, false, true},
      {false, true, true, true, false, false, false},
      {false, false, true, true, false, false, false},
      {false, true, true, true, false, false, true},
      {true, false, true, false, false, false, true},
  };
  CoverProblem p;
  p.num_atoms = 7;
  p.weights.assign(7, 0);
  for (int r = 0; r < 6; ++r) {
    Bits b(7);
    for (int k = 0; k < 7; ++k) b[k] = rows[r][k];
    (r < 3 ? p.positive_values : p.negative_values).push_back(b);
  }
  auto cover = find_min_cover(p);
  if (!cover) return {false, "no cover"};
  // Powerset oracle.
  std::size_t best = 99;
  for (std::uint32_t mask = 0; mask < 128; ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < 3 && ok; ++i) {
      for (std::size_t j = 0; j < 3 && ok; ++j) {
        bool hit = false;
        for (std::size_t k = 0; k < 7; ++k) hit = hit || ((mask >> k & 1) && p.a(i, j, k));
        ok = hit;
      }
    }
    if (ok) best = std::min<std::size_t>(best, std::popcount(mask));
  }
  TruthTable tt;
  tt.num_vars = cover->atoms.size();
  for (int r = 0; r < 6; ++r) {
    std::uint64_t m = 0;
    for (std::size_t v = 0; v < cover->atoms.size(); ++v) {
      if (rows[r][cover->atoms[v]]) m |= std::uint64_t{1} << v;
    }
    (r < 3 ? tt.positives : tt.negatives).push_back(m);
  }
  auto dnf = minimize_dnf(tt);
  if (!dnf) return {false, "inconsistent truth table"};
  // Reference phi5 | (phi2 & !phi7), written over the original atoms.
  auto reference = [&](int r) { return rows[r][4] || (rows[r][1] && !rows[r][6]); };
  const std::size_t reference_literals = 3;
  bool agree = true;
  for (int r = 0; r < 6; ++r) {
    const std::uint64_t m = r < 3 ? tt.positives[r] : tt.negatives[r - 3];
    agree = agree && dnf->eval(m) == reference(r) && reference(r) == (r < 3);
  }
  std::ostringstream d;
  d << "cover {";
  for (std::size_t i = 0; i < cover->atoms.size(); ++i) {
    d << (i ? "," : "") << "phi" << cover->atoms[i] + 1;
  }
  d << "} size " << cover->atoms.size() << " (powerset optimum " << best << "), formula "
    << to_string(*dnf) << " with " << dnf->literals() << " literals (reference "
    << reference_literals << "), rows " << (agree ? "agree" : "differ");
  return {cover->atoms.size() == kExample4CoverSize && best == kExample4CoverSize && agree &&
              dnf->literals() == reference_literals,
          d.str()};
}

// 4. Automaton completeness and soundness against brute-force enumeration.
Outcome automaton_vs_brute_force() {
  std::mt19937_64 rng(20260101);
  std::size_t instances = 0, words = 0, failures = 0;
  for (std::size_t iter = 0; instances < kAutomatonInstances; ++iter) {
    Hdt t = oracle::random_tree(rng, kAutomatonMaxNodes, 4);
    auto col = oracle::eval_column(oracle::random_column(rng, 3), t);
    if (col.empty()) continue;
    std::vector<std::string> target;
    for (NodeId n : col) {
      if (rng() % 2) target.push_back(t.data(n).value_or(""));
    }
    if (target.empty()) target.push_back(t.data(col[0]).value_or(""));
    std::uint32_t max_pos = 0;
    for (std::uint32_t n = 0; n < t.size(); ++n) max_pos = std::max(max_pos, t.pos(NodeId{n}));
    const auto alphabet = oracle::grammar_alphabet({"a", "b", "c", "r", "zz"}, max_pos + 1);
    const bool multiset = iter % 4 == 3;
    const Coverage cov = multiset ? Coverage::kValueMultiset : Coverage::kValueSet;
    ExtractorDfa dfa = construct_dfa(t, target, cov);
    std::set<std::vector<ColumnStep>> accepted;
    for (const auto& pi : enumerate_language(dfa, 100000000, kAutomatonDepth)) {
      accepted.insert(pi.steps);
      if (!oracle::covers(t, oracle::eval_column(pi, t), target, multiset)) ++failures;
    }
    std::size_t covering = 0;
    oracle::for_each_word(t, alphabet, kAutomatonDepth, [&](const auto& word, const auto& nodes) {
      ++words;
      if (!oracle::covers(t, nodes, target, multiset)) return;
      ++covering;
      if (!dfa.accepts(ColumnExtractor{word}) || !accepted.contains(word)) ++failures;
    });
    if (covering != accepted.size()) ++failures;
    ++instances;
  }
  std::ostringstream d;
  d << instances << " instances, " << words << " extractors checked, " << failures
    << " mismatches";
  return {failures == 0, d.str()};
}

// 5. Soundness on generated tasks.
Outcome soundness() {
  std::mt19937_64 rng(31337);
  std::size_t pairs = 0, sound = 0, attempts = 0;
  std::string first_failure;
  while (pairs < kSoundnessPairs) {
    ++attempts;
    auto task = oracle::random_task(rng, 1 + rng() % 2, 24);
    if (!task) continue;
    ++pairs;
    std::vector<Example> ex;
    for (std::size_t e = 0; e < task->trees.size(); ++e) {
      ex.push_back(Example{&task->trees[e], task->tables[e]});
    }
    SynthReport rep;
    auto p = synthesize(ex, SynthConfig{}, &rep);
    bool ok = p && verify(*p, ex);
    if (ok) {
      for (std::size_t e = 0; e < ex.size(); ++e) {
        ok = ok && oracle::eval_program(*p, task->trees[e]) == task->tables[e].rows;
      }
    }
    if (ok) ++sound;
    else if (first_failure.empty()) first_failure = to_string(task->truth) + ": " + rep.message;
  }
  std::ostringstream d;
  d << sound << "/" << pairs << " verified (" << attempts << " generated)";
  if (!first_failure.empty()) d << "; first failure " << first_failure;
  return {sound == pairs, d.str()};
}

// 6. Plans against the reference evaluator, and the adversarial tree.
Outcome optimizer() {
  std::size_t checked = 0, mismatches = 0;
  auto check = [&](const Program& p, const Hdt& t) {
    const Hdt* trees[] = {&t};
    ++checked;
    if (oracle::sorted_rows(run_plan(optimize(p, trees), t)) != oracle::eval_program(p, t)) {
      ++mismatches;
    }
  };
  Hdt friends = load_document(kFix + "/friends.xml", DocumentFormat::kXml);
  Hdt friendsj = load_document(kFix + "/friends.json", DocumentFormat::kJson);
  Hdt objects = load_document(kFix + "/objects.xml", DocumentFormat::kXml);
  Hdt people = load_document(kFix + "/migrate/people.xml", DocumentFormat::kXml);
  Program p1 = parse_program(read_file(kFix + "/friends_program.txt"));
  Program p12 = parse_program(read_file(kFix + "/objects_program.txt"));
  for (const Hdt* t : {&friends, &friendsj, &objects, &people}) {
    check(p1, *t);
    check(p12, *t);
  }
  Example e1{&friends, load_csv(kFix + "/friends_expected.csv").table};
  Example e12{&objects, load_csv(kFix + "/objects_expected.csv").table};
  for (const Example* e : {&e1, &e12}) {
    auto p = synthesize(std::span(e, 1), SynthConfig{});
    if (p) check(*p, *e->tree);
    else ++mismatches;
  }
  std::mt19937_64 rng(8080);
  for (std::size_t i = 0; i < kRandomPlanPairs; ++i) {
    Hdt t = oracle::random_tree(rng, 30, 4);
    check(gen::random_join_program(rng), t);
  }

  Hdt adv = gen::adversarial_tree(2400, 20);
  Program ap = parse_program(gen::kAdversarialProgram);
  std::size_t product = 1;
  for (const auto& c : eval_columns(ap.extractor, adv)) product *= c.size();
  const auto t0 = Clock::now();
  const Hdt* trees[] = {&adv};
  ExecStats stats;
  ValueTable rows = run_plan(optimize(ap, trees), adv, &stats);
  const double secs = since(t0);
  ValueTable want{2, {}};
  for (std::size_t v = 0; v < kAdversarialMaxRows; ++v) {
    want.rows.push_back({std::to_string(v / 20), std::to_string(v)});
  }
  const bool exact = same_rows(rows, want);
  std::ostringstream d;
  d << checked << " differential runs, " << mismatches << " mismatches; adversarial "
    << adv.size() << " nodes, " << product << " tuples unfiltered, " << rows.rows.size()
    << " rows " << (exact ? "exact" : "differ") << ", " << secs << " s, peak buffer "
    << stats.peak_buffer;
  return {mismatches == 0 && checked >= kRandomPlanPairs && adv.size() >= kAdversarialMinNodes &&
              product >= kAdversarialMinTuples && rows.rows.size() <= kAdversarialMaxRows &&
              exact && secs < kAdversarialSecs && stats.peak_buffer < kAdversarialMaxBuffer,
          d.str()};
}

// 7. The run command on a generated document of the motivating schema.
Outcome scaled() {
  const std::size_t persons = kScaledElements / 4;  // four elements per person
  const std::string xml = gen::persons_xml(persons);
  const auto doc = (scratch() / "persons.xml").string();
  std::ofstream(doc, std::ios::binary) << xml;
  const Hdt t = parse_xml(xml);
  std::size_t elements = 0;
  for (std::size_t i = 0; i + 1 < xml.size(); ++i) {
    if (xml[i] == '<' && xml[i + 1] != '/') ++elements;
  }
  const auto out = (scratch() / "persons.csv").string();
  const auto t0 = Clock::now();
  Cli r = cli_call({"--mode", "run", "--program", kFix + "/friends_program.txt", "--input", doc,
                    "--out", out, "--columns", "Person,Friend-with,years"});
  const double secs = since(t0);
  if (r.code != cli::kOk) return {false, "run exit " + std::to_string(r.code) + ": " + r.err};
  CsvTable got = load_csv(out);
  ValueTable want{3, {}};
  for (std::size_t i = 1; i <= persons; ++i) {
    want.rows.push_back({"P" + std::to_string(i), "P" + std::to_string(i % persons + 1),
                         std::to_string(i % 50 + 1)});
  }
  const bool exact = same_rows(got.table, want);
  std::ostringstream d;
  d << elements << " elements, " << t.size() << " nodes, " << got.table.rows.size() << " rows "
    << (exact ? "exact" : "differ") << ", " << secs << " s";
  return {elements >= kScaledElements && exact && secs < kScaledSecs, d.str()};
}

// 8. Keys emitted by the migrate command.
Outcome keys() {
  const auto dir = (scratch() / "db").string();
  Cli m = cli_call({"--mode", "migrate", "--schema", kFix + "/migrate/schema.json", "--out", dir});
  if (m.code != cli::kOk) return {false, "migrate exit " + std::to_string(m.code) + ": " + m.err};
  CsvTable person = load_csv(dir + "/Person.csv");
  CsvTable friendship = load_csv(dir + "/Friendship.csv");
  std::map<std::string, int> pk;
  bool unique = true;
  for (const auto& r : person.table.rows) unique = unique && ++pk[r[0]] == 1;
  std::set<std::string> fpk;
  for (const auto& r : friendship.table.rows) unique = unique && fpk.insert(r[0]).second;
  std::size_t joined = 0;
  for (const auto& r : friendship.table.rows) {
    auto it = pk.find(r[1]);
    if (it != pk.end() && it->second == 1) ++joined;
  }
  std::ostringstream d;
  d << person.table.rows.size() << " Person and " << friendship.table.rows.size()
    << " Friendship rows, keys " << (unique ? "unique" : "repeated") << ", " << joined << "/"
    << friendship.table.rows.size() << " foreign keys join one parent";
  return {unique && !person.table.rows.empty() && !friendship.table.rows.empty() &&
              joined == friendship.table.rows.size(),
          d.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"motivating example synthesis", motivating},
      {"nested objects synthesis", nested_objects},
      {"minimum cover and DNF of the worked example", worked_cover},
      {"column automaton against brute force", automaton_vs_brute_force},
      {"soundness on generated tasks", soundness},
      {"optimized plans and adversarial tree", optimizer},
      {"scaled run on the motivating schema", scaled},
      {"migration key constraints", keys},
  };
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu: %s  %s: %s [%.2f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  return failed == 0 ? 0 : 1;
}
