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

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/oracles.hpp"
#include "treeshred/csv.hpp"
#include "treeshred/dsl.hpp"

using namespace treeshred;
namespace fs = std::filesystem;

namespace {

const std::string kFix = TREESHRED_FIXTURES;

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "treeshred");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("treeshred-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string canonical(const std::string& csv_path) {
  CsvTable t = load_csv(csv_path);
  ValueTable sorted{t.table.width, oracle::sorted_rows(t.table)};
  return render_csv(t.header, sorted);
}

}  // namespace

TEST_CASE("synth then run reproduces the example table") {
  TempDir tmp;
  auto s = call({"--mode", "synth", "--input", kFix + "/friends.xml", "--examples",
                 kFix + "/friends_expected.csv", "--out", tmp / "p.txt", "--threads", "2"});
  INFO(s.err);
  REQUIRE(s.code == cli::kOk);
  CHECK(s.out.find("cost atoms 2") != std::string::npos);
  auto r = call({"--mode", "run", "--program", tmp / "p.txt", "--input", kFix + "/friends.xml",
                 "--out", tmp / "o.csv"});
  REQUIRE(r.code == cli::kOk);
  CHECK(canonical(tmp / "o.csv") == canonical(kFix + "/friends_expected.csv"));

  // JSON input of the same data gives the same table.
  auto j = call({"--mode", "synth", "--input", kFix + "/friends.json", "--examples",
                 kFix + "/friends_expected.csv", "--out", tmp / "pj.txt"});
  REQUIRE(j.code == cli::kOk);
  auto rj = call({"--mode", "run", "--program", tmp / "pj.txt", "--input", kFix + "/friends.json",
                  "--out", tmp / "oj.csv"});
  REQUIRE(rj.code == cli::kOk);
  CHECK(canonical(tmp / "oj.csv") == canonical(kFix + "/friends_expected.csv"));
}

TEST_CASE("run matches the interpreter on the fixtures") {
  TempDir tmp;
  for (const char* name : {"friends", "objects"}) {
    const std::string doc = kFix + "/" + name + ".xml";
    const std::string prog = kFix + "/" + name + "_program.txt";
    auto r = call({"--mode", "run", "--program", prog, "--input", doc, "--out", tmp / "o.csv"});
    REQUIRE(r.code == cli::kOk);
    Hdt t = load_document(doc, DocumentFormat::kXml);
    ValueTable want = eval_program(parse_program(read_file(prog)), t);
    CHECK(same_rows(load_csv(tmp / "o.csv").table, want));
    CHECK(load_csv(tmp / "o.csv").header.front() == "c1");
  }
}

TEST_CASE("input errors") {
  TempDir tmp;
  {
    std::ofstream(tmp / "bad.csv") << "a,b\n\"x\n";
  }
  auto s = call({"--mode", "synth", "--input", kFix + "/friends.xml", "--examples", tmp / "bad.csv",
                 "--out", tmp / "p.txt"});
  CHECK(s.code == cli::kInvalidInput);
  CHECK_FALSE(fs::exists(tmp / "p.txt"));

  {
    std::ofstream(tmp / "prog.txt") << "(filter\n  (cross s)\n  (cmpc (self) 3 = \"x\"))\n";
  }
  auto r = call({"--mode", "run", "--program", tmp / "prog.txt", "--input", kFix + "/friends.xml",
                 "--out", tmp / "o.csv"});
  CHECK(r.code == cli::kInvalidInput);
  CHECK(r.err.find("line") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "o.csv"));

  {
    std::ofstream(tmp / "broken.xml") << "<a><b></a>";
  }
  auto x = call({"--mode", "run", "--program", kFix + "/friends_program.txt", "--input",
                 tmp / "broken.xml", "--out", tmp / "o.csv"});
  CHECK(x.code == cli::kInvalidInput);
  CHECK_FALSE(fs::exists(tmp / "o.csv"));

  CHECK(call({"--mode", "nope"}).code == cli::kInvalidInput);
  CHECK(call({"--mode", "synth", "--max-len", "0"}).code == cli::kInvalidInput);
  CHECK(call({"--mode", "run"}).code == cli::kInvalidInput);
  CHECK(call({"--help"}).code == cli::kOk);
}

TEST_CASE("no program within bounds") {
  TempDir tmp;
  {
    std::ofstream(tmp / "ex.csv") << "v\nnot-there\n";
  }
  auto s = call({"--mode", "synth", "--input", kFix + "/friends.xml", "--examples", tmp / "ex.csv",
                 "--out", tmp / "p.txt"});
  CHECK(s.code == cli::kNoProgram);
  CHECK(s.out.find("column 1") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "p.txt"));
}

TEST_CASE("empty document gives a header-only table") {
  TempDir tmp;
  {
    std::ofstream(tmp / "empty.xml") << "<Persons/>";
  }
  auto r = call({"--mode", "run", "--program", kFix + "/friends_program.txt", "--input",
                 tmp / "empty.xml", "--out", tmp / "o.csv", "--columns", "a,b,c"});
  REQUIRE(r.code == cli::kOk);
  CHECK(read_file(tmp / "o.csv") == "a,b,c\r\n");
}

TEST_CASE("migrate") {
  TempDir tmp;
  auto m = call({"--mode", "migrate", "--schema", kFix + "/migrate/schema.json", "--out",
                 tmp / "db"});
  INFO(m.err);
  REQUIRE(m.code == cli::kOk);
  auto manifest = nlohmann::json::parse(read_file(tmp / "db/manifest.json"));
  CHECK(manifest["tables"][0]["rows"] == 4);
  CHECK(manifest["tables"][1]["rows"] == 4);
  CsvTable person = load_csv(tmp / "db/Person.csv");
  CsvTable friendship = load_csv(tmp / "db/Friendship.csv");
  CHECK(person.header == std::vector<std::string>{"pk", "name"});
  std::set<std::string> keys;
  for (const auto& r : person.table.rows) CHECK(keys.insert(r[0]).second);
  for (const auto& r : friendship.table.rows) CHECK(keys.count(r[1]) == 1);

  // A one-table schema is synth followed by run.
  auto one = call({"--mode", "migrate", "--schema", kFix + "/migrate/single.json", "--out",
                   tmp / "one"});
  REQUIRE(one.code == cli::kOk);
  auto s = call({"--mode", "synth", "--input", kFix + "/friends.xml", "--examples",
                 kFix + "/friends_expected.csv", "--out", tmp / "p.txt"});
  REQUIRE(s.code == cli::kOk);
  auto r = call({"--mode", "run", "--program", tmp / "p.txt", "--input", kFix + "/friends.xml",
                 "--out", tmp / "o.csv"});
  REQUIRE(r.code == cli::kOk);
  CHECK(read_file(tmp / "one/Friends.csv") == read_file(tmp / "o.csv"));

  CHECK(call({"--mode", "migrate", "--schema", tmp / "missing.json", "--out", tmp / "x"}).code ==
        cli::kInvalidInput);
}
