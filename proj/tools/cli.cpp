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

#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "treeshred/csv.hpp"
#include "treeshred/db_migrator.hpp"
#include "treeshred/dsl.hpp"
#include "treeshred/hdt.hpp"
#include "treeshred/optimizer.hpp"
#include "treeshred/synthesizer.hpp"

namespace treeshred::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string mode;
  std::vector<std::string> inputs;
  std::string format;
  std::vector<std::string> examples;
  std::string out;
  std::string program;
  std::string schema;
  std::string columns;
  std::size_t max_len = 8;
  std::size_t max_programs = 64;
  std::size_t max_node_depth = 4;
  double budget_secs = 60;
  std::size_t threads = 0;
  bool dump_debug = false;
};

// Failure carrying the exit code it maps to.
struct Failure {
  int code;
  std::string message;
};

// Writes to a temporary sibling and renames it into place on commit, so a
// failed run leaves no partial output.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path)
      : path_(std::move(path)),
        tmp_(path_ + ".tmp-" + std::to_string(::getpid())),
        stream_(tmp_, std::ios::binary | std::ios::trunc) {
    if (!stream_) throw Failure{kInternal, "cannot write " + path_};
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return stream_; }

  void commit() {
    stream_.close();
    if (!stream_) throw Failure{kInternal, "cannot write " + path_};
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw Failure{kInternal, "cannot rename " + tmp_ + ": " + ec.message()};
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

DocumentFormat format_of(const Options& o, const std::string& path) {
  if (o.format == "xml") return DocumentFormat::kXml;
  if (o.format == "json") return DocumentFormat::kJson;
  return guess_format(path);
}

Hdt load_input(const Options& o, const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, e.what()};
  }
  try {
    return parse_document(text, format_of(o, path));
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, path + ": " + e.what()};
  }
}

CsvTable load_table(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, e.what()};
  }
  try {
    return parse_csv(text);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, path + ": " + e.what()};
  }
}

std::string header_line(const std::vector<std::string>& header) {
  std::ostringstream os;
  write_csv_record(os, header);
  std::string s = os.str();
  return s.substr(0, s.size() - 2);
}

SynthConfig synth_config(const Options& o) {
  SynthConfig c;
  c.max_len = o.max_len;
  c.max_programs = o.max_programs;
  c.max_node_depth = o.max_node_depth;
  c.budget_secs = o.budget_secs;
  c.threads = o.threads;
  return c;
}

constexpr std::string_view kColumnsDirective = "; columns: ";

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.inputs.empty() || o.inputs.size() != o.examples.size()) {
    throw Failure{kInvalidInput, "synth needs one --examples table per --input document"};
  }
  std::vector<Hdt> trees;
  std::vector<CsvTable> tables;
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    trees.push_back(load_input(o, o.inputs[i]));
    tables.push_back(load_table(o.examples[i]));
  }
  std::vector<Example> examples;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    examples.push_back(Example{&trees[i], tables[i].table});
  }
  const SynthConfig config = synth_config(o);
  SynthReport report;
  auto program = synthesize(examples, config, &report);
  out << report.to_text();
  if (o.dump_debug && !report.columns.empty()) {
    ColumnSpace space = learn_columns(examples, config);
    for (std::size_t i = 0; i < space.dfas.size(); ++i) {
      err << "; column " << i + 1 << " automaton\n"
          << dump(space.dfas[i], trees.size() == 1 ? &trees[0] : nullptr);
      for (const auto& pi : space.extractors[i]) err << ";   " << to_string(pi) << "\n";
    }
    if (program) {
      PredicateConfig pc = config.predicate;
      pc.max_node_depth = config.max_node_depth;
      PredicateReport prep;
      learn_predicate(examples, program->extractor, pc, &prep);
      err << "; predicate\n" << prep.to_text();
    }
  }
  if (!program) {
    err << "no program: " << report.message << "\n";
    return report.failure == SynthFailure::kInvalidInput ? kInvalidInput : kNoProgram;
  }
  std::string text = "; treeshred program\n";
  const auto& header = tables[0].header;
  const bool plain = std::none_of(header.begin(), header.end(), [](const std::string& h) {
    return h.find_first_of("\r\n") != std::string::npos;
  });
  if (plain) text += std::string(kColumnsDirective) + header_line(header) + "\n";
  text += to_string(*program) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    AtomicFile f(o.out);
    f.stream() << text;
    f.commit();
  }
  return kOk;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.program.empty()) throw Failure{kInvalidInput, "run needs --program"};
  if (o.inputs.size() != 1) throw Failure{kInvalidInput, "run needs exactly one --input"};
  std::string text;
  try {
    text = read_file(o.program);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, e.what()};
  }
  Program program;
  try {
    program = parse_program(text);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, o.program + ": " + e.what()};
  }
  std::vector<std::string> header;
  std::string columns = o.columns;
  if (columns.empty()) {
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      if (line.starts_with(kColumnsDirective)) {
        columns = line.substr(kColumnsDirective.size());
        break;
      }
    }
  }
  if (!columns.empty()) {
    try {
      header = parse_csv(columns).header;
    } catch (const std::exception& e) {
      throw Failure{kInvalidInput, std::string("columns: ") + e.what()};
    }
  } else {
    for (std::size_t i = 0; i < program.extractor.width(); ++i) {
      header.push_back("c" + std::to_string(i + 1));
    }
  }
  if (header.size() != program.extractor.width()) {
    throw Failure{kInvalidInput, "program has " + std::to_string(program.extractor.width()) +
                                     " columns but " + std::to_string(header.size()) +
                                     " names were given"};
  }
  Hdt tree = load_input(o, o.inputs[0]);
  const auto start = std::chrono::steady_clock::now();
  const Hdt* trees[] = {&tree};
  ExecutionPlan plan = optimize(program, trees);
  if (o.dump_debug) err << "; plan\n" << plan.to_text();

  std::unique_ptr<AtomicFile> file;
  if (!o.out.empty()) file = std::make_unique<AtomicFile>(o.out);
  std::ostream& sink = file ? file->stream() : out;
  write_csv_record(sink, header);
  std::vector<std::string> row(header.size());
  ExecStats stats = execute_plan(plan, tree, [&](std::span<const NodeId> nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) row[i] = cell_value(tree, nodes[i]);
    write_csv_record(sink, row);
  });
  if (file) {
    file->commit();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << "rows " << stats.rows << ", peak buffer " << stats.peak_buffer << ", seconds "
        << secs << "\n";
  }
  return kOk;
}

std::string file_name(const std::string& table) {
  std::string s = table;
  for (char& c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!keep) c = '_';
  }
  return s + ".csv";
}

int cmd_migrate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.schema.empty()) throw Failure{kInvalidInput, "migrate needs --schema"};
  if (o.out.empty()) throw Failure{kInvalidInput, "migrate needs --out (a directory)"};
  SchemaSpec schema;
  try {
    schema = load_schema(o.schema);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, o.schema + ": " + e.what()};
  }
  std::vector<std::string> paths = o.inputs.empty() ? schema.sources : o.inputs;
  if (paths.empty()) throw Failure{kInvalidInput, "no source documents"};
  std::vector<Hdt> sources;
  for (const auto& p : paths) sources.push_back(load_input(o, p));

  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Failure{kInternal, "cannot create " + o.out + ": " + ec.message()};
  std::vector<std::string> names;
  std::vector<std::unique_ptr<AtomicFile>> files;
  for (const auto& t : schema.tables) {
    names.push_back(file_name(t.name));
    files.push_back(std::make_unique<AtomicFile>((fs::path(o.out) / names.back()).string()));
    std::vector<std::string> header;
    for (const auto& c : t.columns) header.push_back(c.name);
    write_csv_record(files.back()->stream(), header);
  }
  MigrationReport report = migrate(
      schema, sources,
      [&](std::size_t t, const ValueRow& row) { write_csv_record(files[t]->stream(), row); },
      synth_config(o));
  for (std::size_t t = 0; t < files.size(); ++t) {
    if (report.tables[t].ok) files[t]->commit();
  }
  files.clear();
  AtomicFile manifest((fs::path(o.out) / "manifest.json").string());
  manifest.stream() << manifest_json(schema, report, names);
  manifest.commit();
  out << report.to_text();
  if (o.dump_debug) {
    for (const auto& t : report.tables) err << "; " << t.name << "\n" << t.synthesis;
  }
  return report.ok() ? kOk : kNoProgram;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Synthesizes tree-to-table programs from examples and runs them."};
  app.add_option("--mode", o.mode, "synth, run or migrate")
      ->required()
      ->check(CLI::IsMember({"synth", "run", "migrate"}));
  app.add_option("--input", o.inputs, "XML or JSON document (repeatable)");
  app.add_option("--format", o.format, "document format; default: by file extension")
      ->check(CLI::IsMember({"xml", "json"}));
  app.add_option("--examples", o.examples, "example table CSV, one per --input (synth)");
  app.add_option("--out", o.out, "program file (synth), CSV file (run) or directory (migrate)");
  app.add_option("--program", o.program, "program file (run)");
  app.add_option("--schema", o.schema, "schema JSON file (migrate)");
  app.add_option("--columns", o.columns, "output header as one CSV record (run)");
  app.add_option("--max-len", o.max_len, "steps per column extractor")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-programs", o.max_programs, "column extractors kept per column")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-node-depth", o.max_node_depth, "steps per predicate node extractor")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget-secs", o.budget_secs, "synthesis wall-clock budget per table")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", o.threads, "worker threads; 0: all cores");
  app.add_flag("--dump-debug", o.dump_debug, "print automata, predicate tables and plans");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidInput;
  }
  try {
    if (o.mode == "synth") return cmd_synth(o, out, err);
    if (o.mode == "run") return cmd_run(o, out, err);
    return cmd_migrate(o, out, err);
  } catch (const Failure& f) {
    err << "treeshred: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    err << "treeshred: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace treeshred::cli
