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

#ifndef TREESHRED_DB_MIGRATOR_HPP_
#define TREESHRED_DB_MIGRATOR_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "treeshred/dsl.hpp"
#include "treeshred/hdt.hpp"
#include "treeshred/synthesizer.hpp"

namespace treeshred {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ForeignKeyRef {
  std::string table;
  std::string column;
};

struct ColumnSpec {
  std::string name;
  bool primary_key = false;
  // A synthetic primary key is generated from node identifiers; otherwise
  // the key is ordinary source data and passes through unchanged.
  bool synthetic = true;
  std::optional<ForeignKeyRef> foreign_key;
  // Set by validation: the value is produced by the key function rather
  // than by the synthesized program.
  bool generated = false;
};

struct ExampleSpec {
  std::string document;  // resolved path
  std::string table;     // resolved path to a CSV file with a header row
};

struct TableSpec {
  std::string name;
  std::vector<ColumnSpec> columns;
  std::vector<ExampleSpec> examples;
};

struct SchemaSpec {
  std::vector<TableSpec> tables;
  std::vector<std::string> sources;  // resolved document paths
};

// Parses the JSON schema file format; relative paths resolve against
// base_dir. Validates the result. Throws SchemaError.
SchemaSpec parse_schema(std::string_view json_text, const std::string& base_dir);
SchemaSpec load_schema(const std::string& path);
// Checks names and key references and sets ColumnSpec::generated.
void validate_schema(SchemaSpec& schema);

// Injective key: decimal node identifiers joined with '.'. With a document
// ordinal the ordinal comes first.
std::string make_key(std::span<const NodeId> nodes,
                     std::optional<std::size_t> document = std::nullopt);

// Where the referenced row's key nodes come from: parts[j] applied to the
// child row's slot gives the j-th key node of the parent row.
struct KeySource {
  NodeExtractor chi;
  std::uint32_t slot = 0;
};
struct ForeignKeyRecipe {
  std::vector<KeySource> parts;

  std::string to_text() const;
};

// A child example row and the parent row it references, as node tuples.
struct KeyLink {
  const Hdt* tree = nullptr;
  NodeRow child;
  NodeRow parent;
};

// Shortest extractors (then lowest slot) reproducing every parent key node.
std::optional<ForeignKeyRecipe> learn_foreign_key_recipe(std::span<const KeyLink> links,
                                                         std::size_t max_depth);

struct TableReport {
  std::string name;
  bool ok = false;
  std::string failure;
  std::optional<Program> program;
  std::string synthesis;  // synthesizer report text
  double synth_seconds = 0;
  std::size_t rows = 0;
  std::size_t dangling = 0;  // foreign keys whose recipe found no node
  std::vector<std::string> recipes;
};

struct MigrationReport {
  std::vector<TableReport> tables;

  bool ok() const;
  std::string to_text() const;
};

// Receives the rows of table `table` (index into schema.tables), values in
// schema column order.
using MigrationSink = std::function<void(std::size_t table, const ValueRow& row)>;

MigrationReport migrate(const SchemaSpec& schema, std::span<const Hdt> sources,
                        const MigrationSink& sink, const SynthConfig& config = {});

// Manifest JSON listing each table's file, columns, row count and program.
std::string manifest_json(const SchemaSpec& schema, const MigrationReport& report,
                          std::span<const std::string> files);

}  // namespace treeshred

#endif  // TREESHRED_DB_MIGRATOR_HPP_
