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

#include "treeshred/db_migrator.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "treeshred/csv.hpp"
#include "treeshred/optimizer.hpp"

namespace treeshred {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw SchemaError(where + ": unknown field \"" + key + "\"");
    }
  }
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw SchemaError(where + ": \"" + key + "\" must be a string");
  }
  return it->get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw SchemaError(where + ": \"" + key + "\" must be a boolean");
  return it->get<bool>();
}

std::string resolve(const std::string& base, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return p.lexically_normal().string();
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

}  // namespace

SchemaSpec parse_schema(std::string_view json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("schema: ") + e.what());
  }
  check_keys(doc, {"sources", "tables"}, "schema");
  SchemaSpec s;
  auto sources = doc.find("sources");
  if (sources != doc.end()) {
    if (!sources->is_array()) throw SchemaError("schema: \"sources\" must be an array");
    for (const auto& v : *sources) {
      if (!v.is_string()) throw SchemaError("schema: sources must be strings");
      s.sources.push_back(resolve(base_dir, v.get<std::string>()));
    }
  }
  auto tables = doc.find("tables");
  if (tables == doc.end() || !tables->is_array()) {
    throw SchemaError("schema: \"tables\" must be an array");
  }
  for (std::size_t t = 0; t < tables->size(); ++t) {
    const json& tj = (*tables)[t];
    const std::string where = "table " + std::to_string(t + 1);
    check_keys(tj, {"name", "columns", "examples"}, where);
    TableSpec table;
    table.name = get_string(tj, "name", where);
    auto cols = tj.find("columns");
    if (cols == tj.end() || !cols->is_array()) {
      throw SchemaError(where + ": \"columns\" must be an array");
    }
    for (const auto& cj : *cols) {
      const std::string cw = table.name + " column";
      check_keys(cj, {"name", "primary_key", "synthetic", "foreign_key"}, cw);
      ColumnSpec c;
      c.name = get_string(cj, "name", cw);
      c.primary_key = get_bool(cj, "primary_key", false, cw);
      c.synthetic = get_bool(cj, "synthetic", true, cw);
      if (auto fk = cj.find("foreign_key"); fk != cj.end()) {
        check_keys(*fk, {"table", "column"}, cw + " " + c.name + " foreign_key");
        c.foreign_key = ForeignKeyRef{get_string(*fk, "table", cw), get_string(*fk, "column", cw)};
      }
      table.columns.push_back(std::move(c));
    }
    auto exs = tj.find("examples");
    if (exs == tj.end() || !exs->is_array()) {
      throw SchemaError(where + ": \"examples\" must be an array");
    }
    for (const auto& ej : *exs) {
      check_keys(ej, {"document", "table"}, table.name + " example");
      table.examples.push_back({resolve(base_dir, get_string(ej, "document", table.name)),
                                resolve(base_dir, get_string(ej, "table", table.name))});
    }
    s.tables.push_back(std::move(table));
  }
  validate_schema(s);
  return s;
}

SchemaSpec load_schema(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw SchemaError(e.what());
  }
  return parse_schema(text, std::filesystem::path(path).parent_path().string());
}

void validate_schema(SchemaSpec& schema) {
  if (schema.tables.empty()) throw SchemaError("schema: no tables");
  std::set<std::string> names;
  for (const auto& t : schema.tables) {
    if (t.name.empty()) throw SchemaError("schema: table without a name");
    if (!names.insert(t.name).second) throw SchemaError("schema: duplicate table " + t.name);
  }
  auto find_table = [&](const std::string& n) -> const TableSpec* {
    for (const auto& t : schema.tables) {
      if (t.name == n) return &t;
    }
    return nullptr;
  };
  for (auto& t : schema.tables) {
    if (t.columns.empty()) throw SchemaError(t.name + ": no columns");
    if (t.examples.empty()) throw SchemaError(t.name + ": no examples");
    std::set<std::string> cols;
    std::size_t pks = 0, data = 0;
    for (auto& c : t.columns) {
      if (c.name.empty()) throw SchemaError(t.name + ": column without a name");
      if (!cols.insert(c.name).second) throw SchemaError(t.name + ": duplicate column " + c.name);
      if (c.primary_key) ++pks;
      if (c.primary_key && c.foreign_key) {
        throw SchemaError(t.name + "." + c.name + ": a column cannot be both keys");
      }
      c.generated = c.primary_key && c.synthetic;
      if (c.foreign_key) {
        const TableSpec* ref = find_table(c.foreign_key->table);
        if (!ref) {
          throw SchemaError(t.name + "." + c.name + ": unknown table " + c.foreign_key->table);
        }
        auto rc = std::find_if(ref->columns.begin(), ref->columns.end(),
                               [&](const ColumnSpec& x) { return x.name == c.foreign_key->column; });
        if (rc == ref->columns.end() || !rc->primary_key) {
          throw SchemaError(t.name + "." + c.name + ": " + c.foreign_key->table + "." +
                            c.foreign_key->column + " is not a declared primary key");
        }
        c.generated = rc->synthetic;
      }
      if (!c.generated) ++data;
    }
    if (pks > 1) throw SchemaError(t.name + ": more than one primary key");
    if (data == 0) throw SchemaError(t.name + ": no data columns to synthesize");
  }
}

std::string make_key(std::span<const NodeId> nodes, std::optional<std::size_t> document) {
  std::string out;
  if (document) out = std::to_string(*document);
  for (NodeId n : nodes) {
    if (!out.empty()) out += '.';
    out += std::to_string(n.value);
  }
  return out;
}

std::string ForeignKeyRecipe::to_text() const {
  std::string out;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (j) out += ", ";
    out += to_string(parts[j].chi) + " of t" + std::to_string(parts[j].slot);
  }
  return out;
}

std::optional<ForeignKeyRecipe> learn_foreign_key_recipe(std::span<const KeyLink> links,
                                                         std::size_t max_depth) {
  if (links.empty()) return std::nullopt;
  const std::size_t k = links[0].child.size();
  const std::size_t m = links[0].parent.size();
  for (const auto& l : links) {
    if (l.child.size() != k || l.parent.size() != m) return std::nullopt;
  }
  // Per slot, breadth-first over node extractors deduplicated by their result
  // on the links; an extractor is kept only while it is total.
  struct Item {
    NodeExtractor chi;
    std::vector<NodeId> res;
  };
  std::vector<std::vector<Item>> layers(k);
  std::vector<std::set<std::vector<NodeId>>> seen(k);
  for (std::uint32_t t = 0; t < k; ++t) {
    Item self;
    for (const auto& l : links) self.res.push_back(l.child[t]);
    seen[t].insert(self.res);
    layers[t].push_back(std::move(self));
  }
  ForeignKeyRecipe recipe;
  recipe.parts.resize(m);
  std::vector<char> found(m, 0);
  std::size_t missing = m;
  auto match = [&](const Item& item, std::uint32_t slot) {
    for (std::size_t j = 0; j < m; ++j) {
      if (found[j]) continue;
      bool all = true;
      for (std::size_t r = 0; r < links.size() && all; ++r) all = item.res[r] == links[r].parent[j];
      if (all) {
        recipe.parts[j] = {item.chi, slot};
        found[j] = 1;
        --missing;
      }
    }
  };
  for (std::size_t depth = 0; missing > 0; ++depth) {
    for (std::uint32_t t = 0; t < k; ++t) {
      for (const Item& item : layers[t]) match(item, t);
    }
    if (missing == 0 || depth == max_depth) break;
    for (std::uint32_t t = 0; t < k; ++t) {
      std::vector<Item> next;
      for (const Item& cur : layers[t]) {
        Item up{cur.chi, {}};
        up.chi.steps.push_back(NodeStep::parent());
        bool total = true;
        for (std::size_t r = 0; r < links.size() && total; ++r) {
          auto q = links[r].tree->parent(cur.res[r]);
          if (q) up.res.push_back(*q);
          else total = false;
        }
        if (total && seen[t].insert(up.res).second) next.push_back(std::move(up));
        const Hdt& t0 = *links[0].tree;
        std::vector<std::pair<std::string, std::uint32_t>> steps;
        for (NodeId c : t0.children(cur.res[0])) steps.emplace_back(t0.tag(c), t0.pos(c));
        std::sort(steps.begin(), steps.end());
        for (const auto& [tag, pos] : steps) {
          Item down{cur.chi, {}};
          down.chi.steps.push_back(NodeStep::child(tag, pos));
          bool ok = true;
          for (std::size_t r = 0; r < links.size() && ok; ++r) {
            auto q = links[r].tree->child(cur.res[r], tag, pos);
            if (q) down.res.push_back(*q);
            else ok = false;
          }
          if (ok && seen[t].insert(down.res).second) next.push_back(std::move(down));
        }
      }
      layers[t] = std::move(next);
    }
  }
  if (missing > 0) return std::nullopt;
  return recipe;
}

bool MigrationReport::ok() const {
  return std::all_of(tables.begin(), tables.end(), [](const TableReport& t) { return t.ok; });
}

std::string MigrationReport::to_text() const {
  std::ostringstream os;
  for (const auto& t : tables) {
    os << t.name << ": " << (t.ok ? "ok" : "failed") << ", " << t.rows << " rows, synthesis "
       << t.synth_seconds << " s\n";
    if (t.program) os << "  program " << to_string(*t.program) << "\n";
    for (const auto& r : t.recipes) os << "  " << r << "\n";
    if (t.dangling) os << "  " << t.dangling << " foreign keys without a target node\n";
    if (!t.failure.empty()) os << "  failure: " << t.failure << "\n";
  }
  return os.str();
}

namespace {

struct TableWork {
  std::vector<std::size_t> data_cols;  // schema positions of synthesized columns
  std::vector<Example> examples;
  std::vector<std::string> example_docs;
  // Per example: the key label column values, by schema position.
  std::vector<std::map<std::size_t, std::vector<std::string>>> labels;
  std::vector<std::vector<NodeRow>> row_nodes;  // per example, per row
  std::vector<std::pair<std::size_t, ForeignKeyRecipe>> recipes;  // schema position
};

// Node tuple behind each expected row, matched by projection in order.
std::optional<std::vector<NodeRow>> match_rows(const Program& p, const Example& ex) {
  NodeTable nodes = eval_program_nodes(p, *ex.tree);
  std::vector<char> used(nodes.rows.size(), 0);
  std::vector<NodeRow> out;
  for (const auto& row : ex.table.rows) {
    bool hit = false;
    for (std::size_t i = 0; i < nodes.rows.size() && !hit; ++i) {
      if (used[i] || project(nodes.rows[i], *ex.tree) != row) continue;
      used[i] = 1;
      out.push_back(nodes.rows[i]);
      hit = true;
    }
    if (!hit) return std::nullopt;
  }
  return out;
}

}  // namespace

MigrationReport migrate(const SchemaSpec& schema, std::span<const Hdt> sources,
                        const MigrationSink& sink, const SynthConfig& config) {
  MigrationReport report;
  const std::size_t nt = schema.tables.size();
  report.tables.resize(nt);
  std::vector<TableWork> work(nt);

  // Example documents are shared between tables.
  std::map<std::string, std::unique_ptr<Hdt>> docs;
  for (std::size_t t = 0; t < nt; ++t) {
    const TableSpec& spec = schema.tables[t];
    TableReport& rep = report.tables[t];
    TableWork& w = work[t];
    rep.name = spec.name;
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
      if (!spec.columns[c].generated) w.data_cols.push_back(c);
    }
    try {
      for (const auto& ex : spec.examples) {
        auto& doc = docs[ex.document];
        if (!doc) doc = std::make_unique<Hdt>(load_document(ex.document, guess_format(ex.document)));
        CsvTable csv = load_csv(ex.table);
        std::map<std::string, std::size_t> header;
        for (std::size_t i = 0; i < csv.header.size(); ++i) header[csv.header[i]] = i;
        for (const auto& h : csv.header) {
          if (std::none_of(spec.columns.begin(), spec.columns.end(),
                           [&](const ColumnSpec& c) { return c.name == h; })) {
            throw SchemaError(ex.table + ": column " + h + " is not in table " + spec.name);
          }
        }
        Example e{doc.get(), ValueTable{w.data_cols.size(), {}}};
        std::map<std::size_t, std::vector<std::string>> labels;
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
          const ColumnSpec& col = spec.columns[c];
          auto it = header.find(col.name);
          if (it == header.end()) {
            if (!col.generated || col.foreign_key) {
              throw SchemaError(ex.table + ": missing column " + col.name);
            }
            continue;
          }
          if (col.generated) {
            for (const auto& row : csv.table.rows) labels[c].push_back(row[it->second]);
          }
        }
        for (const auto& row : csv.table.rows) {
          ValueRow v;
          for (std::size_t c : w.data_cols) v.push_back(row[header.at(spec.columns[c].name)]);
          e.table.rows.push_back(std::move(v));
        }
        w.examples.push_back(std::move(e));
        w.example_docs.push_back(ex.document);
        w.labels.push_back(std::move(labels));
      }
    } catch (const std::exception& e) {
      rep.failure = e.what();
    }
  }

  // Synthesis, one task per table.
  const std::size_t hw = config.threads ? config.threads : std::thread::hardware_concurrency();
  SynthConfig per_table = config;
  per_table.threads = std::max<std::size_t>(1, hw / nt);
  std::vector<std::future<void>> tasks;
  for (std::size_t t = 0; t < nt; ++t) {
    if (!report.tables[t].failure.empty()) continue;
    tasks.push_back(std::async(std::launch::async, [&, t]() {
      TableReport& rep = report.tables[t];
      SynthReport srep;
      auto p = synthesize(work[t].examples, per_table, &srep);
      rep.synthesis = srep.to_text();
      rep.synth_seconds = srep.seconds;
      if (!p) {
        rep.failure = "synthesis: " + srep.message;
        return;
      }
      rep.program = std::move(p);
    }));
  }
  for (auto& f : tasks) f.get();

  for (std::size_t t = 0; t < nt; ++t) {
    TableReport& rep = report.tables[t];
    if (!rep.program) continue;
    for (const Example& ex : work[t].examples) {
      auto rows = match_rows(*rep.program, ex);
      if (!rows) {
        rep.failure = "example rows could not be matched to node tuples";
        rep.program.reset();
        break;
      }
      work[t].row_nodes.push_back(std::move(*rows));
    }
  }

  // Foreign key recipes, in dependency order so a failed parent fails its
  // children.
  std::vector<char> done(nt, 0);
  for (std::size_t round = 0; round < nt; ++round) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (done[t]) continue;
      const TableSpec& spec = schema.tables[t];
      TableReport& rep = report.tables[t];
      bool ready = true;
      for (const auto& c : spec.columns) {
        if (!c.foreign_key || !c.generated) continue;
        for (std::size_t p = 0; p < nt; ++p) {
          if (schema.tables[p].name == c.foreign_key->table && p != t && !done[p]) ready = false;
        }
      }
      if (!ready && round + 1 < nt) continue;
      done[t] = 1;
      if (!rep.program) continue;
      for (std::size_t c = 0; c < spec.columns.size() && rep.program; ++c) {
        const ColumnSpec& col = spec.columns[c];
        if (!col.foreign_key || !col.generated) continue;
        std::size_t p = 0;
        while (schema.tables[p].name != col.foreign_key->table) ++p;
        const TableSpec& pspec = schema.tables[p];
        const std::size_t pk = static_cast<std::size_t>(
            std::find_if(pspec.columns.begin(), pspec.columns.end(),
                         [](const ColumnSpec& x) { return x.primary_key; }) -
            pspec.columns.begin());
        auto fail = [&](const std::string& why) {
          rep.failure = col.name + ": " + why;
          rep.program.reset();
        };
        if (!report.tables[p].program) {
          fail("referenced table " + pspec.name + " failed");
          break;
        }
        std::vector<KeyLink> links;
        for (std::size_t e = 0; e < work[t].examples.size() && rep.program; ++e) {
          const std::string& doc = work[t].example_docs[e];
          std::optional<std::size_t> pe;
          for (std::size_t x = 0; x < work[p].examples.size(); ++x) {
            if (work[p].example_docs[x] == doc && work[p].labels[x].count(pk)) {
              pe = x;
              break;
            }
          }
          if (!pe) {
            fail("no " + pspec.name + " example with key labels for " + doc);
            break;
          }
          const auto& plabels = work[p].labels[*pe].at(pk);
          const auto& fks = work[t].labels[e].at(c);
          for (std::size_t r = 0; r < fks.size(); ++r) {
            auto it = std::find(plabels.begin(), plabels.end(), fks[r]);
            if (it == plabels.end()) {
              fail("label \"" + fks[r] + "\" is not a " + pspec.name + " key in the examples");
              break;
            }
            links.push_back({work[t].examples[e].tree, work[t].row_nodes[e][r],
                             work[p].row_nodes[*pe][static_cast<std::size_t>(it - plabels.begin())]});
          }
        }
        if (!rep.program) break;
        auto recipe = learn_foreign_key_recipe(links, config.max_node_depth);
        if (!recipe) {
          fail("no node extractors reach the referenced rows");
          break;
        }
        rep.recipes.push_back(col.name + " <- " + recipe->to_text());
        work[t].recipes.emplace_back(c, std::move(*recipe));
      }
    }
  }

  // Execution.
  const bool multi = sources.size() > 1;
  for (std::size_t t = 0; t < nt; ++t) {
    TableReport& rep = report.tables[t];
    if (!rep.program) continue;
    const TableSpec& spec = schema.tables[t];
    const TableWork& w = work[t];
    for (std::size_t d = 0; d < sources.size(); ++d) {
      const Hdt& tree = sources[d];
      const Hdt* trees[] = {&tree};
      ExecutionPlan plan = optimize(*rep.program, trees);
      const std::optional<std::size_t> ordinal =
          multi ? std::optional<std::size_t>(d) : std::nullopt;
      ValueRow out(spec.columns.size());
      execute_plan(plan, tree, [&](std::span<const NodeId> row) {
        for (std::size_t i = 0; i < w.data_cols.size(); ++i) {
          out[w.data_cols[i]] = std::string(cell_value(tree, row[i]));
        }
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
          if (spec.columns[c].generated && spec.columns[c].primary_key) {
            out[c] = make_key(row, ordinal);
          }
        }
        for (const auto& [c, recipe] : w.recipes) {
          NodeRow target;
          for (const auto& part : recipe.parts) {
            auto n = eval_node_extractor(part.chi, row[part.slot], tree);
            if (!n) break;
            target.push_back(*n);
          }
          if (target.size() == recipe.parts.size()) {
            out[c] = make_key(target, ordinal);
          } else {
            out[c].clear();
            ++rep.dangling;
          }
        }
        ++rep.rows;
        sink(t, out);
      });
    }
    rep.ok = true;
  }
  return report;
}

std::string manifest_json(const SchemaSpec& schema, const MigrationReport& report,
                          std::span<const std::string> files) {
  json tables = json::array();
  for (std::size_t t = 0; t < report.tables.size(); ++t) {
    const TableReport& r = report.tables[t];
    json cols = json::array();
    for (const auto& c : schema.tables[t].columns) cols.push_back(c.name);
    json entry = {{"name", r.name},
                  {"ok", r.ok},
                  {"columns", cols},
                  {"rows", r.rows},
                  {"synthesis_seconds", r.synth_seconds}};
    entry["file"] = t < files.size() && r.ok ? json(files[t]) : json(nullptr);
    entry["program"] = r.program ? json(to_string(*r.program)) : json(nullptr);
    if (!r.ok) entry["failure"] = r.failure;
    if (r.dangling) entry["dangling_foreign_keys"] = r.dangling;
    tables.push_back(std::move(entry));
  }
  return json{{"tables", tables}}.dump(2) + "\n";
}

}  // namespace treeshred
