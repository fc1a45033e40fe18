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

#include "treeshred/csv.hpp"

#include <sstream>

#include "treeshred/hdt.hpp"

namespace treeshred {

CsvError::CsvError(const std::string& what, std::size_t line)
    : std::runtime_error("CSV: " + what + " at line " + std::to_string(line)),
      line_(line) {}

CsvTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  std::size_t i = 0;
  bool at_field_start = true;
  bool any = false;

  auto end_record = [&]() {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    at_field_start = true;
    any = false;
  };

  while (i < text.size()) {
    char c = text[i];
    if (at_field_start && c == '"') {
      ++i;
      any = true;
      for (;;) {
        if (i >= text.size()) throw CsvError("unterminated quoted field", record_line);
        char d = text[i++];
        if (d == '"') {
          if (i < text.size() && text[i] == '"') {
            field += '"';
            ++i;
          } else {
            break;
          }
        } else {
          if (d == '\n') ++line;
          field += d;
        }
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw CsvError("unexpected character after closing quote", line);
      }
      at_field_start = false;
      continue;
    }
    if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      at_field_start = true;
      any = true;
      ++i;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r') {
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      }
      ++i;
      end_record();
      ++line;
      record_line = line;
    } else if (c == '"') {
      throw CsvError("quote inside unquoted field", line);
    } else {
      field += c;
      at_field_start = false;
      any = true;
      ++i;
    }
  }
  if (any || !field.empty() || !record.empty()) end_record();

  if (records.empty()) throw CsvError("missing header row", 1);
  CsvTable out;
  out.header = std::move(records.front());
  out.table.width = out.header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != out.table.width) {
      throw CsvError("record has " + std::to_string(records[r].size()) +
                         " fields, header has " + std::to_string(out.table.width),
                     r + 1);
    }
    out.table.rows.push_back(std::move(records[r]));
  }
  return out;
}

CsvTable load_csv(const std::string& path) { return parse_csv(read_file(path)); }

void write_csv_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << "\r\n";
}

std::string render_csv(const std::vector<std::string>& header,
                       const ValueTable& table) {
  std::ostringstream out;
  write_csv_record(out, header);
  for (const auto& row : table.rows) write_csv_record(out, row);
  return std::move(out).str();
}

}  // namespace treeshred
