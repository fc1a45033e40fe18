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

#ifndef TREESHRED_CSV_HPP_
#define TREESHRED_CSV_HPP_

#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "treeshred/dsl.hpp"

namespace treeshred {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A CSV document whose first record is the header.
struct CsvTable {
  std::vector<std::string> header;
  ValueTable table;
};

// RFC 4180 reader. Accepts LF or CRLF record ends and an optional final line
// break; every record must have as many fields as the header.
CsvTable parse_csv(std::string_view text);
CsvTable load_csv(const std::string& path);

// RFC 4180 writer: CRLF record ends, fields quoted only when they contain a
// comma, quote, CR or LF.
void write_csv_record(std::ostream& out, const std::vector<std::string>& fields);
std::string render_csv(const std::vector<std::string>& header,
                       const ValueTable& table);

}  // namespace treeshred

#endif  // TREESHRED_CSV_HPP_
