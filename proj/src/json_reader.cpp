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

// JSON documents as trees: every key/value pair is a node tagged with the key.
// An array bound to key k contributes one node (k, i) per element; nested
// arrays reuse k. A synthetic "root" node wraps the top-level value, and the
// elements of a top-level array are tagged "item".

#include <string>

#include "json.hpp"
#include "treeshred/hdt.hpp"

namespace treeshred {
namespace {

using Json = nlohmann::ordered_json;

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "null";
  return v.dump();
}

void emit_value(const Json& v, std::string_view tag, Hdt::Builder& b);

void emit_member(const std::string& key, const Json& v, Hdt::Builder& b) {
  if (v.is_array()) {
    for (const Json& e : v) emit_value(e, key, b);
  } else {
    emit_value(v, key, b);
  }
}

void emit_value(const Json& v, std::string_view tag, Hdt::Builder& b) {
  if (v.is_object()) {
    b.open(tag);
    for (const auto& [k, child] : v.items()) emit_member(k, child, b);
    b.close();
  } else if (v.is_array()) {
    b.open(tag);
    for (const Json& e : v) emit_value(e, tag, b);
    b.close();
  } else {
    b.leaf(tag, scalar_text(v));
  }
}

}  // namespace

Hdt parse_json(std::string_view document) {
  Json doc;
  try {
    doc = Json::parse(document.begin(), document.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = e.byte > 0 ? e.byte - 1 : 0;
    for (std::size_t k = 0; k < stop && k < document.size(); ++k) {
      if (document[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string("JSON: ") + e.what(), line, col);
  }
  if (!doc.is_object() && !doc.is_array()) {
    throw ParseError("JSON: top-level value must be an object or array", 1, 1);
  }
  Hdt::Builder b;
  b.open("root");
  if (doc.is_object()) {
    for (const auto& [k, child] : doc.items()) emit_member(k, child, b);
  } else {
    for (const Json& e : doc) emit_value(e, "item", b);
  }
  b.close();
  return std::move(b).finish();
}

}  // namespace treeshred
