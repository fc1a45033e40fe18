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

// Non-validating XML reader producing an Hdt.
//
// Attributes become leaf children (in attribute order) ahead of any child
// element. Character content of an element without attributes or child
// elements becomes that element's data; otherwise it is attached as a trailing
// leaf child tagged "text". Comments, processing instructions and the DOCTYPE
// are dropped.

#include <string>
#include <utility>
#include <vector>

#include "treeshred/hdt.hpp"

namespace treeshred {
namespace {

constexpr std::string_view kTextTag = "text";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_char(char c) {
  return !is_space(c) && c != '/' && c != '>' && c != '<' && c != '=' &&
         c != '"' && c != '\'' && c != '\0';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class XmlReader {
 public:
  explicit XmlReader(std::string_view src) : src_(src) {}

  Hdt read() {
    if (src_.substr(0, 3) == "\xEF\xBB\xBF") i_ = 3;
    skip_misc(/*allow_doctype=*/true);
    if (!peek('<')) fail("expected root element");
    parse_content();
    skip_misc(/*allow_doctype=*/false);
    if (i_ < src_.size()) fail("unexpected content after root element");
    return std::move(builder_).finish();
  }

 private:
  struct Open {
    std::string name;
    std::string text;
  };

  [[noreturn]] void fail(const std::string& what) const { fail_at(what, i_); }

  [[noreturn]] void fail_at(const std::string& what, std::size_t offset) const {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < offset && k < src_.size(); ++k) {
      if (src_[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("XML: " + what, line, col);
  }

  bool peek(char c) const { return i_ < src_.size() && src_[i_] == c; }
  bool starts(std::string_view s) const { return src_.substr(i_, s.size()) == s; }

  void skip_spaces() {
    while (i_ < src_.size() && is_space(src_[i_])) ++i_;
  }

  void skip_past(std::string_view terminator, const char* what) {
    const std::size_t start = i_;
    auto end = src_.find(terminator, i_);
    if (end == std::string_view::npos) fail_at(std::string("unterminated ") + what, start);
    i_ = end + terminator.size();
  }

  void skip_doctype() {
    const std::size_t start = i_;
    int depth = 0;
    for (; i_ < src_.size(); ++i_) {
      char c = src_[i_];
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth == 0) {
        ++i_;
        return;
      }
    }
    fail_at("unterminated DOCTYPE", start);
  }

  void skip_misc(bool allow_doctype) {
    for (;;) {
      skip_spaces();
      if (starts("<?")) {
        skip_past("?>", "processing instruction");
      } else if (starts("<!--")) {
        skip_past("-->", "comment");
      } else if (allow_doctype && starts("<!DOCTYPE")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  std::string read_name() {
    const std::size_t start = i_;
    while (i_ < src_.size() && is_name_char(src_[i_])) ++i_;
    if (i_ == start) fail("expected a name");
    return std::string(src_.substr(start, i_ - start));
  }

  void decode_into(std::string& out, std::string_view raw, std::size_t base) const {
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] != '&') {
        out += raw[k];
        continue;
      }
      auto semi = raw.find(';', k);
      if (semi == std::string_view::npos) fail_at("unterminated entity", base + k);
      std::string_view ent = raw.substr(k + 1, semi - k - 1);
      if (ent == "lt") {
        out += '<';
      } else if (ent == "gt") {
        out += '>';
      } else if (ent == "amp") {
        out += '&';
      } else if (ent == "quot") {
        out += '"';
      } else if (ent == "apos") {
        out += '\'';
      } else if (ent.size() > 1 && ent[0] == '#') {
        std::uint32_t cp = 0;
        bool hex = ent[1] == 'x' || ent[1] == 'X';
        std::string_view digits = ent.substr(hex ? 2 : 1);
        if (digits.empty()) fail_at("bad character reference", base + k);
        for (char d : digits) {
          int v;
          if (d >= '0' && d <= '9') {
            v = d - '0';
          } else if (hex && d >= 'a' && d <= 'f') {
            v = d - 'a' + 10;
          } else if (hex && d >= 'A' && d <= 'F') {
            v = d - 'A' + 10;
          } else {
            fail_at("bad character reference", base + k);
          }
          cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
          if (cp > 0x10FFFF) fail_at("character reference out of range", base + k);
        }
        append_utf8(out, cp);
      } else {
        fail_at("unknown entity &" + std::string(ent) + ";", base + k);
      }
      k = semi;
    }
  }

  std::string node_path() const {
    std::string path;
    for (const Open& o : stack_) path += "/" + o.name;
    return path;
  }

  void start_element() {
    ++i_;  // '<'
    Open open{read_name(), {}};
    builder_.open(open.name);
    std::vector<std::string> seen;
    for (;;) {
      const bool had_space = i_ < src_.size() && is_space(src_[i_]);
      skip_spaces();
      if (i_ >= src_.size()) fail("unterminated start tag <" + open.name + ">");
      if (starts("/>")) {
        i_ += 2;
        builder_.close();
        if (stack_.empty()) done_ = true;
        return;
      }
      if (peek('>')) {
        ++i_;
        stack_.push_back(std::move(open));
        return;
      }
      if (!had_space) fail("expected whitespace between attributes");
      const std::size_t attr_at = i_;
      std::string attr = read_name();
      skip_spaces();
      if (!peek('=')) fail("expected '=' after attribute " + attr);
      ++i_;
      skip_spaces();
      if (!peek('"') && !peek('\'')) fail("expected quoted attribute value");
      const char quote = src_[i_++];
      auto end = src_.find(quote, i_);
      if (end == std::string_view::npos) fail_at("unterminated attribute value", attr_at);
      std::string_view raw = src_.substr(i_, end - i_);
      if (raw.find('<') != std::string_view::npos) fail("'<' in attribute value");
      for (const auto& s : seen) {
        if (s == attr) fail_at("duplicate attribute " + attr, attr_at);
      }
      seen.push_back(attr);
      std::string value;
      decode_into(value, raw, i_);
      i_ = end + 1;
      builder_.leaf(attr, std::move(value));
    }
  }

  void end_element() {
    const std::size_t at = i_;
    i_ += 2;  // "</"
    std::string name = read_name();
    skip_spaces();
    if (!peek('>')) fail("expected '>' in end tag");
    ++i_;
    if (stack_.empty() || stack_.back().name != name) {
      fail_at("mismatched end tag </" + name + ">", at);
    }
    std::string_view text = trim(stack_.back().text);
    if (!text.empty()) {
      if (builder_.current_has_children()) {
        if (builder_.current_has_child_tag(kTextTag)) {
          throw IngestError("element " + node_path() +
                            " has character content and a child named \"text\"");
        }
        builder_.leaf(kTextTag, std::string(text));
      } else {
        builder_.set_data(std::string(text));
      }
    }
    stack_.pop_back();
    builder_.close();
    if (stack_.empty()) done_ = true;
  }

  void parse_content() {
    while (!done_) {
      if (i_ >= src_.size()) {
        fail(stack_.empty() ? "expected root element"
                            : "unexpected end of document inside <" +
                                  stack_.back().name + ">");
      }
      if (src_[i_] == '<') {
        if (starts("</")) {
          end_element();
        } else if (starts("<!--")) {
          skip_past("-->", "comment");
        } else if (starts("<![CDATA[")) {
          const std::size_t start = i_;
          i_ += 9;
          auto end = src_.find("]]>", i_);
          if (end == std::string_view::npos) fail_at("unterminated CDATA section", start);
          stack_.back().text.append(src_.substr(i_, end - i_));
          i_ = end + 3;
        } else if (starts("<?")) {
          skip_past("?>", "processing instruction");
        } else if (starts("<!")) {
          fail("unexpected markup declaration");
        } else {
          start_element();
        }
      } else {
        const std::size_t start = i_;
        auto end = src_.find('<', i_);
        if (end == std::string_view::npos) end = src_.size();
        if (stack_.empty()) fail("text outside the root element");
        decode_into(stack_.back().text, src_.substr(start, end - start), start);
        i_ = end;
      }
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  bool done_ = false;
  Hdt::Builder builder_;
  std::vector<Open> stack_;
};

}  // namespace

Hdt parse_xml(std::string_view document) { return XmlReader(document).read(); }

}  // namespace treeshred
