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

#include "treeshred/hdt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace treeshred {
namespace {

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line,
                       std::size_t column)
    : std::runtime_error(what + " at line " + std::to_string(line) +
                         ", column " + std::to_string(column)),
      line_(line),
      column_(column) {}

std::size_t Hdt::ChildKeyHash::operator()(const ChildKey& k) const noexcept {
  std::uint64_t h = k.parent;
  h = h * 0x9E3779B97F4A7C15ull ^ k.tag;
  h = h * 0x9E3779B97F4A7C15ull ^ k.pos;
  return static_cast<std::size_t>(h ^ (h >> 29));
}

std::uint32_t Hdt::check(NodeId n) const {
  if (n.value >= tag_.size()) {
    throw std::logic_error("NodeId " + std::to_string(n.value) +
                           " is not a node of this tree");
  }
  return n.value;
}

std::optional<NodeId> Hdt::parent(NodeId n) const {
  const std::uint32_t p = parent_[check(n)];
  if (p == kNoParent) return std::nullopt;
  return NodeId{p};
}

std::span<const NodeId> Hdt::children(NodeId n) const {
  const std::uint32_t i = check(n);
  return {child_list_.data() + child_begin_[i],
          child_list_.data() + child_begin_[i + 1]};
}

std::vector<NodeId> Hdt::children(NodeId n, TagId tag) const {
  std::vector<NodeId> out;
  for (std::uint32_t p = 0;; ++p) {
    auto c = child(n, tag, p);
    if (!c) break;
    out.push_back(*c);
  }
  return out;
}

std::vector<NodeId> Hdt::children(NodeId n, std::string_view tag) const {
  auto t = find_tag(tag);
  if (!t) return {};
  return children(n, *t);
}

std::optional<NodeId> Hdt::child(NodeId n, TagId tag, std::uint32_t pos) const {
  auto it = child_lookup_.find(ChildKey{check(n), tag, pos});
  if (it == child_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> Hdt::child(NodeId n, std::string_view tag,
                                 std::uint32_t pos) const {
  auto t = find_tag(tag);
  if (!t) return std::nullopt;
  return child(n, *t, pos);
}

std::span<const NodeId> Hdt::descendants(NodeId n, TagId tag) const {
  const std::uint32_t i = check(n);
  if (tag >= tag_index_.size()) return {};
  const auto& all = tag_index_[tag];
  auto lo = std::upper_bound(all.begin(), all.end(), NodeId{i});
  auto hi = std::lower_bound(lo, all.end(), NodeId{end_[i]});
  return {all.data() + (lo - all.begin()), all.data() + (hi - all.begin())};
}

std::span<const NodeId> Hdt::nodes_with_tag(TagId tag) const {
  if (tag >= tag_index_.size()) return {};
  return tag_index_[tag];
}

std::optional<TagId> Hdt::find_tag(std::string_view tag) const {
  auto it = tag_lookup_.find(std::string(tag));
  if (it == tag_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Hdt::depth(NodeId n) const {
  std::size_t d = 0;
  for (std::uint32_t p = parent_[check(n)]; p != kNoParent; p = parent_[p]) ++d;
  return d;
}

// ---------------------------------------------------------------------------

TagId Hdt::Builder::intern(std::string_view tag) {
  auto [it, inserted] = tree_.tag_lookup_.try_emplace(
      std::string(tag), static_cast<TagId>(tree_.tags_.size()));
  if (inserted) tree_.tags_.emplace_back(tag);
  return it->second;
}

void Hdt::Builder::open(std::string_view tag) {
  if (stack_.empty() && root_done_) {
    throw std::logic_error("Hdt::Builder: second root node");
  }
  const TagId t = intern(tag);
  const auto id = static_cast<std::uint32_t>(tree_.tag_.size());
  std::uint32_t pos = 0;
  std::uint32_t parent = kNoParent;
  if (!stack_.empty()) {
    Frame& top = stack_.back();
    if (tree_.data_[top.node]) {
      throw std::logic_error("Hdt::Builder: node with data cannot have children");
    }
    pos = top.tag_counts[t]++;
    parent = top.node;
    tree_.child_lookup_.emplace(ChildKey{parent, t, pos}, NodeId{id});
  }
  tree_.tag_.push_back(t);
  tree_.pos_.push_back(pos);
  tree_.parent_.push_back(parent);
  tree_.end_.push_back(0);
  tree_.data_.emplace_back();
  tree_.max_pos_ = std::max(tree_.max_pos_, pos);
  tree_.height_ = std::max(tree_.height_, stack_.size());
  stack_.push_back(Frame{id, {}});
}

void Hdt::Builder::set_data(std::string data) {
  if (stack_.empty()) throw std::logic_error("Hdt::Builder: no open node");
  const Frame& top = stack_.back();
  if (!top.tag_counts.empty()) {
    throw std::logic_error("Hdt::Builder: internal node cannot carry data");
  }
  tree_.data_[top.node] = std::move(data);
}

void Hdt::Builder::close() {
  if (stack_.empty()) throw std::logic_error("Hdt::Builder: unbalanced close");
  tree_.end_[stack_.back().node] = static_cast<std::uint32_t>(tree_.tag_.size());
  stack_.pop_back();
  if (stack_.empty()) root_done_ = true;
}

void Hdt::Builder::leaf(std::string_view tag, std::string data) {
  open(tag);
  set_data(std::move(data));
  close();
}

std::string_view Hdt::Builder::current_tag() const {
  return tree_.tags_[tree_.tag_[stack_.back().node]];
}

bool Hdt::Builder::current_has_children() const {
  return !stack_.back().tag_counts.empty();
}

bool Hdt::Builder::current_has_child_tag(std::string_view tag) const {
  auto it = tree_.tag_lookup_.find(std::string(tag));
  if (it == tree_.tag_lookup_.end()) return false;
  return stack_.back().tag_counts.contains(it->second);
}

Hdt Hdt::Builder::finish() && {
  if (!stack_.empty()) throw std::logic_error("Hdt::Builder: unclosed nodes");
  if (!root_done_) throw std::logic_error("Hdt::Builder: empty tree");
  Hdt& t = tree_;
  const std::size_t n = t.tag_.size();
  t.child_begin_.assign(n + 1, 0);
  for (std::size_t i = 1; i < n; ++i) ++t.child_begin_[t.parent_[i] + 1];
  for (std::size_t i = 0; i < n; ++i) t.child_begin_[i + 1] += t.child_begin_[i];
  t.child_list_.resize(n > 0 ? n - 1 : 0);
  std::vector<std::uint32_t> fill(t.child_begin_.begin(), t.child_begin_.end() - 1);
  for (std::size_t i = 1; i < n; ++i) {
    t.child_list_[fill[t.parent_[i]]++] = NodeId{static_cast<std::uint32_t>(i)};
  }
  t.tag_index_.assign(t.tags_.size(), {});
  for (std::size_t i = 0; i < n; ++i) {
    t.tag_index_[t.tag_[i]].push_back(NodeId{static_cast<std::uint32_t>(i)});
  }
  return std::move(tree_);
}

// ---------------------------------------------------------------------------

DocumentFormat guess_format(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    if (path.size() < suffix.size()) return false;
    auto tail = path.substr(path.size() - suffix.size());
    return std::equal(tail.begin(), tail.end(), suffix.begin(), [](char a, char b) {
      return std::tolower(static_cast<unsigned char>(a)) == b;
    });
  };
  return ends_with(".json") ? DocumentFormat::kJson : DocumentFormat::kXml;
}

Hdt parse_document(std::string_view document, DocumentFormat format) {
  return format == DocumentFormat::kJson ? parse_json(document)
                                         : parse_xml(document);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

Hdt load_document(const std::string& path, DocumentFormat format) {
  return parse_document(read_file(path), format);
}

}  // namespace treeshred
