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

#ifndef TREESHRED_HDT_HPP_
#define TREESHRED_HDT_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace treeshred {

// Dense preorder index of a node inside one Hdt.
struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

using TagId = std::uint32_t;

// Malformed input document. Line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Well-formed input that cannot be mapped onto the tree model.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hierarchical data tree: every node is a (tag, pos, data) triple where pos is
// the node's rank among same-tag siblings and only leaves carry data.
//
// Immutable once built. NodeIds are assigned in preorder, so the subtree of n
// is the contiguous id range [n, subtree_end(n)).
class Hdt {
 public:
  class Builder;

  NodeId root() const { return NodeId{0}; }
  std::size_t size() const { return tag_.size(); }
  bool contains(NodeId n) const { return n.value < tag_.size(); }

  TagId tag_id(NodeId n) const { return tag_[check(n)]; }
  std::string_view tag(NodeId n) const { return tags_[tag_[check(n)]]; }
  std::uint32_t pos(NodeId n) const { return pos_[check(n)]; }
  const std::optional<std::string>& data(NodeId n) const {
    return data_[check(n)];
  }
  bool is_leaf(NodeId n) const {
    return child_begin_[check(n) + 1] == child_begin_[n.value];
  }

  std::optional<NodeId> parent(NodeId n) const;
  std::span<const NodeId> children(NodeId n) const;
  // Children of n carrying `tag`, in document order.
  std::vector<NodeId> children(NodeId n, TagId tag) const;
  std::vector<NodeId> children(NodeId n, std::string_view tag) const;
  std::optional<NodeId> child(NodeId n, TagId tag, std::uint32_t pos) const;
  std::optional<NodeId> child(NodeId n, std::string_view tag,
                              std::uint32_t pos) const;

  // Exclusive upper bound of n's preorder subtree range.
  NodeId subtree_end(NodeId n) const { return NodeId{end_[check(n)]}; }
  // Proper descendants of n carrying `tag`, in document order.
  std::span<const NodeId> descendants(NodeId n, TagId tag) const;
  std::span<const NodeId> nodes_with_tag(TagId tag) const;

  std::optional<TagId> find_tag(std::string_view tag) const;
  const std::vector<std::string>& tags() const { return tags_; }
  // Number of edges on the longest root-to-leaf path.
  std::size_t height() const { return height_; }
  std::uint32_t max_pos() const { return max_pos_; }
  std::size_t depth(NodeId n) const;

 private:
  std::uint32_t check(NodeId n) const;

  std::vector<std::string> tags_;
  std::unordered_map<std::string, TagId> tag_lookup_;
  std::vector<TagId> tag_;
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> parent_;  // kNoParent for the root
  std::vector<std::uint32_t> end_;
  std::vector<std::optional<std::string>> data_;
  std::vector<std::uint32_t> child_begin_;  // CSR offsets, size()+1 entries
  std::vector<NodeId> child_list_;
  std::vector<std::vector<NodeId>> tag_index_;
  struct ChildKey {
    std::uint32_t parent;
    TagId tag;
    std::uint32_t pos;
    friend bool operator==(const ChildKey&, const ChildKey&) = default;
  };
  struct ChildKeyHash {
    std::size_t operator()(const ChildKey& k) const noexcept;
  };
  std::unordered_map<ChildKey, NodeId, ChildKeyHash> child_lookup_;
  std::size_t height_ = 0;
  std::uint32_t max_pos_ = 0;
};

// Preorder construction of an Hdt. open()/close() must nest; data may only be
// attached to a node that ends up without children.
class Hdt::Builder {
 public:
  void open(std::string_view tag);
  void set_data(std::string data);
  void close();
  void leaf(std::string_view tag, std::string data);

  // Tag of the innermost open node.
  std::string_view current_tag() const;
  bool current_has_children() const;
  bool current_has_child_tag(std::string_view tag) const;
  std::size_t open_depth() const { return stack_.size(); }

  Hdt finish() &&;

 private:
  struct Frame {
    std::uint32_t node;
    std::unordered_map<TagId, std::uint32_t> tag_counts;
  };

  TagId intern(std::string_view tag);

  Hdt tree_;
  std::vector<Frame> stack_;
  bool root_done_ = false;
};

Hdt parse_xml(std::string_view document);
Hdt parse_json(std::string_view document);

enum class DocumentFormat { kXml, kJson };

// Picks the format from the file extension; anything but ".json" is XML.
DocumentFormat guess_format(std::string_view path);
Hdt parse_document(std::string_view document, DocumentFormat format);
Hdt load_document(const std::string& path, DocumentFormat format);
std::string read_file(const std::string& path);

}  // namespace treeshred

template <>
struct std::hash<treeshred::NodeId> {
  std::size_t operator()(treeshred::NodeId n) const noexcept {
    return std::hash<std::uint32_t>{}(n.value);
  }
};

#endif  // TREESHRED_HDT_HPP_
