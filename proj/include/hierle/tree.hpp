#pragma once

// Rooted class taxonomy: parsing, validation, layered node order, paths and
// latest-common-ancestor layers.
//
// Nodes are stored in breadth-first order (layer by layer, left to right
// within a layer, children in document order). Index 0 is the root, so the
// index of a non-root node is exactly its 1-based position in the node order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace hierle {

using NodeIndex = std::size_t;

enum class TaxonomyErrorKind {
  syntax,
  duplicate_id,
  single_child,
  cycle,
  multiple_roots,
  unknown_parent,
  unknown_node,
  not_a_leaf,
};

inline const char* to_string(TaxonomyErrorKind kind) {
  switch (kind) {
    case TaxonomyErrorKind::syntax: return "syntax";
    case TaxonomyErrorKind::duplicate_id: return "duplicate id";
    case TaxonomyErrorKind::single_child: return "single child";
    case TaxonomyErrorKind::cycle: return "cycle";
    case TaxonomyErrorKind::multiple_roots: return "multiple roots";
    case TaxonomyErrorKind::unknown_parent: return "unknown parent";
    case TaxonomyErrorKind::unknown_node: return "unknown node";
    case TaxonomyErrorKind::not_a_leaf: return "not a leaf";
  }
  return "unknown";
}

class TaxonomyError : public std::runtime_error {
 public:
  TaxonomyError(TaxonomyErrorKind kind, const std::string& message, std::size_t line = 0)
      : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line) {}

  TaxonomyErrorKind kind() const noexcept { return kind_; }
  /// 1-based document line, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(TaxonomyErrorKind kind, const std::string& message, std::size_t line) {
    std::string out = "taxonomy error (";
    out += to_string(kind);
    out += ")";
    if (line > 0) out += " at line " + std::to_string(line);
    out += ": " + message;
    return out;
  }

  TaxonomyErrorKind kind_;
  std::size_t line_;
};

/// Root-to-leaf sequence of node indices, root included.
struct Path {
  std::vector<NodeIndex> nodes;

  std::size_t length() const noexcept { return nodes.size(); }
  NodeIndex leaf() const { return nodes.back(); }
  friend bool operator==(const Path&, const Path&) = default;
};

class Tree {
 public:
  /// Builds a tree from (parent, children) groups in top-down order. The
  /// first group's parent is the root; children order within a group is the
  /// left-to-right order. Error line numbers are 1-based group positions.
  static Tree from_groups(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups);

  static constexpr NodeIndex root() noexcept { return 0; }

  /// Number of nodes including the root.
  std::size_t size() const noexcept { return ids_.size(); }
  /// Number of non-root nodes (q).
  std::size_t non_root_count() const noexcept { return ids_.size() - 1; }
  /// Number of layers (k); the root alone is layer 1.
  int depth() const noexcept { return depth_; }
  std::size_t leaf_count() const noexcept { return leaves_.size(); }

  const std::string& id(NodeIndex n) const { return ids_.at(n); }
  std::optional<NodeIndex> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  NodeIndex index_of(std::string_view id) const {
    auto found = find(id);
    if (!found) throw TaxonomyError(TaxonomyErrorKind::unknown_node, "no node named '" + std::string(id) + "'");
    return *found;
  }

  /// Parent of a non-root node. The root's parent is itself.
  NodeIndex parent(NodeIndex n) const { return parent_.at(n); }
  std::span<const NodeIndex> children(NodeIndex n) const { return children_.at(n); }
  std::size_t child_count(NodeIndex n) const { return children_.at(n).size(); }
  /// 0-based position of `n` among its siblings.
  std::size_t sibling_position(NodeIndex n) const { return position_.at(n); }
  int layer(NodeIndex n) const { return layer_.at(n); }
  bool is_leaf(NodeIndex n) const { return children_.at(n).empty(); }
  /// Leaves in node order.
  std::span<const NodeIndex> leaves() const noexcept { return leaves_; }
  /// Non-root nodes in layered left-to-right order; node_order()[i] == i + 1.
  std::vector<NodeIndex> node_order() const {
    std::vector<NodeIndex> order(non_root_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
    return order;
  }
  /// Node count of the subtree rooted at `n`, `n` included.
  std::size_t subtree_size(NodeIndex n) const { return subtree_size_.at(n); }

  /// Ancestor of `n` located at layer `l` (a node is its own ancestor at its layer).
  NodeIndex ancestor_at(NodeIndex n, int l) const {
    check(n);
    if (l < 1 || l > layer_[n]) throw std::out_of_range("ancestor_at: layer out of range");
    while (layer_[n] > l) n = parent_[n];
    return n;
  }

  bool is_ancestor_or_self(NodeIndex a, NodeIndex b) const {
    check(a);
    check(b);
    return layer_[a] <= layer_[b] && ancestor_at(b, layer_[a]) == a;
  }

  /// Canonical taxonomy document: one line per non-leaf node in node order.
  std::string to_document() const {
    std::string out;
    for (NodeIndex n = 0; n < size(); ++n) {
      if (is_leaf(n)) continue;
      out += ids_[n];
      out += ':';
      for (NodeIndex c : children_[n]) {
        out += ' ';
        out += ids_[c];
      }
      out += '\n';
    }
    return out;
  }

  /// FNV-1a 64-bit hash of the canonical document, as 16 hex digits.
  std::string hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_document()) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = digits[h & 0xF];
      h >>= 4;
    }
    return out;
  }

  void check(NodeIndex n) const {
    if (n >= ids_.size()) throw TaxonomyError(TaxonomyErrorKind::unknown_node, "node index " + std::to_string(n) + " out of range");
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<NodeIndex> parent_;
  std::vector<std::vector<NodeIndex>> children_;
  std::vector<std::size_t> position_;
  std::vector<int> layer_;
  std::vector<NodeIndex> leaves_;
  std::vector<std::size_t> subtree_size_;
  int depth_ = 1;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline Tree Tree::from_groups(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups) {
  if (groups.empty()) throw TaxonomyError(TaxonomyErrorKind::syntax, "empty taxonomy");

  // Lines are read top-down: every parent other than the root must already
  // have been introduced as a child on an earlier line.
  std::unordered_map<std::string, std::vector<std::string>> kids;
  std::unordered_map<std::string, std::string> parent_of;
  std::unordered_set<std::string> mentioned_as_child;
  for (const auto& g : groups)
    for (const auto& c : g.second) mentioned_as_child.insert(c);
  const std::string& root_id = groups.front().first;
  auto is_ancestor_or_self = [&](const std::string& anc, std::string node) {
    for (;;) {
      if (node == anc) return true;
      auto it = parent_of.find(node);
      if (it == parent_of.end()) return false;
      node = it->second;
    }
  };
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& [p, cs] = groups[g];
    if (g > 0 && !parent_of.contains(p)) {
      if (p == root_id)
        throw TaxonomyError(TaxonomyErrorKind::duplicate_id, "children of '" + p + "' declared twice", g + 1);
      if (mentioned_as_child.contains(p))
        throw TaxonomyError(TaxonomyErrorKind::unknown_parent, "'" + p + "' is used as a parent before it is declared as a child", g + 1);
      throw TaxonomyError(TaxonomyErrorKind::multiple_roots, "'" + p + "' has no parent and is not the root '" + root_id + "'", g + 1);
    }
    if (cs.empty()) throw TaxonomyError(TaxonomyErrorKind::syntax, "node '" + p + "' lists no children", g + 1);
    if (cs.size() == 1)
      throw TaxonomyError(TaxonomyErrorKind::single_child, "node '" + p + "' has exactly one child", g + 1);
    if (!kids.emplace(p, cs).second)
      throw TaxonomyError(TaxonomyErrorKind::duplicate_id, "children of '" + p + "' declared twice", g + 1);
    for (const auto& c : cs) {
      if (c == root_id || is_ancestor_or_self(c, p))
        throw TaxonomyError(TaxonomyErrorKind::cycle, "'" + c + "' is listed as a child of its own descendant '" + p + "'", g + 1);
      if (!parent_of.emplace(c, p).second)
        throw TaxonomyError(TaxonomyErrorKind::duplicate_id, "node '" + c + "' appears more than once", g + 1);
    }
  }

  Tree t;
  t.ids_.push_back(root_id);
  t.parent_.push_back(0);
  t.layer_.push_back(1);
  t.position_.push_back(0);
  t.children_.emplace_back();
  for (NodeIndex head = 0; head < t.ids_.size(); ++head) {
    auto it = kids.find(t.ids_[head]);
    if (it == kids.end()) continue;
    for (std::size_t j = 0; j < it->second.size(); ++j) {
      NodeIndex c = t.ids_.size();
      t.ids_.push_back(it->second[j]);
      t.parent_.push_back(head);
      t.layer_.push_back(t.layer_[head] + 1);
      t.position_.push_back(j);
      t.children_.emplace_back();
      t.children_[head].push_back(c);
    }
  }
  for (NodeIndex n = 0; n < t.ids_.size(); ++n) {
    t.index_.emplace(t.ids_[n], n);
    if (t.children_[n].empty()) t.leaves_.push_back(n);
    t.depth_ = std::max(t.depth_, t.layer_[n]);
  }
  t.subtree_size_.assign(t.ids_.size(), 1);
  for (NodeIndex n = t.ids_.size(); n-- > 1;) t.subtree_size_[t.parent_[n]] += t.subtree_size_[n];
  return t;
}

/// Parses the adjacency document: one `parent: child child ...` line per
/// non-leaf node, the first line's parent being the root. Blank lines and
/// `#` comments are ignored.
inline Tree parse_tree(std::string_view text) {
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  std::vector<std::size_t> line_of_group;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw TaxonomyError(TaxonomyErrorKind::syntax, "expected 'parent: child child ...'", line_no);
    auto parent = detail::trim(line.substr(0, colon));
    if (parent.empty() || parent.find_first_of(" \t") != std::string_view::npos)
      throw TaxonomyError(TaxonomyErrorKind::syntax, "parent id must be a single non-empty token", line_no);
    std::vector<std::string> children;
    std::istringstream in{std::string(line.substr(colon + 1))};
    for (std::string tok; in >> tok;) {
      if (tok.find(':') != std::string::npos)
        throw TaxonomyError(TaxonomyErrorKind::syntax, "unexpected ':' in child list", line_no);
      children.push_back(std::move(tok));
    }
    groups.emplace_back(std::string(parent), std::move(children));
    line_of_group.push_back(line_no);
  }
  try {
    return Tree::from_groups(groups);
  } catch (const TaxonomyError& e) {
    // Re-anchor group-relative positions to document lines.
    if (e.line() == 0 || e.line() > line_of_group.size()) throw;
    std::string msg = e.what();
    auto colon = msg.find(": ");
    throw TaxonomyError(e.kind(), colon == std::string::npos ? msg : msg.substr(colon + 2), line_of_group[e.line() - 1]);
  }
}

/// Layer of the latest common ancestor of `a` and `b`.
inline int llca(const Tree& tree, NodeIndex a, NodeIndex b) {
  tree.check(a);
  tree.check(b);
  int la = tree.layer(a), lb = tree.layer(b);
  while (la > lb) { a = tree.parent(a); --la; }
  while (lb > la) { b = tree.parent(b); --lb; }
  while (a != b) {
    a = tree.parent(a);
    b = tree.parent(b);
    --la;
  }
  return la;
}

inline Path path_of_leaf(const Tree& tree, NodeIndex leaf) {
  tree.check(leaf);
  if (!tree.is_leaf(leaf)) throw TaxonomyError(TaxonomyErrorKind::not_a_leaf, "'" + tree.id(leaf) + "' is not a leaf");
  Path p;
  p.nodes.resize(static_cast<std::size_t>(tree.layer(leaf)));
  for (NodeIndex n = leaf;; n = tree.parent(n)) {
    p.nodes[static_cast<std::size_t>(tree.layer(n) - 1)] = n;
    if (n == Tree::root()) break;
  }
  return p;
}

/// All root-to-leaf paths, in leaf node order.
inline std::vector<Path> all_paths(const Tree& tree) {
  std::vector<Path> out;
  out.reserve(tree.leaf_count());
  for (NodeIndex leaf : tree.leaves()) out.push_back(path_of_leaf(tree, leaf));
  return out;
}

/// Slash-joined node ids of a path, e.g. `C_1/C_1_2/C_1_2_1`.
inline std::string format_path(const Tree& tree, const Path& path) {
  std::string out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (i) out += '/';
    out += tree.id(path.nodes[i]);
  }
  return out;
}

/// Inverse of format_path; validates that consecutive nodes are parent/child
/// and that the path runs from the root to a leaf.
inline Path parse_path(const Tree& tree, std::string_view text) {
  Path p;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto slash = text.find('/', pos);
    auto tok = detail::trim(text.substr(pos, slash == std::string_view::npos ? std::string_view::npos : slash - pos));
    p.nodes.push_back(tree.index_of(tok));
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  if (p.nodes.front() != Tree::root())
    throw TaxonomyError(TaxonomyErrorKind::unknown_node, "path '" + std::string(text) + "' does not start at the root");
  for (std::size_t i = 1; i < p.nodes.size(); ++i)
    if (tree.parent(p.nodes[i]) != p.nodes[i - 1] || p.nodes[i] == Tree::root())
      throw TaxonomyError(TaxonomyErrorKind::unknown_node, "path '" + std::string(text) + "' is not a chain of children");
  if (!tree.is_leaf(p.nodes.back()))
    throw TaxonomyError(TaxonomyErrorKind::not_a_leaf, "path '" + std::string(text) + "' does not end at a leaf");
  return p;
}

}  // namespace hierle
