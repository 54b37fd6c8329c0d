#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hiaug/io.hpp"

namespace hiaug {

struct DisciplineNode {
  std::string code;
  std::string name;
  std::optional<std::string> parent;  // absent for roots
};

/// Immutable discipline forest. Nodes are held sorted by code so every
/// traversal and serialization is deterministic.
class Taxonomy {
 public:
  static Taxonomy from_nodes(std::vector<DisciplineNode> nodes) {
    Taxonomy t;
    std::sort(nodes.begin(), nodes.end(),
              [](const DisciplineNode& a, const DisciplineNode& b) {
                return a.code < b.code;
              });
    t.nodes_ = std::move(nodes);
    for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
      const auto& node = t.nodes_[i];
      if (node.code.empty()) throw ValidationError("empty discipline code");
      if (!t.index_.emplace(node.code, i).second)
        throw ValidationError("duplicate code " + node.code);
    }
    for (const auto& node : t.nodes_) {
      if (!node.parent) continue;
      if (!t.index_.count(*node.parent))
        throw ValidationError("dangling parent " + *node.parent + " of node " +
                              node.code);
      t.children_[*node.parent].push_back(node.code);
    }
    t.compute_levels();
    return t;
  }

  const std::vector<DisciplineNode>& nodes() const { return nodes_; }

  bool contains(const std::string& code) const { return index_.count(code) > 0; }

  const DisciplineNode& node(const std::string& code) const {
    auto it = index_.find(code);
    if (it == index_.end()) throw ValidationError("unknown code " + code);
    return nodes_[it->second];
  }

  /// Root level is 1.
  int level(const std::string& code) const {
    auto it = level_.find(code);
    if (it == level_.end()) throw ValidationError("unknown code " + code);
    return it->second;
  }

  int max_level() const {
    int m = 0;
    for (const auto& [code, lvl] : level_) m = std::max(m, lvl);
    return m;
  }

  /// Codes of direct children, sorted.
  std::vector<std::string> children(const std::string& code) const {
    node(code);  // existence check
    auto it = children_.find(code);
    if (it == children_.end()) return {};
    return it->second;
  }

  /// Ancestor codes, nearest first, excluding the node itself.
  std::vector<std::string> ancestors(const std::string& code) const {
    std::vector<std::string> out;
    const DisciplineNode* cur = &node(code);
    while (cur->parent) {
      out.push_back(*cur->parent);
      cur = &node(*cur->parent);
    }
    return out;
  }

  /// Codes with no children, sorted.
  std::vector<std::string> leaves() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
      if (!children_.count(n.code)) out.push_back(n.code);
    return out;
  }

  std::vector<std::string> codes() const {
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n.code);
    return out;
  }

  bool is_leaf(const std::string& code) const {
    node(code);
    return !children_.count(code);
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  void compute_levels() {
    // Walk each node's parent chain until a root or an already-leveled node;
    // a chain longer than the node count can only mean a cycle.
    for (const auto& n : nodes_) {
      if (level_.count(n.code)) continue;
      std::vector<const DisciplineNode*> path;
      const DisciplineNode* cur = &n;
      while (!level_.count(cur->code)) {
        if (path.size() > nodes_.size())
          throw ValidationError("cycle detected at " + n.code);
        path.push_back(cur);
        if (!cur->parent) break;
        if (*cur->parent == cur->code)
          throw ValidationError("cycle detected at " + cur->code);
        cur = &nodes_[index_.at(*cur->parent)];
      }
      int base = 0;
      if (auto it = level_.find(cur->code); it != level_.end()) base = it->second;
      for (auto rit = path.rbegin(); rit != path.rend(); ++rit) {
        const DisciplineNode* p = *rit;
        base = p->parent ? base + 1 : 1;
        level_.emplace(p->code, base);
      }
    }
  }

  std::vector<DisciplineNode> nodes_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> children_;  // sorted values
  std::map<std::string, int> level_;
};

// File format: UTF-8, one JSON object per line:
//   {"code": "...", "name": "...", "parent": "..."|null}

inline Taxonomy load_taxonomy(std::istream& in) {
  std::vector<DisciplineNode> nodes;
  for_each_jsonl(in, [&](std::size_t line_no, const json& record) {
    DisciplineNode node;
    try {
      node.code = record.at("code").get<std::string>();
      node.name = record.value("name", node.code);
      if (record.contains("parent") && !record["parent"].is_null())
        node.parent = record["parent"].get<std::string>();
    } catch (const json::exception& e) {
      throw ValidationError("taxonomy line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    nodes.push_back(std::move(node));
  });
  return Taxonomy::from_nodes(std::move(nodes));
}

inline Taxonomy load_taxonomy_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_taxonomy(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void save_taxonomy(const Taxonomy& t, std::ostream& out) {
  for (const auto& n : t.nodes()) {
    json record{{"code", n.code}, {"name", n.name}};
    record["parent"] = n.parent ? json(*n.parent) : json(nullptr);
    out << record.dump() << '\n';
  }
}

}  // namespace hiaug
