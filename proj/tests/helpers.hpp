#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hiaug/corpus.hpp"
#include "hiaug/taxonomy.hpp"

namespace testutil {

using namespace hiaug;

inline Taxonomy make_taxonomy(
    const std::vector<std::tuple<std::string, std::string>>& code_parent) {
  std::vector<DisciplineNode> nodes;
  for (const auto& [code, parent] : code_parent) {
    DisciplineNode node;
    node.code = code;
    node.name = "Name of " + code;
    if (!parent.empty()) node.parent = parent;
    nodes.push_back(std::move(node));
  }
  return Taxonomy::from_nodes(std::move(nodes));
}

/// Random forest with numbered codes; parents always point at earlier
/// nodes, so the result is acyclic by construction.
inline Taxonomy random_forest(Rng& rng, std::size_t n, double root_prob = 0.3) {
  std::vector<DisciplineNode> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    DisciplineNode node;
    std::string num = std::to_string(i);
    node.code = "N" + std::string(num.size() < 3 ? 3 - num.size() : 0, '0') + num;
    node.name = "Node " + num;
    if (i > 0 && rng.next_unit() >= root_prob)
      node.parent = nodes[rng.next_below(i)].code;
    nodes.push_back(std::move(node));
  }
  return Taxonomy::from_nodes(std::move(nodes));
}

inline Proposal make_proposal(std::string id, std::set<std::string> labels,
                              std::string abstract = "some abstract text here",
                              Source source = Source::original) {
  Proposal p;
  p.id = std::move(id);
  p.title = "Title of " + p.id;
  p.abstract = std::move(abstract);
  p.labels = std::move(labels);
  p.source = source;
  if (source == Source::generated)
    p.provenance = Provenance{"hash", "model", 1};
  return p;
}

inline std::string corpus_to_string(const LabeledCorpus& corpus) {
  std::ostringstream out;
  save_corpus(corpus, out);
  return out.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("hiaug_test_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace testutil
