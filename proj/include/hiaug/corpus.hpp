#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "hiaug/common.hpp"
#include "hiaug/taxonomy.hpp"
#include "hiaug/text.hpp"

namespace hiaug {

enum class Source { original, generated };

inline std::string to_string(Source s) {
  return s == Source::original ? "original" : "generated";
}

struct Provenance {
  std::string prompt_hash;
  std::string model;
  std::uint64_t seed = 0;

  bool operator==(const Provenance&) const = default;
};

struct Proposal {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  std::set<std::string> labels;
  Source source = Source::original;
  std::optional<Provenance> provenance;  // present iff source == generated

  bool operator==(const Proposal&) const = default;
};

inline void check_proposal(const Proposal& p) {
  if (p.id.empty()) throw ValidationError("proposal with empty id");
  if (p.labels.empty())
    throw ValidationError("proposal " + p.id + ": empty label set");
  if ((p.source == Source::generated) != p.provenance.has_value())
    throw ValidationError("proposal " + p.id +
                          ": provenance must be present exactly when source "
                          "is generated");
}

/// Immutable ordered collection of proposals. Mutating operations return
/// new corpora.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;

  static LabeledCorpus from_proposals(std::vector<Proposal> proposals) {
    LabeledCorpus c;
    c.proposals_ = std::move(proposals);
    for (std::size_t i = 0; i < c.proposals_.size(); ++i) {
      const auto& p = c.proposals_[i];
      check_proposal(p);
      if (!c.by_id_.emplace(p.id, i).second)
        throw ValidationError("duplicate id " + p.id);
    }
    return c;
  }

  const std::vector<Proposal>& proposals() const { return proposals_; }
  std::size_t size() const { return proposals_.size(); }
  bool empty() const { return proposals_.empty(); }
  const Proposal& operator[](std::size_t i) const { return proposals_[i]; }
  auto begin() const { return proposals_.begin(); }
  auto end() const { return proposals_.end(); }

  bool contains_id(const std::string& id) const { return by_id_.count(id) > 0; }

  const Proposal& by_id(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw ValidationError("unknown proposal id " + id);
    return proposals_[it->second];
  }

  void validate_labels(const Taxonomy& t) const {
    for (const auto& p : proposals_)
      for (const auto& label : p.labels)
        if (!t.contains(label))
          throw ValidationError("proposal " + p.id + ": unknown label code " +
                                label);
  }

 private:
  std::vector<Proposal> proposals_;
  std::map<std::string, std::size_t> by_id_;
};

enum class CountingMode { direct, closure };

inline std::string to_string(CountingMode m) {
  return m == CountingMode::direct ? "direct" : "closure";
}

inline CountingMode counting_mode_from(const std::string& s) {
  if (s == "direct") return CountingMode::direct;
  if (s == "closure") return CountingMode::closure;
  throw ConfigError("unknown counting mode '" + s + "' (expected closure|direct)");
}

struct ClassCounts {
  std::map<std::string, std::int64_t> counts;  // every taxonomy code present
  CountingMode mode = CountingMode::closure;
};

/// Union of a proposal's labels with all their taxonomy ancestors.
inline std::set<std::string> label_closure(const std::set<std::string>& labels,
                                           const Taxonomy& t) {
  std::set<std::string> out;
  for (const auto& label : labels) {
    out.insert(label);
    for (const auto& anc : t.ancestors(label)) out.insert(anc);
  }
  return out;
}

inline std::set<std::string> label_closure(const Proposal& p, const Taxonomy& t) {
  return label_closure(p.labels, t);
}

inline ClassCounts count_per_class(const LabeledCorpus& corpus,
                                   const Taxonomy& t, CountingMode mode) {
  ClassCounts result;
  result.mode = mode;
  for (const auto& code : t.codes()) result.counts[code] = 0;
  for (const auto& p : corpus) {
    const std::set<std::string>& effective =
        mode == CountingMode::direct ? p.labels : label_closure(p, t);
    for (const auto& code : effective) {
      auto it = result.counts.find(code);
      if (it == result.counts.end())
        throw ValidationError("proposal " + p.id + ": unknown label code " + code);
      ++it->second;
    }
  }
  return result;
}

struct AppendResult {
  LabeledCorpus corpus;
  std::int64_t appended = 0;
  std::int64_t dropped = 0;
};

/// Appends generated proposals after the originals. Proposals whose
/// normalized abstract already occurs (in the corpus or earlier in the
/// batch) are dropped, as are repeats of an already-appended generated id.
/// Colliding with an original id is an error.
inline AppendResult append_generated(const LabeledCorpus& corpus,
                                     const std::vector<Proposal>& generated) {
  std::unordered_set<std::uint64_t> seen_abstracts;
  for (const auto& p : corpus) seen_abstracts.insert(dedupe_key(p.abstract));

  std::vector<Proposal> merged(corpus.begin(), corpus.end());
  std::set<std::string> generated_ids;
  AppendResult result;

  for (const auto& gen : generated) {
    check_proposal(gen);
    if (gen.source != Source::generated)
      throw ValidationError("proposal " + gen.id +
                            ": append_generated requires source=generated");
    if (!seen_abstracts.insert(dedupe_key(gen.abstract)).second) {
      ++result.dropped;
      continue;
    }
    if (corpus.contains_id(gen.id)) {
      const auto& existing = corpus.by_id(gen.id);
      if (existing.source == Source::original)
        throw ValidationError("generated proposal id " + gen.id +
                              " collides with an original proposal");
      ++result.dropped;
      continue;
    }
    if (!generated_ids.insert(gen.id).second) {
      ++result.dropped;
      continue;
    }
    merged.push_back(gen);
    ++result.appended;
  }
  result.corpus = LabeledCorpus::from_proposals(std::move(merged));
  return result;
}

struct SplitResult {
  LabeledCorpus train;
  LabeledCorpus test;
};

/// Deterministic stratified split. Each proposal's stratum is its
/// lexicographically smallest leaf label (smallest label if none is a
/// leaf); strata with fewer than 2 members go entirely to train, and
/// generated proposals never enter the test set.
inline SplitResult split(const LabeledCorpus& corpus, double test_fraction,
                         std::uint64_t seed, const Taxonomy& t) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test fraction must lie in (0, 1)");
  if (corpus.size() < 2)
    throw ValidationError("split requires a corpus of at least 2 proposals");

  auto stratum_of = [&](const Proposal& p) -> std::string {
    std::string fallback;
    for (const auto& label : p.labels) {
      if (fallback.empty()) fallback = label;
      if (t.contains(label) && t.is_leaf(label)) return label;
    }
    return fallback;
  };

  // stratum -> ids of original proposals, sorted for determinism
  std::map<std::string, std::vector<std::string>> strata;
  for (const auto& p : corpus) {
    if (p.source != Source::original) continue;
    strata[stratum_of(p)].push_back(p.id);
  }

  std::set<std::string> test_ids;
  for (auto& [stratum, ids] : strata) {
    if (ids.size() < 2) continue;
    std::sort(ids.begin(), ids.end());
    auto take = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(ids.size())));
    take = std::min(take, ids.size() - 1);
    Rng rng(derive_seed(seed, stratum));
    rng.shuffle(ids);
    for (std::size_t i = 0; i < take; ++i) test_ids.insert(ids[i]);
  }

  std::vector<Proposal> train, test;
  for (const auto& p : corpus) {
    if (test_ids.count(p.id))
      test.push_back(p);
    else
      train.push_back(p);
  }
  return {LabeledCorpus::from_proposals(std::move(train)),
          LabeledCorpus::from_proposals(std::move(test))};
}

// JSONL schema: {"id", "title", "abstract", "keywords": [...],
// "labels": [...], "source": "original"|"generated",
// "provenance": {"prompt_hash", "model", "seed"}} — provenance only on
// generated records. A leading {"_meta": {...}} line is tolerated and
// skipped so artifact files can carry their config hash and seed.

inline json proposal_to_json(const Proposal& p) {
  json record{{"id", p.id},
              {"title", p.title},
              {"abstract", p.abstract},
              {"keywords", p.keywords},
              {"labels", std::vector<std::string>(p.labels.begin(), p.labels.end())},
              {"source", to_string(p.source)}};
  if (p.provenance)
    record["provenance"] = json{{"prompt_hash", p.provenance->prompt_hash},
                                {"model", p.provenance->model},
                                {"seed", p.provenance->seed}};
  return record;
}

inline Proposal proposal_from_json(const json& record) {
  Proposal p;
  p.id = record.at("id").get<std::string>();
  p.title = record.value("title", "");
  p.abstract = record.value("abstract", "");
  if (record.contains("keywords"))
    p.keywords = record["keywords"].get<std::vector<std::string>>();
  for (const auto& label : record.at("labels"))
    p.labels.insert(label.get<std::string>());
  const std::string source = record.value("source", "original");
  if (source == "original") {
    p.source = Source::original;
  } else if (source == "generated") {
    p.source = Source::generated;
  } else {
    throw ValidationError("proposal " + p.id + ": unknown source '" + source + "'");
  }
  if (record.contains("provenance") && !record["provenance"].is_null()) {
    const auto& prov = record["provenance"];
    p.provenance = Provenance{prov.value("prompt_hash", ""),
                              prov.value("model", ""),
                              prov.value("seed", std::uint64_t{0})};
  }
  return p;
}

inline LabeledCorpus load_corpus(std::istream& in, const Taxonomy& t) {
  std::vector<Proposal> proposals;
  for_each_jsonl(in, [&](std::size_t line_no, const json& record) {
    if (record.contains("_meta")) return;  // artifact header line
    try {
      proposals.push_back(proposal_from_json(record));
    } catch (const json::exception& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  });
  auto corpus = LabeledCorpus::from_proposals(std::move(proposals));
  corpus.validate_labels(t);
  return corpus;
}

inline LabeledCorpus load_corpus_file(const std::string& path, const Taxonomy& t) {
  auto in = open_input(path);
  try {
    return load_corpus(in, t);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void save_corpus(const LabeledCorpus& corpus, std::ostream& out,
                        const json* meta = nullptr) {
  if (meta) out << json{{"_meta", *meta}}.dump() << '\n';
  for (const auto& p : corpus) out << proposal_to_json(p).dump() << '\n';
}

inline void save_corpus_file(const LabeledCorpus& corpus, const std::string& path,
                             const json* meta = nullptr) {
  auto out = open_output(path);
  save_corpus(corpus, out, meta);
}

}  // namespace hiaug
