#pragma once

#include <string>
#include <vector>

#include "hiaug/corpus.hpp"
#include "hiaug/promptgen.hpp"

namespace hiaug {

/// Desk-scale stand-in for a proprietary proposal corpus: a two-level
/// taxonomy with class-conditional unigram documents and controllable
/// imbalance via the per-leaf document profile.
struct SynthConfig {
  std::vector<std::int64_t> profile;  // docs per leaf, leaf order
  int vocab_size = 84;
  std::uint64_t seed = 0;
  int doc_words_min = 60;
  int doc_words_max = 100;
  double shared_mass = 0.3;      // chance a token comes from the shared block
  double sibling_overlap = 0.4;  // non-first leaves borrow this much from the
                                 // first leaf of their family
  int leaves_per_root = 3;

  void check() const {
    if (profile.empty()) throw ConfigError("synth profile is empty");
    bool any = false;
    for (auto n : profile) {
      if (n < 0) throw ConfigError("synth profile has a negative count");
      if (n > 0) any = true;
    }
    if (!any) throw ConfigError("degenerate synth profile: all counts zero");
    if (leaves_per_root < 1) throw ConfigError("leaves_per_root must be >= 1");
    if (doc_words_min < 1 || doc_words_max < doc_words_min)
      throw ConfigError("invalid document length range");
    if (!(shared_mass >= 0.0 && shared_mass < 1.0))
      throw ConfigError("shared_mass must lie in [0, 1)");
    if (!(sibling_overlap >= 0.0 && sibling_overlap < 1.0))
      throw ConfigError("sibling_overlap must lie in [0, 1)");
    const auto blocks = static_cast<int>(profile.size()) + 1;
    if (vocab_size < 8 * blocks)
      throw ConfigError("vocab_size too small: need at least " +
                        std::to_string(8 * blocks));
  }
};

struct SynthOutput {
  Taxonomy taxonomy;
  LabeledCorpus corpus;
  KeywordTable keywords;
};

namespace detail {

/// Pronounceable pseudo-word for index i: three syllables from the base-20
/// expansion. Distinct indices give distinct words.
inline std::string synth_word(std::size_t i) {
  static const char* syllables[20] = {"ba", "ce", "di", "fo", "gu", "ha", "je",
                                      "ki", "lo", "mu", "na", "pe", "qi", "ro",
                                      "su", "ta", "ve", "wi", "xo", "zu"};
  std::string word;
  word += syllables[i % 20];
  word += syllables[(i / 20) % 20];
  word += syllables[(i / 400) % 20];
  return word;
}

}  // namespace detail

inline SynthOutput synth_corpus(const SynthConfig& cfg) {
  cfg.check();
  const auto n_leaves = static_cast<int>(cfg.profile.size());
  const int n_roots = (n_leaves + cfg.leaves_per_root - 1) / cfg.leaves_per_root;
  if (n_roots > 26) throw ConfigError("profile needs more than 26 root families");

  // Codes: roots "A", "B", ...; leaves "A01".."A03", "B01", ...
  std::vector<DisciplineNode> nodes;
  std::vector<std::string> leaf_codes;
  for (int r = 0; r < n_roots; ++r) {
    std::string root(1, static_cast<char>('A' + r));
    nodes.push_back(DisciplineNode{root, "Field " + root, std::nullopt});
    for (int l = 0; l < cfg.leaves_per_root; ++l) {
      const int leaf_index = r * cfg.leaves_per_root + l;
      if (leaf_index >= n_leaves) break;
      std::string code = root + (l + 1 < 10 ? "0" : "") + std::to_string(l + 1);
      nodes.push_back(DisciplineNode{code, "Subfield " + code, root});
      leaf_codes.push_back(code);
    }
  }
  auto taxonomy = Taxonomy::from_nodes(std::move(nodes));

  // Vocabulary blocks: one shared block plus one block per leaf.
  const auto block_count = static_cast<std::size_t>(n_leaves) + 1;
  const auto block_size = static_cast<std::size_t>(cfg.vocab_size) / block_count;
  std::vector<std::vector<std::string>> blocks(block_count);
  std::size_t next_word = 0;
  for (auto& block : blocks)
    for (std::size_t i = 0; i < block_size; ++i)
      block.push_back(detail::synth_word(next_word++));
  const auto& shared = blocks[0];

  Rng rng(cfg.seed);
  auto draw_from = [&](const std::vector<std::string>& block) -> const std::string& {
    return block[rng.next_below(block.size())];
  };

  KeywordTable keywords;
  std::vector<Proposal> proposals;
  std::size_t doc_counter = 0;
  for (int leaf = 0; leaf < n_leaves; ++leaf) {
    const auto& own = blocks[static_cast<std::size_t>(leaf) + 1];
    // Non-first family members lean on the first sibling's vocabulary,
    // which makes them genuinely confusable with it.
    const int family_first = (leaf / cfg.leaves_per_root) * cfg.leaves_per_root;
    const auto& sibling = blocks[static_cast<std::size_t>(family_first) + 1];
    const bool borrows = leaf != family_first;

    std::vector<std::string> kws;
    for (std::size_t k = 0; k + 1 < std::min<std::size_t>(own.size(), 7); k += 2)
      kws.push_back(own[k] + " " + own[k + 1]);
    keywords[leaf_codes[static_cast<std::size_t>(leaf)]] = kws;

    for (std::int64_t d = 0; d < cfg.profile[static_cast<std::size_t>(leaf)]; ++d) {
      const auto n_words = static_cast<std::size_t>(
          rng.next_in(cfg.doc_words_min, cfg.doc_words_max));
      std::vector<std::string> words(n_words);
      for (auto& w : words) {
        if (rng.next_unit() < cfg.shared_mass) {
          w = draw_from(shared);
        } else if (borrows && rng.next_unit() < cfg.sibling_overlap) {
          w = draw_from(sibling);
        } else {
          w = draw_from(own);
        }
      }
      std::vector<std::string> title(5);
      for (auto& w : title) w = draw_from(own);

      Proposal p;
      ++doc_counter;
      std::string num = std::to_string(doc_counter);
      p.id = "d" + std::string(num.size() < 5 ? 5 - num.size() : 0, '0') + num;
      p.title = join(title, " ");
      p.abstract = join(words, " ");
      p.labels = {leaf_codes[static_cast<std::size_t>(leaf)]};
      p.source = Source::original;
      proposals.push_back(std::move(p));
    }
  }

  SynthOutput out{std::move(taxonomy),
                  LabeledCorpus::from_proposals(std::move(proposals)),
                  std::move(keywords)};
  out.corpus.validate_labels(out.taxonomy);
  return out;
}

}  // namespace hiaug
