#include <catch2/catch_amalgamated.hpp>

#include "hiaug/classifier.hpp"
#include "hiaug/experiment.hpp"
#include "hiaug/synth.hpp"
#include "helpers.hpp"

using namespace hiaug;

TEST_CASE("the imbalanced profile produces exact per-class counts") {
  SynthConfig cfg;
  cfg.profile = {200, 200, 200, 200, 10, 10};
  cfg.seed = 42;
  auto out = synth_corpus(cfg);

  CHECK(out.corpus.size() == 820);
  CHECK(out.taxonomy.leaves() ==
        std::vector<std::string>{"A01", "A02", "A03", "B01", "B02", "B03"});
  CHECK(out.taxonomy.size() == 8);  // 2 roots + 6 leaves

  auto counts = count_per_class(out.corpus, out.taxonomy, CountingMode::direct);
  CHECK(counts.counts.at("A01") == 200);
  CHECK(counts.counts.at("B01") == 200);
  CHECK(counts.counts.at("B02") == 10);
  CHECK(counts.counts.at("B03") == 10);
  auto closure = count_per_class(out.corpus, out.taxonomy, CountingMode::closure);
  CHECK(closure.counts.at("A") == 600);
  CHECK(closure.counts.at("B") == 220);

  // keyword table covers every leaf
  for (const auto& leaf : out.taxonomy.leaves())
    CHECK(!out.keywords.at(leaf).empty());
}

TEST_CASE("generation is reproducible per seed") {
  SynthConfig cfg;
  cfg.profile = {30, 30, 5};
  cfg.seed = 7;
  auto a = synth_corpus(cfg);
  auto b = synth_corpus(cfg);
  CHECK(testutil::corpus_to_string(a.corpus) ==
        testutil::corpus_to_string(b.corpus));
  cfg.seed = 8;
  auto c = synth_corpus(cfg);
  CHECK(testutil::corpus_to_string(a.corpus) !=
        testutil::corpus_to_string(c.corpus));
}

TEST_CASE("degenerate profiles are rejected") {
  SynthConfig cfg;
  cfg.seed = 1;
  cfg.profile = {};
  CHECK_THROWS_AS(synth_corpus(cfg), ConfigError);
  cfg.profile = {0, 0, 0};
  CHECK_THROWS_AS(synth_corpus(cfg), ConfigError);
  cfg.profile = {10, -1};
  CHECK_THROWS_AS(synth_corpus(cfg), ConfigError);
}

TEST_CASE("documents draw from their own class vocabulary plus shared mass") {
  SynthConfig cfg;
  cfg.profile = {20, 20, 20};
  cfg.seed = 3;
  cfg.sibling_overlap = 0.0;  // isolate the class blocks
  auto out = synth_corpus(cfg);

  // with zero overlap, two different families never share non-shared tokens:
  // the first leaf of each family uses only its own block and the shared one
  std::map<std::string, std::set<std::string>> class_tokens;
  for (const auto& p : out.corpus)
    for (const auto& tok : tokenize(p.abstract))
      class_tokens[*p.labels.begin()].insert(tok);
  // count tokens exclusive to each class; there must be plenty
  for (const auto& [code, tokens] : class_tokens) {
    int exclusive = 0;
    for (const auto& tok : tokens) {
      bool elsewhere = false;
      for (const auto& [other, other_tokens] : class_tokens)
        if (other != code && other_tokens.count(tok)) elsewhere = true;
      if (!elsewhere) ++exclusive;
    }
    CHECK(exclusive > 10);
  }
}

TEST_CASE("a balanced profile trains a strong baseline") {
  SynthConfig cfg;
  cfg.profile = {80, 80, 80, 80, 80, 80};
  cfg.seed = 7;
  auto out = synth_corpus(cfg);

  auto parts = split(out.corpus, 0.2, derive_seed(7, "split"), out.taxonomy);
  TrainConfig train_cfg;  // defaults
  auto model = train(parts.train, out.taxonomy, train_cfg);
  auto report = evaluate_model(model, parts.test, out.taxonomy,
                                       train_cfg.threshold, false);
  CHECK(report.macro_f1 > 0.9);
}
