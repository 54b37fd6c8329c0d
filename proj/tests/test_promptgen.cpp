#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>

#include "hiaug/promptgen.hpp"
#include "helpers.hpp"

using namespace hiaug;
using testutil::make_taxonomy;

namespace {

PromptSpec astronomy_spec(bool with_keyword) {
  PromptSpec spec;
  spec.discipline_code = "AST01";
  spec.discipline_path = {"Astronomy", "History of Astronomy"};
  if (with_keyword) spec.keywords = {"Astronomical Earth Survey"};
  return spec;
}

/// Byte-compares a rendered prompt against its committed golden file.
/// Setting HIAUG_REGEN_GOLDENS rewrites the goldens instead.
void check_golden(const std::string& name, const std::string& text) {
  const std::string path = std::string(HIAUG_GOLDEN_DIR) + "/" + name;
  if (std::getenv("HIAUG_REGEN_GOLDENS")) {
    testutil::spit(path, text);
    SUCCEED();
    return;
  }
  INFO("golden file: " << path);
  CHECK(text == testutil::slurp(path));
}

}  // namespace

TEST_CASE("keyword prompt matches its golden file") {
  auto prompt = render(astronomy_spec(true));
  CHECK(prompt.text.find("The proposal must be centered on the keywords: "
                         "Astronomical Earth Survey.") != std::string::npos);
  check_golden("astronomy_keyword.golden.txt", prompt.text);
}

TEST_CASE("keyword-free twin matches its golden file and drops the clause") {
  auto with = render(astronomy_spec(true));
  auto without = render(astronomy_spec(false));
  CHECK(without.text.find("centered on the keywords") == std::string::npos);
  // the two prompts differ exactly by the keyword clause
  std::string expected = with.text;
  const std::string clause =
      " The proposal must be centered on the keywords: Astronomical Earth "
      "Survey.";
  auto at = expected.find(clause);
  REQUIRE(at != std::string::npos);
  expected.erase(at, clause.size());
  CHECK(without.text == expected);
  check_golden("astronomy_no_keyword.golden.txt", without.text);
}

TEST_CASE("chinese style preset renders and matches its golden file") {
  auto spec = astronomy_spec(true);
  spec.language_style = "formal-academic-chinese";
  auto prompt = render(spec);
  CHECK(prompt.text.find("Chinese") != std::string::npos);
  check_golden("astronomy_chinese.golden.txt", prompt.text);
}

TEST_CASE("rendering is deterministic") {
  auto a = render(astronomy_spec(true));
  auto b = render(astronomy_spec(true));
  CHECK(a.text == b.text);
  CHECK(a.spec_hash == b.spec_hash);
}

TEST_CASE("equal specs hash equal, different specs hash differently") {
  auto a = render(astronomy_spec(true));
  auto b = render(astronomy_spec(false));
  CHECK(a.spec_hash != b.spec_hash);
  auto spec = astronomy_spec(true);
  spec.lengths.abstract_max_words = 300;
  CHECK(render(spec).spec_hash != a.spec_hash);
}

TEST_CASE("sections appear in order and jointly cover the text") {
  auto spec = astronomy_spec(true);
  spec.seed_exemplar = "An earlier abstract used as stylistic reference.";
  auto prompt = render(spec);
  REQUIRE(prompt.sections.size() == 4);
  const auto& bg = prompt.sections.at("background");
  const auto& pr = prompt.sections.at("principle");
  const auto& fmt = prompt.sections.at("format");
  const auto& style = prompt.sections.at("language_style");
  CHECK(bg.offset == 0);
  CHECK(pr.offset == bg.offset + bg.length);
  CHECK(fmt.offset == pr.offset + pr.length);
  CHECK(style.offset == fmt.offset + fmt.length);
  CHECK(style.offset + style.length == prompt.text.size());
  CHECK(prompt.text.substr(bg.offset, 11) == "Background:");
  CHECK(prompt.text.substr(pr.offset, 10) == "Principle:");
  CHECK(prompt.text.substr(fmt.offset, 7) == "Format:");
  CHECK(prompt.text.substr(style.offset, 15) == "Language Style:");
}

TEST_CASE("format rules are enumerated verbatim") {
  auto spec = astronomy_spec(false);
  spec.format_rules = {"Rule one, exactly.", "Rule two; also exact."};
  auto prompt = render(spec);
  CHECK(prompt.text.find("1. Rule one, exactly.\n") != std::string::npos);
  CHECK(prompt.text.find("2. Rule two; also exact.\n") != std::string::npos);
}

TEST_CASE("keyword clause presence tracks keyword emptiness across a fuzz sweep") {
  Rng rng(24601);
  for (int trial = 0; trial < 200; ++trial) {
    PromptSpec spec;
    spec.discipline_code = "C" + std::to_string(trial);
    spec.discipline_path = {"Root", "Leaf " + std::to_string(trial)};
    const auto n_kws = rng.next_in(0, 4);
    for (std::int64_t k = 0; k < n_kws; ++k)
      spec.keywords.push_back("kw" + std::to_string(rng.next_below(1000)));
    auto prompt = render(spec);
    const bool has_clause =
        prompt.text.find("centered on the keywords") != std::string::npos;
    CHECK(has_clause == !spec.keywords.empty());
  }
}

TEST_CASE("invalid specs are rejected") {
  PromptSpec no_path;
  no_path.discipline_code = "X";
  no_path.discipline_path.clear();
  CHECK_THROWS_AS(render(no_path), ConfigError);

  auto bad_style = astronomy_spec(false);
  bad_style.language_style = "casual-slack-message";
  CHECK_THROWS_AS(render(bad_style), ConfigError);

  auto bad_lengths = astronomy_spec(false);
  bad_lengths.lengths.abstract_min_words = 0;
  CHECK_THROWS_AS(render(bad_lengths), ConfigError);
}

TEST_CASE("keywords_for draws a stable subset") {
  KeywordTable table{{"A01", {"x", "y", "z"}}};
  auto first = keywords_for(table, "A01", 2, 7);
  REQUIRE(first.size() == 2);
  CHECK(keywords_for(table, "A01", 2, 7) == first);
  for (const auto& kw : first)
    CHECK((kw == "x" || kw == "y" || kw == "z"));
  // a different seed may reorder; size stays capped by availability
  CHECK(keywords_for(table, "A01", 9, 3).size() == 3);
}

TEST_CASE("missing codes and k=0 give the keyword-free mode") {
  KeywordTable table{{"A01", {"x"}}};
  CHECK(keywords_for(table, "B99", 3, 1).empty());
  CHECK(keywords_for(table, "A01", 0, 1).empty());
  CHECK_THROWS_AS(keywords_for(table, "A01", -1, 1), ConfigError);
}

TEST_CASE("spec_for_class resolves the discipline path from the taxonomy") {
  auto t = make_taxonomy({{"A", ""}, {"A01", "A"}, {"A0101", "A01"}});
  KeywordTable table{{"A0101", {"alpha", "beta"}}};
  PromptConfig cfg;
  cfg.keywords_per_prompt = 1;
  cfg.keyword_seed = 11;
  auto spec = spec_for_class(t, table, "A0101", cfg);
  CHECK(spec.discipline_code == "A0101");
  CHECK(spec.discipline_path ==
        std::vector<std::string>{"Name of A", "Name of A01", "Name of A0101"});
  CHECK(spec.keywords.size() == 1);

  auto keyword_free = spec_for_class(t, table, "A01", cfg);
  CHECK(keyword_free.keywords.empty());
  CHECK_THROWS_AS(spec_for_class(t, table, "Z", cfg), ValidationError);
}

TEST_CASE("every leaf yields a renderable spec on a random taxonomy") {
  Rng rng(5150);
  auto t = testutil::random_forest(rng, 25);
  KeywordTable table;
  for (const auto& leaf : t.leaves())
    if (rng.next_unit() < 0.5) table[leaf] = {"kw one", "kw two"};
  PromptConfig cfg;
  cfg.keywords_per_prompt = 2;
  cfg.keyword_seed = 99;
  for (const auto& leaf : t.leaves()) {
    auto spec = spec_for_class(t, table, leaf, cfg);
    auto prompt = render(spec);  // must not throw
    CHECK(!prompt.text.empty());
    CHECK(prompt.sections.size() == 4);
  }
}

TEST_CASE("keyword tables validate against the taxonomy") {
  auto t = make_taxonomy({{"A", ""}});
  std::istringstream good(R"({"A": ["x", "y"]})");
  auto table = load_keyword_table(good, &t);
  CHECK(table.at("A").size() == 2);
  std::istringstream bad(R"({"Z": ["x"]})");
  CHECK_THROWS_AS(load_keyword_table(bad, &t), ValidationError);
  std::istringstream invalid("not json");
  CHECK_THROWS_AS(load_keyword_table(invalid, nullptr), ValidationError);
}
