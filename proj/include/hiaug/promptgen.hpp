#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hiaug/io.hpp"
#include "hiaug/taxonomy.hpp"
#include "hiaug/text.hpp"

namespace hiaug {

struct SectionLengths {
  int title_max_words = 25;
  int abstract_min_words = 150;
  int abstract_max_words = 250;

  void check() const {
    if (title_max_words <= 0 || abstract_min_words <= 0 ||
        abstract_max_words <= 0)
      throw ConfigError("section length targets must be positive");
    if (abstract_min_words > abstract_max_words)
      throw ConfigError("abstract length range is inverted");
  }
};

inline std::vector<std::string> default_format_rules() {
  return {
      "Respond with exactly one fenced code block delimited by ``` and write "
      "nothing outside it.",
      "Inside the block provide exactly three fields, each starting at the "
      "beginning of its own line: TITLE:, KEYWORDS:, ABSTRACT:.",
      "TITLE: holds the proposal title on a single line.",
      "KEYWORDS: holds three to six terms separated by semicolons on a single "
      "line.",
      "ABSTRACT: holds the abstract as a single paragraph of plain text.",
  };
}

struct PromptSpec {
  std::string discipline_code;
  std::vector<std::string> discipline_path;  // names, root first, target last
  std::vector<std::string> keywords;
  SectionLengths lengths;
  std::string language_style = "formal-academic-english";
  std::vector<std::string> format_rules = default_format_rules();
  std::optional<std::string> seed_exemplar;
};

struct SectionSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct RenderedPrompt {
  std::string text;
  std::map<std::string, SectionSpan> sections;  // background, principle,
                                                // format, language_style
  std::string spec_hash;                        // 16 hex chars
};

inline const std::map<std::string, std::string>& language_style_presets() {
  static const std::map<std::string, std::string> presets{
      {"formal-academic-english",
       "Write in formal academic English. Keep the tone objective and "
       "precise, avoid promotional phrasing, and prefer discipline-specific "
       "terminology over general vocabulary."},
      {"formal-academic-chinese",
       "Write in formal academic Chinese (Simplified). Keep the register "
       "consistent with a national funding-agency application and avoid "
       "colloquial phrasing."},
  };
  return presets;
}

inline std::string spec_hash_of(const PromptSpec& spec) {
  HashBuilder h;
  h.add(spec.discipline_code);
  for (const auto& name : spec.discipline_path) h.add(name);
  h.add_u64(0x1);
  for (const auto& kw : spec.keywords) h.add(kw);
  h.add_u64(0x2);
  h.add_i64(spec.lengths.title_max_words);
  h.add_i64(spec.lengths.abstract_min_words);
  h.add_i64(spec.lengths.abstract_max_words);
  h.add(spec.language_style);
  for (const auto& rule : spec.format_rules) h.add(rule);
  h.add_u64(0x3);
  if (spec.seed_exemplar) h.add(*spec.seed_exemplar);
  return hex16(h.digest());
}

/// Renders the four-section prompt. Sections appear in the fixed order
/// Background, Principle, Format, Language Style and jointly cover the
/// whole text; equal specs render to byte-equal text.
inline RenderedPrompt render(const PromptSpec& spec) {
  if (spec.discipline_path.empty())
    throw ConfigError("prompt spec has an empty discipline path");
  spec.lengths.check();
  auto style_it = language_style_presets().find(spec.language_style);
  if (style_it == language_style_presets().end())
    throw ConfigError("unknown language style preset '" + spec.language_style + "'");

  const std::string& discipline = spec.discipline_path.back();

  std::string background = "Background:\n";
  background +=
      "You are preparing a research proposal for the discipline \"" +
      discipline + "\" (classification path: " + join(spec.discipline_path, " > ") +
      "). The proposal consists of a title and an abstract. The title must "
      "contain at most " +
      std::to_string(spec.lengths.title_max_words) +
      " words. The abstract must contain between " +
      std::to_string(spec.lengths.abstract_min_words) + " and " +
      std::to_string(spec.lengths.abstract_max_words) + " words.";
  if (!spec.keywords.empty())
    background += " The proposal must be centered on the keywords: " +
                  join(spec.keywords, "; ") + ".";
  if (spec.seed_exemplar)
    background +=
        "\nUse the following existing abstract from the same discipline as a "
        "stylistic reference only; do not copy sentences from it:\n\"" +
        *spec.seed_exemplar + "\"";
  background += "\n\n";

  std::string principle = "Principle:\n";
  principle +=
      "Assume the role of a scientist writing a funding proposal for a "
      "national research agency. Propose one concrete research question, the "
      "methodology you would apply, and the expected contribution of the "
      "project. Stay strictly within the stated discipline, do not mention "
      "that the text is synthetic, and do not address the reader directly.";
  principle += "\n\n";

  std::string format = "Format:\nFollow every rule below exactly.\n";
  for (std::size_t i = 0; i < spec.format_rules.size(); ++i)
    format += std::to_string(i + 1) + ". " + spec.format_rules[i] + "\n";
  format += "\n";

  std::string style = "Language Style:\n" + style_it->second + "\n";

  RenderedPrompt out;
  out.text.reserve(background.size() + principle.size() + format.size() +
                   style.size());
  auto add_section = [&](const std::string& key, const std::string& body) {
    out.sections[key] = SectionSpan{out.text.size(), body.size()};
    out.text += body;
  };
  add_section("background", background);
  add_section("principle", principle);
  add_section("format", format);
  add_section("language_style", style);
  out.spec_hash = spec_hash_of(spec);
  return out;
}

// Keyword table file: a single JSON object mapping code -> [keywords].
using KeywordTable = std::map<std::string, std::vector<std::string>>;

inline KeywordTable load_keyword_table(std::istream& in,
                                       const Taxonomy* validate_against = nullptr) {
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("keyword table: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("keyword table must be a JSON object");
  KeywordTable table;
  for (const auto& [code, value] : j.items()) {
    if (validate_against && !validate_against->contains(code))
      throw ValidationError("keyword table names unknown code " + code);
    table[code] = value.get<std::vector<std::string>>();
  }
  return table;
}

inline KeywordTable load_keyword_table_file(const std::string& path,
                                            const Taxonomy* validate_against = nullptr) {
  auto in = open_input(path);
  return load_keyword_table(in, validate_against);
}

inline void save_keyword_table(const KeywordTable& table, std::ostream& out) {
  out << json(table).dump(2) << '\n';
}

/// Deterministic sample of min(k, available) keywords for a code; an absent
/// code or k = 0 yields the empty list (the keyword-free prompt mode).
inline std::vector<std::string> keywords_for(const KeywordTable& table,
                                             const std::string& code, int k,
                                             std::uint64_t seed) {
  if (k < 0) throw ConfigError("keyword count must be non-negative");
  auto it = table.find(code);
  if (it == table.end() || k == 0) return {};
  std::vector<std::string> pool = it->second;
  Rng rng(derive_seed(seed, code));
  rng.shuffle(pool);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(k)));
  return pool;
}

struct PromptConfig {
  int keywords_per_prompt = 3;
  std::uint64_t keyword_seed = 0;
  SectionLengths lengths;
  std::string language_style = "formal-academic-english";
  std::vector<std::string> format_rules = default_format_rules();
};

/// Binds a plan row to a prompt: resolves the discipline path from the
/// taxonomy and draws keywords from the table.
inline PromptSpec spec_for_class(const Taxonomy& t, const KeywordTable& table,
                                 const std::string& code,
                                 const PromptConfig& cfg) {
  const auto& target = t.node(code);
  PromptSpec spec;
  spec.discipline_code = code;
  auto chain = t.ancestors(code);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    spec.discipline_path.push_back(t.node(*it).name);
  spec.discipline_path.push_back(target.name);
  spec.keywords = keywords_for(table, code, cfg.keywords_per_prompt, cfg.keyword_seed);
  spec.lengths = cfg.lengths;
  spec.language_style = cfg.language_style;
  spec.format_rules = cfg.format_rules;
  return spec;
}

}  // namespace hiaug
