#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "hiaug/common.hpp"

namespace hiaug {

/// Tokenizer shared by the classifier and the mock generator: lowercase,
/// split on non-alphanumeric bytes, drop tokens shorter than 2 characters.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      if (current.size() >= 2) out.push_back(current);
      current.clear();
    }
  }
  if (current.size() >= 2) out.push_back(current);
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

/// Lowercases and collapses whitespace runs to single spaces; the dedupe
/// key for generated abstracts is the hash of this form.
inline std::string normalize_ws(std::string_view text) {
  std::string out;
  bool in_space = true;  // leading whitespace is trimmed
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline std::uint64_t dedupe_key(std::string_view abstract) {
  return fnv1a64(normalize_ws(abstract));
}

inline std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

}  // namespace hiaug
