#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hiaug/common.hpp"

namespace hiaug {

using json = nlohmann::json;

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

inline std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  auto out = open_output(path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("failed writing file: " + path);
}

/// Walks a JSONL stream, invoking fn with the 1-based line number and the
/// parsed object. Blank lines are skipped.
inline void for_each_jsonl(std::istream& in,
                           const std::function<void(std::size_t, const json&)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
    }
    fn(line_no, record);
  }
}

inline void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw ConfigError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace hiaug
