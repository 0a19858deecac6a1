#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "statfig/errors.hpp"

namespace statfig {

// Canonical serialization uses ordered_json so key order is under our control.
using json = nlohmann::ordered_json;

/// Extracts the outermost balanced JSON object embedded in free text.
/// Returns std::nullopt when no parseable object exists.
inline std::optional<json> extract_json_object(const std::string& text) {
  size_t start = text.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          json parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;
        }
      }
    }
    start = text.find('{', start + 1);
  }
  return std::nullopt;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("FileError", "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Atomic write: temp file in the same directory, then rename.
inline void write_file(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("FileError", "cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error("FileError", "cannot rename " + tmp + " to " + path);
  }
}

inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("FileError", "cannot open " + path);
  std::vector<json> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw Error("FileError", path + ":" + std::to_string(lineno) + ": invalid JSON line");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::string body;
  for (const auto& rec : records) {
    body += rec.dump();
    body += '\n';
  }
  write_file(path, body);
}

}  // namespace statfig
