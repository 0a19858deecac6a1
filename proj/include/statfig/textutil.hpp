#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace statfig {

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Evaluation tokenizer: lowercase, whitespace split, punctuation stripped
/// from token edges. Interior punctuation ("12.5", "don't") is kept.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) tokens.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return tokens;
}

/// Sentence count: split on runs of terminal punctuation (. ! ?) and count
/// non-empty segments.
inline int count_sentences(const std::string& text) {
  int count = 0;
  bool in_segment = false;
  for (char ch : text) {
    if (ch == '.' || ch == '!' || ch == '?') {
      if (in_segment) ++count;
      in_segment = false;
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      in_segment = true;
    }
  }
  if (in_segment) ++count;
  return count;
}

/// Length of the longest common subsequence of two token sequences.
inline size_t lcs_length(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// All finite decimal numbers appearing in free text, in reading order.
inline std::vector<double> scan_numbers(const std::string& text) {
  std::vector<double> out;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    char c = text[i];
    bool neg = false;
    size_t start = i;
    if ((c == '-' || c == '+') && i + 1 < n &&
        std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      neg = (c == '-');
      ++i;
    }
    if (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
      size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < n && text[j] == '.' && j + 1 < n &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      out.push_back(std::stod(text.substr(start, j - start)));
      (void)neg;
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

/// FNV-1a 64-bit; the stable hash used for fingerprints, splits and seeds.
inline uint64_t fnv1a64(const std::string& data, uint64_t seed = 14695981039346656037ull) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/// Shortest plain decimal form: 35 -> "35", 12.5 -> "12.5".
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return std::string(buf);
}

}  // namespace statfig
