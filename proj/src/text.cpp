#include "cag/text.hpp"

#include <cctype>

namespace cag::text {

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }
bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : s) {
    if (is_alnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t whitespace_token_count(std::string_view s) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < s.size(); ++i) {
    current.push_back(s[i]);
    const char c = s[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == s.size() || is_space(static_cast<unsigned char>(s[i + 1])))) {
      std::string piece = trim(current);
      if (!piece.empty()) sentences.push_back(std::move(piece));
      current.clear();
    }
  }
  std::string tail = trim(current);
  if (!tail.empty()) sentences.push_back(std::move(tail));
  return sentences;
}

std::string normalize_span(std::string_view s) {
  std::string lowered;
  lowered.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !lowered.empty();
      continue;
    }
    if (pending_space) {
      lowered.push_back(' ');
      pending_space = false;
    }
    lowered.push_back(static_cast<char>(std::tolower(c)));
  }
  std::size_t b = 0, e = lowered.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(lowered[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(lowered[e - 1]))) --e;
  // Re-trim: stripping punctuation can expose inner spacing at the ends.
  while (b < e && is_space(static_cast<unsigned char>(lowered[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(lowered[e - 1]))) --e;
  return lowered.substr(b, e - b);
}

std::string last_block(std::string_view s) {
  std::vector<std::string> blocks;
  std::string current;
  std::size_t newline_run = 0;
  for (char c : s) {
    if (c == '\n') {
      ++newline_run;
      if (newline_run >= 2) {
        if (!trim(current).empty()) blocks.push_back(current);
        current.clear();
        continue;
      }
    } else if (c != '\r') {
      if (newline_run == 1 && !current.empty()) current.push_back('\n');
      newline_run = 0;
    }
    if (c != '\n' && c != '\r') current.push_back(c);
  }
  if (!trim(current).empty()) blocks.push_back(current);
  if (blocks.empty()) return "";
  return trim(blocks.back());
}

std::string strip_quotes(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2) {
    const char a = t.front(), b = t.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'')) {
      return trim(std::string_view(t).substr(1, t.size() - 2));
    }
  }
  return t;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace cag::text
