#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cag::text {

std::string to_lower(std::string_view s);

/// Strips ASCII whitespace from both ends.
std::string trim(std::string_view s);

/// Lowercases and splits on runs of non-alphanumeric bytes. This is the one
/// tokenizer behind every n-gram metric; keep it boring and deterministic.
std::vector<std::string> tokenize(std::string_view s);

/// Token count under plain whitespace splitting (article-length statistic).
std::size_t whitespace_token_count(std::string_view s);

/// Splits on '.', '!' or '?' followed by whitespace (or end of text).
/// Punctuation stays attached to its sentence; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view s);

/// Lowercase, collapse whitespace runs to single spaces, strip leading and
/// trailing punctuation/whitespace. Used to normalize answer spans before
/// edit-distance comparison.
std::string normalize_span(std::string_view s);

/// Last non-empty block of a reply when blocks are separated by blank lines.
/// Reasoning models front-load chain-of-thought; the answer is the tail block.
std::string last_block(std::string_view s);

/// Removes one layer of matching quotes ("..." or '...') around a trimmed string.
std::string strip_quotes(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

bool starts_with_icase(std::string_view s, std::string_view prefix);

/// FNV-1a 64-bit hash rendered as 16 hex chars; used to fingerprint prompt
/// templates and data files in provenance.
std::string fnv1a_hex(std::string_view s);

}  // namespace cag::text
