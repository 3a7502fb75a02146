#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kpa::text {

/// ASCII lowercase; bytes >= 0x80 (UTF-8 continuation etc.) pass through.
std::string to_lower(std::string_view s);

/// Strips leading and trailing ASCII punctuation.
std::string_view strip_punct(std::string_view s);

/// Lowercase, split on whitespace, strip enclosing punctuation, drop tokens
/// that become empty. Shared by the lexical encoder, sentence filtering and
/// ROUGE so that all three agree on what a token is.
std::vector<std::string> tokenize(std::string_view s);

std::string_view trim(std::string_view s);

/// Rule-based sentence splitter: a sentence ends at `.`, `!` or `?` (runs of
/// them included) followed by whitespace or end of text. A period that
/// closes a known abbreviation ("e.g.", "Dr.", ...) or a single letter does
/// not end a sentence. Returned sentences are trimmed and non-empty.
std::vector<std::string> split_sentences(std::string_view s);

/// Lowercase ASCII alphanumerics joined by single '-'.
std::string slugify(std::string_view s);

}  // namespace kpa::text
