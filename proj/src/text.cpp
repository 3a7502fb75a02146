#include "kpa/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace kpa::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 22> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e",
    "eg", "ie", "cf", "approx", "inc", "ltd", "co", "no", "fig", "u.s"};

bool is_abbreviation(std::string_view word) {
  const std::string lower = to_lower(strip_punct(word));
  if (lower.size() == 1 && std::isalpha(static_cast<unsigned char>(lower[0]))) return true;
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view strip_punct(std::string_view s) {
  while (!s.empty() && is_punct(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_punct(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) {
      const std::string_view tok = strip_punct(s.substr(start, i - start));
      if (!tok.empty()) tokens.push_back(to_lower(tok));
    }
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    const std::string_view sentence = trim(s.substr(start, end - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = end;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < s.size() && (s[end] == '.' || s[end] == '!' || s[end] == '?')) ++end;
    // closing quotes/brackets stay with the sentence
    while (end < s.size() && (s[end] == '"' || s[end] == '\'' || s[end] == ')')) ++end;
    const bool boundary = end == s.size() || is_space(s[end]);
    if (boundary && c == '.' && end == i + 1) {
      std::size_t w = i;
      while (w > start && !is_space(s[w - 1])) --w;
      if (is_abbreviation(s.substr(w, i - w))) {
        i = end;
        continue;
      }
    }
    if (boundary) emit(end);
    i = end;
  }
  emit(s.size());
  return out;
}

std::string slugify(std::string_view s) {
  std::string out;
  bool pending_dash = false;
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (pending_dash && !out.empty()) out.push_back('-');
      pending_dash = false;
      out.push_back(static_cast<char>(std::tolower(u)));
    } else {
      pending_dash = true;
    }
  }
  return out;
}

}  // namespace kpa::text
