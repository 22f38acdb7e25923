#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace refhist {

/// One token with its byte range in the source text.
struct TokenSpan {
  std::string surface;  // lower-cased
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last byte
};

namespace detail {
inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
// Alphanumeric runs absorb non-ASCII bytes so multi-byte UTF-8 words stay whole.
inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}
}  // namespace detail

/// Maximal alphanumeric runs plus individual punctuation characters, all
/// lower-cased. Whitespace separates and is never a token.
inline std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (detail::is_space_byte(c)) {
      ++i;
      continue;
    }
    TokenSpan tok;
    tok.begin = i;
    if (detail::is_word_byte(c)) {
      while (i < n && detail::is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++i;
    }
    tok.end = i;
    tok.surface.reserve(tok.end - tok.begin);
    for (std::size_t j = tok.begin; j < tok.end; ++j) {
      char ch = text[j];
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
      tok.surface += ch;
    }
    out.push_back(std::move(tok));
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.surface));
  return out;
}

/// Canonical detokenization: tokens joined by single spaces.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace refhist
