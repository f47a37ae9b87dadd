#pragma once

#include <cctype>
#include <string>
#include <vector>

namespace hde {

using TokenSeq = std::vector<std::string>;

namespace detail {

inline bool is_word_byte(unsigned char c) {
  // non-ASCII bytes count as word bytes so UTF-8 sequences stay intact
  return std::isalnum(c) || c >= 0x80;
}

inline char ascii_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace detail

/// Deterministic lowercasing tokenizer. Splits on whitespace, then peels
/// leading and trailing non-alphanumeric characters off each chunk as
/// single-character tokens. Internal punctuation stays inside the token, so
/// "Ma$e" -> "ma$e" while "(born" -> "(", "born".
inline TokenSeq tokenize(const std::string& text) {
  TokenSeq out;
  size_t i = 0, n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (i == j) break;

    size_t lo = i, hi = j;  // [lo, hi) is the chunk
    while (lo < hi && !detail::is_word_byte(static_cast<unsigned char>(text[lo]))) {
      out.push_back(std::string(1, detail::ascii_lower(text[lo])));
      ++lo;
    }
    size_t core_end = hi;
    while (core_end > lo && !detail::is_word_byte(static_cast<unsigned char>(text[core_end - 1])))
      --core_end;
    if (lo < core_end) {
      std::string tok;
      tok.reserve(core_end - lo);
      for (size_t k = lo; k < core_end; ++k)
        tok.push_back(detail::ascii_lower(static_cast<unsigned char>(text[k])));
      out.push_back(std::move(tok));
    }
    for (size_t k = core_end; k < hi; ++k)
      out.push_back(std::string(1, detail::ascii_lower(static_cast<unsigned char>(text[k]))));
    i = j;
  }
  return out;
}

inline std::string join_tokens(const TokenSeq& toks) {
  std::string s;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) s.push_back(' ');
    s += toks[i];
  }
  return s;
}

}  // namespace hde
