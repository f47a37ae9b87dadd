#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hde/rng.hpp"
#include "hde/tensor.hpp"
#include "hde/tokenizer.hpp"

namespace hde {

namespace detail {

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Frozen token -> vector table. The word part comes from a pretrained file
/// when given, otherwise from a seeded per-token random draw (out-of-vocab
/// tokens always take this path). The char part is a seeded hash of character
/// trigrams. Vectors are recomputed deterministically on demand, so the
/// provider has no mutable state and is shareable across threads; the table
/// never changes during training.
class EmbeddingProvider {
 public:
  EmbeddingProvider(int word_dim, int char_dim, uint64_t oov_seed)
      : word_dim_(word_dim), char_dim_(char_dim), oov_seed_(oov_seed) {}

  /// Loads a text table in the usual "token v1 v2 ... vN" format. The file's
  /// vector width becomes word_dim.
  static EmbeddingProvider from_pretrained(const std::string& path, int char_dim,
                                           uint64_t oov_seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    std::unordered_map<std::string, std::vector<double>> table;
    std::string line;
    int width = -1;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tok;
      ss >> tok;
      std::vector<double> v;
      double x;
      while (ss >> x) v.push_back(x);
      if (width < 0) width = static_cast<int>(v.size());
      if (static_cast<int>(v.size()) != width)
        throw std::runtime_error("embedding file: ragged row for token '" + tok + "'");
      table.emplace(std::move(tok), std::move(v));
    }
    if (width <= 0) throw std::runtime_error("embedding file: no vectors in " + path);
    EmbeddingProvider p(width, char_dim, oov_seed);
    p.table_ = std::move(table);
    return p;
  }

  int dim() const { return word_dim_ + char_dim_; }
  int word_dim() const { return word_dim_; }
  int char_dim() const { return char_dim_; }
  size_t vocabulary_size() const { return table_.size(); }

  std::vector<double> vector_for(const std::string& token) const {
    std::vector<double> v(dim());
    auto it = table_.find(token);
    if (it != table_.end()) {
      std::copy(it->second.begin(), it->second.end(), v.begin());
    } else {
      std::mt19937_64 rng(derive_seed(oov_seed_, detail::fnv1a(token)));
      std::uniform_real_distribution<double> dist(-0.5, 0.5);
      for (int i = 0; i < word_dim_; ++i) v[i] = dist(rng);
    }
    if (char_dim_ > 0) append_char_ngrams(token, v);
    return v;
  }

  /// Row i is the vector for tokens[i]; shape l x dim().
  template <typename T>
  Tensor<T> embed(const TokenSeq& tokens) const {
    if (tokens.empty()) throw std::invalid_argument("embed: empty token sequence");
    Tensor<T> out(static_cast<int>(tokens.size()), dim());
    for (size_t i = 0; i < tokens.size(); ++i) {
      std::vector<double> v = vector_for(tokens[i]);
      for (int j = 0; j < dim(); ++j) out(static_cast<int>(i), j) = static_cast<T>(v[j]);
    }
    return out;
  }

 private:
  // Hashed character trigrams of ^token$, signed, scaled by 1/sqrt(count).
  void append_char_ngrams(const std::string& token, std::vector<double>& v) const {
    std::string padded = "^" + token + "$";
    int count = 0;
    for (size_t i = 0; i + 3 <= padded.size(); ++i, ++count) {
      uint64_t h = mix_seed(oov_seed_ ^ detail::fnv1a(padded.substr(i, 3)));
      int slot = static_cast<int>(h % static_cast<uint64_t>(char_dim_));
      double sign = (h >> 63) ? 1.0 : -1.0;
      v[word_dim_ + slot] += sign;
    }
    if (count > 1) {
      double norm = 1.0 / std::sqrt(static_cast<double>(count));
      for (int j = 0; j < char_dim_; ++j) v[word_dim_ + j] *= norm;
    }
  }

  int word_dim_;
  int char_dim_;
  uint64_t oov_seed_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

}  // namespace hde
