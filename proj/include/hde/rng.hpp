#pragma once

#include <cstdint>
#include <random>

#include "hde/tensor.hpp"

namespace hde {

/// splitmix64 step; used to derive independent stream seeds from one root seed.
inline uint64_t mix_seed(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
  return mix_seed(root ^ mix_seed(stream + 1));
}

template <typename T>
Tensor<T> uniform_tensor(int rows, int cols, T lo, T hi, std::mt19937_64& rng) {
  Tensor<T> t(rows, cols);
  std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
  for (size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(dist(rng));
  return t;
}

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); the usual tanh-range init.
template <typename T>
Tensor<T> glorot_tensor(int rows, int cols, std::mt19937_64& rng) {
  double a = std::sqrt(6.0 / (rows + cols));
  return uniform_tensor<T>(rows, cols, static_cast<T>(-a), static_cast<T>(a), rng);
}

}  // namespace hde
