#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hde {

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace detail

/// Dense row-major matrix. Every quantity in the model is rank-2 (scalars are
/// 1x1, vectors are 1xn), so the shape is a fixed pair of dimensions.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
    detail::require(rows >= 0 && cols >= 0, "Tensor: negative dimension");
    v_.assign(static_cast<size_t>(rows) * cols, T(0));
  }
  Tensor(int rows, int cols, std::initializer_list<T> vals) : Tensor(rows, cols) {
    detail::require(vals.size() == v_.size(), "Tensor: initializer size mismatch");
    std::copy(vals.begin(), vals.end(), v_.begin());
  }

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
  static Tensor full(int rows, int cols, T x) {
    Tensor t(rows, cols);
    std::fill(t.v_.begin(), t.v_.end(), x);
    return t;
  }
  static Tensor identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t(i, i) = T(1);
    return t;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  T& operator()(int i, int j) { return v_[static_cast<size_t>(i) * cols_ + j]; }
  T operator()(int i, int j) const { return v_[static_cast<size_t>(i) * cols_ + j]; }
  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  T* row_ptr(int i) { return v_.data() + static_cast<size_t>(i) * cols_; }
  const T* row_ptr(int i) const { return v_.data() + static_cast<size_t>(i) * cols_; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
  }

  bool all_finite() const {
    for (T x : v_)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }

  T max_abs() const {
    T m = T(0);
    for (T x : v_) m = std::max(m, static_cast<T>(std::abs(static_cast<double>(x))));
    return m;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(rows_, cols_);
    for (size_t i = 0; i < v_.size(); ++i) out.data()[i] = static_cast<U>(v_[i]);
    return out;
  }

  bool operator==(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && v_ == o.v_;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> v_;
};

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  detail::require(a.same_shape(b), std::string(op) + ": shape mismatch " + a.shape_str() +
                                       " vs " + b.shape_str());
}

// ---- dense kernels ----------------------------------------------------------
// Forward-only building blocks; the tape composes these and supplies gradients.

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.cols() == b.rows(), "matmul: inner dimensions differ, " + a.shape_str() +
                                            " * " + b.shape_str());
  Tensor<T> c(a.rows(), b.cols());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  for (int i = 0; i < m; ++i) {
    T* ci = c.row_ptr(i);
    const T* ai = a.row_ptr(i);
    for (int p = 0; p < k; ++p) {
      const T aip = ai[p];
      if (aip == T(0)) continue;
      const T* bp = b.row_ptr(p);
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

/// a^T * b without materializing the transpose.
template <typename T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.rows() == b.rows(), "matmul_tn: row counts differ, " + a.shape_str() +
                                            " vs " + b.shape_str());
  Tensor<T> c(a.cols(), b.cols());
  const int m = a.cols(), k = a.rows(), n = b.cols();
  for (int p = 0; p < k; ++p) {
    const T* ap = a.row_ptr(p);
    const T* bp = b.row_ptr(p);
    for (int i = 0; i < m; ++i) {
      const T aip = ap[i];
      if (aip == T(0)) continue;
      T* ci = c.row_ptr(i);
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

/// a * b^T without materializing the transpose.
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.cols() == b.cols(), "matmul_nt: column counts differ, " + a.shape_str() +
                                            " vs " + b.shape_str());
  Tensor<T> c(a.rows(), b.rows());
  const int m = a.rows(), k = a.cols(), n = b.rows();
  for (int i = 0; i < m; ++i) {
    const T* ai = a.row_ptr(i);
    T* ci = c.row_ptr(i);
    for (int j = 0; j < n; ++j) {
      const T* bj = b.row_ptr(j);
      T s = T(0);
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = s;
    }
  }
  return c;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  Tensor<T> c(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(j, i) = a(i, j);
  return c;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> c = a;
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> c = a;
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  Tensor<T> c = a;
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
  return c;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  Tensor<T> c = a;
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
  return c;
}

/// Adds a 1xn bias row to every row of a.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& a, const Tensor<T>& bias) {
  detail::require(bias.rows() == 1 && bias.cols() == a.cols(),
                  "add_bias: want 1x" + std::to_string(a.cols()) + ", got " + bias.shape_str());
  Tensor<T> c = a;
  for (int i = 0; i < c.rows(); ++i) {
    T* ci = c.row_ptr(i);
    const T* b = bias.row_ptr(0);
    for (int j = 0; j < c.cols(); ++j) ci[j] += b[j];
  }
  return c;
}

template <typename T>
Tensor<T> tanh_elem(const Tensor<T>& a) {
  Tensor<T> c = a;
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] = std::tanh(c.data()[i]);
  return c;
}

template <typename T>
Tensor<T> sigmoid_elem(const Tensor<T>& a) {
  Tensor<T> c = a;
  for (size_t i = 0; i < c.size(); ++i) {
    // split on sign so exp never overflows
    T x = c.data()[i];
    if (x >= T(0)) {
      T e = std::exp(-x);
      c.data()[i] = T(1) / (T(1) + e);
    } else {
      T e = std::exp(x);
      c.data()[i] = e / (T(1) + e);
    }
  }
  return c;
}

/// Row-wise softmax with max subtraction; every output row sums to 1.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& a) {
  Tensor<T> c = a;
  for (int i = 0; i < c.rows(); ++i) {
    T* r = c.row_ptr(i);
    T mx = r[0];
    for (int j = 1; j < c.cols(); ++j) mx = std::max(mx, r[j]);
    T sum = T(0);
    for (int j = 0; j < c.cols(); ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (int j = 0; j < c.cols(); ++j) r[j] /= sum;
  }
  return c;
}

template <typename T>
Tensor<T> concat_cols(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.rows() == b.rows(), "concat_cols: row counts differ, " + a.shape_str() +
                                            " vs " + b.shape_str());
  Tensor<T> c(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    std::copy(a.row_ptr(i), a.row_ptr(i) + a.cols(), c.row_ptr(i));
    std::copy(b.row_ptr(i), b.row_ptr(i) + b.cols(), c.row_ptr(i) + a.cols());
  }
  return c;
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  detail::require(!parts.empty(), "concat_rows: empty part list");
  int cols = parts[0].cols(), rows = 0;
  for (const auto& p : parts) {
    detail::require(p.cols() == cols, "concat_rows: column counts differ");
    rows += p.rows();
  }
  Tensor<T> c(rows, cols);
  int at = 0;
  for (const auto& p : parts) {
    std::copy(p.data(), p.data() + p.size(), c.row_ptr(at));
    at += p.rows();
  }
  return c;
}

/// Rows [r0, r1) of a.
template <typename T>
Tensor<T> slice_rows(const Tensor<T>& a, int r0, int r1) {
  detail::require(0 <= r0 && r0 < r1 && r1 <= a.rows(),
                  "slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) +
                      ") out of bounds for " + a.shape_str());
  Tensor<T> c(r1 - r0, a.cols());
  std::copy(a.row_ptr(r0), a.row_ptr(r0) + c.size(), c.data());
  return c;
}

template <typename T>
Tensor<T> reverse_rows(const Tensor<T>& a) {
  Tensor<T> c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    std::copy(a.row_ptr(i), a.row_ptr(i) + a.cols(), c.row_ptr(a.rows() - 1 - i));
  return c;
}

template <typename T>
T sum_all(const Tensor<T>& a) {
  T s = T(0);
  for (size_t i = 0; i < a.size(); ++i) s += a.data()[i];
  return s;
}

/// Named parameter with a gradient buffer of identical shape.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Tensor<T>(value.rows(), value.cols()); }
};

}  // namespace hde
