#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hde/tensor.hpp"

namespace hde {

/// Reverse-mode differentiation tape over Tensor-valued operations.
///
/// Every operation records one node holding its forward value and a closure
/// that routes the node's gradient to its inputs. backward() seeds the output
/// gradient with 1 and visits nodes exactly once, in reverse execution order.
/// A tape is confined to one thread; parameters it reads stay read-only until
/// backward() accumulates into their grad buffers.
template <typename T>
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  const Tensor<T>& value(Var v) const { return nodes_[v.id].value; }
  const Tensor<T>& grad(Var v) const { return nodes_[v.id].grad; }
  size_t num_nodes() const { return nodes_.size(); }

  /// Leaf with no gradient flow (inputs, adjacency masks, frozen embeddings).
  Var constant(Tensor<T> t) {
    return push(std::move(t), nullptr);
  }

  /// Leaf bound to a Parameter; backward() adds the leaf's gradient into
  /// param.grad (accumulation across samples happens there).
  Var param(Parameter<T>& p) {
    Var v = push(p.value, nullptr);
    nodes_[v.id].bound = &p;
    return v;
  }

  Var add(Var a, Var b) {
    Var out = push(hde::add(value(a), value(b)), nullptr);
    set_back(out, [a, b, out](Tape& t) {
      t.accumulate(a, t.grad(out));
      t.accumulate(b, t.grad(out));
    });
    return out;
  }

  Var sub(Var a, Var b) {
    Var out = push(hde::sub(value(a), value(b)), nullptr);
    set_back(out, [a, b, out](Tape& t) {
      t.accumulate(a, t.grad(out));
      t.accumulate(b, hde::scale(t.grad(out), T(-1)));
    });
    return out;
  }

  Var mul(Var a, Var b) {
    Var out = push(hde::mul(value(a), value(b)), nullptr);
    set_back(out, [a, b, out](Tape& t) {
      t.accumulate(a, hde::mul(t.grad(out), t.value(b)));
      t.accumulate(b, hde::mul(t.grad(out), t.value(a)));
    });
    return out;
  }

  Var scale(Var a, T s) {
    Var out = push(hde::scale(value(a), s), nullptr);
    set_back(out, [a, s, out](Tape& t) { t.accumulate(a, hde::scale(t.grad(out), s)); });
    return out;
  }

  Var add_bias(Var a, Var bias) {
    Var out = push(hde::add_bias(value(a), value(bias)), nullptr);
    set_back(out, [a, bias, out](Tape& t) {
      const Tensor<T>& g = t.grad(out);
      t.accumulate(a, g);
      Tensor<T> gb(1, g.cols());
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
      t.accumulate(bias, gb);
    });
    return out;
  }

  Var matmul(Var a, Var b) {
    Var out = push(hde::matmul(value(a), value(b)), nullptr);
    set_back(out, [a, b, out](Tape& t) {
      const Tensor<T>& g = t.grad(out);
      t.accumulate(a, matmul_nt(g, t.value(b)));
      t.accumulate(b, matmul_tn(t.value(a), g));
    });
    return out;
  }

  Var transpose(Var a) {
    Var out = push(hde::transpose(value(a)), nullptr);
    set_back(out, [a, out](Tape& t) { t.accumulate(a, hde::transpose(t.grad(out))); });
    return out;
  }

  Var tanh(Var a) {
    Var out = push(tanh_elem(value(a)), nullptr);
    set_back(out, [a, out](Tape& t) {
      const Tensor<T>& y = t.value(out);
      Tensor<T> g = t.grad(out);
      for (size_t i = 0; i < g.size(); ++i)
        g.data()[i] *= T(1) - y.data()[i] * y.data()[i];
      t.accumulate(a, g);
    });
    return out;
  }

  Var sigmoid(Var a) {
    Var out = push(sigmoid_elem(value(a)), nullptr);
    set_back(out, [a, out](Tape& t) {
      const Tensor<T>& y = t.value(out);
      Tensor<T> g = t.grad(out);
      for (size_t i = 0; i < g.size(); ++i)
        g.data()[i] *= y.data()[i] * (T(1) - y.data()[i]);
      t.accumulate(a, g);
    });
    return out;
  }

  Var softmax_rows(Var a) {
    Var out = push(hde::softmax_rows(value(a)), nullptr);
    set_back(out, [a, out](Tape& t) {
      // dL/dx_j = y_j * (g_j - sum_k g_k y_k), per row
      const Tensor<T>& y = t.value(out);
      const Tensor<T>& g = t.grad(out);
      Tensor<T> gx(y.rows(), y.cols());
      for (int i = 0; i < y.rows(); ++i) {
        T dot = T(0);
        for (int j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
        for (int j = 0; j < y.cols(); ++j) gx(i, j) = y(i, j) * (g(i, j) - dot);
      }
      t.accumulate(a, gx);
    });
    return out;
  }

  Var concat_cols(Var a, Var b) {
    Var out = push(hde::concat_cols(value(a), value(b)), nullptr);
    set_back(out, [a, b, out](Tape& t) {
      const Tensor<T>& g = t.grad(out);
      int ca = t.value(a).cols(), cb = t.value(b).cols();
      Tensor<T> ga(g.rows(), ca), gb(g.rows(), cb);
      for (int i = 0; i < g.rows(); ++i) {
        std::copy(g.row_ptr(i), g.row_ptr(i) + ca, ga.row_ptr(i));
        std::copy(g.row_ptr(i) + ca, g.row_ptr(i) + ca + cb, gb.row_ptr(i));
      }
      t.accumulate(a, ga);
      t.accumulate(b, gb);
    });
    return out;
  }

  Var concat_rows(const std::vector<Var>& parts) {
    detail::require(!parts.empty(), "concat_rows: empty part list");
    std::vector<Tensor<T>> vals;
    vals.reserve(parts.size());
    for (Var p : parts) vals.push_back(value(p));
    Var out = push(hde::concat_rows(vals), nullptr);
    std::vector<Var> ps = parts;
    set_back(out, [ps, out](Tape& t) {
      const Tensor<T>& g = t.grad(out);
      int at = 0;
      for (Var p : ps) {
        int r = t.value(p).rows();
        t.accumulate(p, hde::slice_rows(g, at, at + r));
        at += r;
      }
    });
    return out;
  }

  Var slice_rows(Var a, int r0, int r1) {
    Var out = push(hde::slice_rows(value(a), r0, r1), nullptr);
    set_back(out, [a, r0, out](Tape& t) {
      const Tensor<T>& g = t.grad(out);
      Tensor<T> ga(t.value(a).rows(), t.value(a).cols());
      std::copy(g.data(), g.data() + g.size(), ga.row_ptr(r0));
      t.accumulate(a, ga);
    });
    return out;
  }

  Var reverse_rows(Var a) {
    Var out = push(hde::reverse_rows(value(a)), nullptr);
    set_back(out, [a, out](Tape& t) { t.accumulate(a, hde::reverse_rows(t.grad(out))); });
    return out;
  }

  /// 1x1 sum of all entries.
  Var sum_all(Var a) {
    Tensor<T> s(1, 1);
    s(0, 0) = hde::sum_all(value(a));
    Var out = push(std::move(s), nullptr);
    set_back(out, [a, out](Tape& t) {
      T g = t.grad(out)(0, 0);
      t.accumulate(a, Tensor<T>::full(t.value(a).rows(), t.value(a).cols(), g));
    });
    return out;
  }

  /// Stabilized -log softmax(scores)[target] for a Cx1 score column.
  Var cross_entropy(Var scores, int target) {
    const Tensor<T>& s = value(scores);
    detail::require(s.cols() == 1, "cross_entropy: want Cx1 scores, got " + s.shape_str());
    detail::require(0 <= target && target < s.rows(), "cross_entropy: bad target index");
    T mx = s(0, 0);
    for (int i = 1; i < s.rows(); ++i) mx = std::max(mx, s(i, 0));
    T lse = T(0);
    for (int i = 0; i < s.rows(); ++i) lse += std::exp(s(i, 0) - mx);
    Tensor<T> loss(1, 1);
    loss(0, 0) = std::log(lse) + mx - s(target, 0);
    Var out = push(std::move(loss), nullptr);
    set_back(out, [scores, target, out](Tape& t) {
      T g = t.grad(out)(0, 0);
      Tensor<T> p = hde::softmax_rows(hde::transpose(t.value(scores)));
      Tensor<T> gs(p.cols(), 1);
      for (int i = 0; i < p.cols(); ++i) gs(i, 0) = g * p(0, i);
      gs(target, 0) -= g;
      t.accumulate(scores, gs);
    });
    return out;
  }

  /// Per-segment max over rows of an Mx1 score column; one output row per
  /// segment. Empty segments yield 0 and receive no gradient; ties route the
  /// gradient to the lowest row index.
  Var segment_max(Var scores, const std::vector<std::vector<int>>& segments) {
    const Tensor<T>& s = value(scores);
    detail::require(s.cols() == 1, "segment_max: want Mx1 scores, got " + s.shape_str());
    Tensor<T> out_v(static_cast<int>(segments.size()), 1);
    std::vector<int> argmax(segments.size(), -1);
    for (size_t k = 0; k < segments.size(); ++k) {
      for (int idx : segments[k]) {
        detail::require(0 <= idx && idx < s.rows(), "segment_max: index out of range");
        if (argmax[k] < 0 || s(idx, 0) > s(argmax[k], 0)) argmax[k] = idx;
      }
      out_v(static_cast<int>(k), 0) = argmax[k] < 0 ? T(0) : s(argmax[k], 0);
    }
    Var out = push(std::move(out_v), nullptr);
    set_back(out, [scores, argmax, out](Tape& t) {
      const Tensor<T>& g = t.grad(out);
      Tensor<T> gs(t.value(scores).rows(), 1);
      for (size_t k = 0; k < argmax.size(); ++k)
        if (argmax[k] >= 0) gs(argmax[k], 0) += g(static_cast<int>(k), 0);
      t.accumulate(scores, gs);
    });
    return out;
  }

  /// Runs the reverse sweep from a 1x1 output. Each recorded node is visited
  /// exactly once, in reverse execution order; parameter leaves accumulate
  /// into their bound Parameter::grad.
  void backward(Var output) {
    detail::require(value(output).rows() == 1 && value(output).cols() == 1,
                    "backward: output must be 1x1, got " + value(output).shape_str());
    for (auto& n : nodes_) n.grad = Tensor<T>();
    nodes_[output.id].grad = Tensor<T>::full(1, 1, T(1));
    for (int i = output.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.grad.empty()) continue;  // not on the path to the output
      if (n.back) n.back(*this);
      if (n.bound) {
        require_same_shape(n.bound->grad, n.grad, "param grad");
        for (size_t j = 0; j < n.grad.size(); ++j) n.bound->grad.data()[j] += n.grad.data()[j];
      }
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::function<void(Tape&)> back;
    Parameter<T>* bound = nullptr;
  };

  Var push(Tensor<T> v, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(v), Tensor<T>(), std::move(back), nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  void set_back(Var v, std::function<void(Tape&)> back) { nodes_[v.id].back = std::move(back); }

  void accumulate(Var v, const Tensor<T>& g) {
    Node& n = nodes_[v.id];
    if (n.grad.empty()) {
      n.grad = g;
    } else {
      require_same_shape(n.grad, g, "grad accumulate");
      for (size_t i = 0; i < g.size(); ++i) n.grad.data()[i] += g.data()[i];
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace hde
