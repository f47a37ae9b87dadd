#pragma once

#include <string>
#include <vector>

#include "hde/rng.hpp"
#include "hde/tape.hpp"
#include "hde/tensor.hpp"

namespace hde {

/// One GRU direction: update gate z, reset gate r, candidate state n.
///   z_t = sigmoid(x_t W_z + h_{t-1} U_z + b_z)
///   r_t = sigmoid(x_t W_r + h_{t-1} U_r + b_r)
///   n_t = tanh(x_t W_n + (r_t * h_{t-1}) U_n + b_n)
///   h_t = z_t * h_{t-1} + (1 - z_t) * n_t
template <typename T>
struct GruCellParams {
  Parameter<T> w_z, w_r, w_n;  // in_dim x hidden
  Parameter<T> u_z, u_r, u_n;  // hidden x hidden
  Parameter<T> b_z, b_r, b_n;  // 1 x hidden

  GruCellParams() = default;
  GruCellParams(const std::string& prefix, int in_dim, int hidden, std::mt19937_64& rng)
      : w_z(prefix + ".w_z", glorot_tensor<T>(in_dim, hidden, rng)),
        w_r(prefix + ".w_r", glorot_tensor<T>(in_dim, hidden, rng)),
        w_n(prefix + ".w_n", glorot_tensor<T>(in_dim, hidden, rng)),
        u_z(prefix + ".u_z", glorot_tensor<T>(hidden, hidden, rng)),
        u_r(prefix + ".u_r", glorot_tensor<T>(hidden, hidden, rng)),
        u_n(prefix + ".u_n", glorot_tensor<T>(hidden, hidden, rng)),
        b_z(prefix + ".b_z", Tensor<T>(1, hidden)),
        b_r(prefix + ".b_r", Tensor<T>(1, hidden)),
        b_n(prefix + ".b_n", Tensor<T>(1, hidden)) {}

  int hidden() const { return u_z.value.rows(); }
  int in_dim() const { return w_z.value.rows(); }

  void collect(std::vector<Parameter<T>*>& out) {
    for (Parameter<T>* p : {&w_z, &w_r, &w_n, &u_z, &u_r, &u_n, &b_z, &b_r, &b_n})
      out.push_back(p);
  }
};

/// Runs one direction over the rows of x (l x in_dim) -> l x hidden.
/// Gate input projections are batched over the whole sequence up front.
template <typename T>
typename Tape<T>::Var gru_direction(Tape<T>& tape, typename Tape<T>::Var x,
                                    GruCellParams<T>& p) {
  using Var = typename Tape<T>::Var;
  const int l = tape.value(x).rows();
  const int hidden = p.hidden();

  Var xz = tape.add_bias(tape.matmul(x, tape.param(p.w_z)), tape.param(p.b_z));
  Var xr = tape.add_bias(tape.matmul(x, tape.param(p.w_r)), tape.param(p.b_r));
  Var xn = tape.add_bias(tape.matmul(x, tape.param(p.w_n)), tape.param(p.b_n));
  Var uz = tape.param(p.u_z), ur = tape.param(p.u_r), un = tape.param(p.u_n);
  Var ones = tape.constant(Tensor<T>::full(1, hidden, T(1)));

  Var h = tape.constant(Tensor<T>(1, hidden));
  std::vector<Var> outputs;
  outputs.reserve(l);
  for (int t = 0; t < l; ++t) {
    Var z = tape.sigmoid(tape.add(tape.slice_rows(xz, t, t + 1), tape.matmul(h, uz)));
    Var r = tape.sigmoid(tape.add(tape.slice_rows(xr, t, t + 1), tape.matmul(h, ur)));
    Var n = tape.tanh(tape.add(tape.slice_rows(xn, t, t + 1), tape.matmul(tape.mul(r, h), un)));
    h = tape.add(tape.mul(z, h), tape.mul(tape.sub(ones, z), n));
    outputs.push_back(h);
  }
  return tape.concat_rows(outputs);
}

/// Bidirectional GRU; each direction carries hidden_total/2 units and the
/// per-position states are concatenated, so the output is l x hidden_total.
template <typename T>
struct BiGruParams {
  GruCellParams<T> fw, bw;

  BiGruParams() = default;
  BiGruParams(const std::string& prefix, int in_dim, int hidden_total, std::mt19937_64& rng)
      : fw(prefix + ".fw", in_dim, hidden_total / 2, rng),
        bw(prefix + ".bw", in_dim, hidden_total / 2, rng) {
    detail::require(hidden_total % 2 == 0, "BiGruParams: hidden width must be even");
  }

  int hidden_total() const { return 2 * fw.hidden(); }

  void collect(std::vector<Parameter<T>*>& out) {
    fw.collect(out);
    bw.collect(out);
  }
};

template <typename T>
typename Tape<T>::Var bigru_encode(Tape<T>& tape, typename Tape<T>::Var x, BiGruParams<T>& p) {
  detail::require(tape.value(x).rows() >= 1, "bigru_encode: empty sequence");
  auto forward = gru_direction(tape, x, p.fw);
  auto backward = tape.reverse_rows(gru_direction(tape, tape.reverse_rows(x), p.bw));
  return tape.concat_cols(forward, backward);
}

}  // namespace hde
