#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hde/grad_check.hpp"
#include "hde/rng.hpp"
#include "hde/tape.hpp"
#include "hde/tensor.hpp"

using hde::GradCheckOptions;
using hde::Parameter;
using hde::ShapeError;
using hde::Tape;
using hde::Tensor;

namespace {

Tensor<double> random_tensor(int r, int c, std::mt19937_64& rng, double lo = -1.0,
                             double hi = 1.0) {
  return hde::uniform_tensor<double>(r, c, lo, hi, rng);
}

// Independent triple-loop product; the oracle the tape's matmul is checked against.
Tensor<double> matmul_oracle(const Tensor<double>& a, const Tensor<double>& b) {
  Tensor<double> c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      for (int k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

// Row-wise exp-normalize at extended precision.
Tensor<double> softmax_oracle(const Tensor<double>& a) {
  Tensor<double> c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    long double sum = 0.0L;
    for (int j = 0; j < a.cols(); ++j) sum += expl(static_cast<long double>(a(i, j)));
    for (int j = 0; j < a.cols(); ++j)
      c(i, j) = static_cast<double>(expl(static_cast<long double>(a(i, j))) / sum);
  }
  return c;
}

void expect_tensor_near(const Tensor<double>& got, const Tensor<double>& want, double tol) {
  ASSERT_EQ(got.rows(), want.rows());
  ASSERT_EQ(got.cols(), want.cols());
  for (int i = 0; i < got.rows(); ++i)
    for (int j = 0; j < got.cols(); ++j) EXPECT_NEAR(got(i, j), want(i, j), tol);
}

}  // namespace

TEST(Matmul, IdentityCase) {
  Tensor<double> eye = Tensor<double>::identity(2);
  Tensor<double> v(2, 1, {3, 4});
  expect_tensor_near(hde::matmul(eye, v), v, 0.0);
}

TEST(Matmul, RowByColumn) {
  Tensor<double> a(1, 2, {1, 2});
  Tensor<double> b(2, 1, {3, 4});
  Tensor<double> c = hde::matmul(a, b);
  ASSERT_EQ(c.rows(), 1);
  ASSERT_EQ(c.cols(), 1);
  EXPECT_DOUBLE_EQ(c(0, 0), 11.0);
}

TEST(Matmul, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(11);
  Tensor<double> a = random_tensor(3, 4, rng);
  Tensor<double> b = random_tensor(4, 2, rng);
  expect_tensor_near(hde::matmul(a, b), matmul_oracle(a, b), 1e-12);
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  Tensor<double> a(2, 3), b(2, 3);
  try {
    hde::matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matmul, AssociativeWithIdentity) {
  std::mt19937_64 rng(12);
  Tensor<double> a = random_tensor(5, 5, rng);
  Tensor<double> b = random_tensor(5, 5, rng);
  Tensor<double> c = random_tensor(5, 5, rng);
  expect_tensor_near(hde::matmul(hde::matmul(a, b), c), hde::matmul(a, hde::matmul(b, c)), 1e-10);
  expect_tensor_near(hde::matmul(a, Tensor<double>::identity(5)), a, 0.0);
  expect_tensor_near(hde::matmul(Tensor<double>::identity(5), a), a, 0.0);
}

TEST(Matmul, TransposedVariantsAgreeWithOracle) {
  std::mt19937_64 rng(13);
  Tensor<double> a = random_tensor(4, 3, rng);
  Tensor<double> b = random_tensor(4, 5, rng);
  expect_tensor_near(hde::matmul_tn(a, b), matmul_oracle(hde::transpose(a), b), 1e-12);
  Tensor<double> c = random_tensor(6, 3, rng);
  expect_tensor_near(hde::matmul_nt(a, c), matmul_oracle(a, hde::transpose(c)), 1e-12);
}

TEST(Softmax, SymmetricRow) {
  Tensor<double> x(1, 2, {0, 0});
  Tensor<double> y = hde::softmax_rows(x);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.5);
}

TEST(Softmax, StableUnderLargeEqualLogits) {
  Tensor<double> x(1, 3, {1000, 1000, 1000});
  Tensor<double> y = hde::softmax_rows(x);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(y(0, j), 1.0 / 3.0, 1e-15);
}

TEST(Softmax, MatchesHighPrecisionOracle) {
  Tensor<double> x(2, 2, {1, 2, 3, 0});
  expect_tensor_near(hde::softmax_rows(x), softmax_oracle(x), 1e-14);
}

TEST(Softmax, RowsSumToOneOverWideRange) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<double> x = random_tensor(3, 7, rng, -1e3, 1e3);
    Tensor<double> y = hde::softmax_rows(x);
    for (int i = 0; i < y.rows(); ++i) {
      double s = 0;
      for (int j = 0; j < y.cols(); ++j) {
        s += y(i, j);
        EXPECT_GE(y(i, j), 0.0);
        EXPECT_LE(y(i, j), 1.0 + 1e-12);
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
  // strictly inside (0,1) when the row spread cannot underflow
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<double> x = random_tensor(2, 5, rng, -8, 8);
    Tensor<double> y = hde::softmax_rows(x);
    for (int i = 0; i < y.rows(); ++i)
      for (int j = 0; j < y.cols(); ++j) {
        EXPECT_GT(y(i, j), 0.0);
        EXPECT_LT(y(i, j), 1.0);
      }
  }
}

TEST(Elementwise, TrivialValues) {
  Tensor<double> z(1, 1, {0});
  EXPECT_DOUBLE_EQ(hde::tanh_elem(z)(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(hde::sigmoid_elem(z)(0, 0), 0.5);
  Tensor<double> a(1, 2, {2, 3}), b(1, 2, {4, 5});
  Tensor<double> m = hde::mul(a, b);
  EXPECT_DOUBLE_EQ(m(0, 0), 8.0);
  EXPECT_DOUBLE_EQ(m(0, 1), 15.0);
}

TEST(Elementwise, BinaryShapeMismatchThrows) {
  Tensor<double> a(1, 2), b(2, 1);
  EXPECT_THROW(hde::mul(a, b), ShapeError);
  EXPECT_THROW(hde::add(a, b), ShapeError);
}

TEST(ConcatColumns, Basics) {
  Tensor<double> a(1, 1, {1}), b(1, 1, {2});
  Tensor<double> c = hde::concat_cols(a, b);
  ASSERT_EQ(c.rows(), 1);
  ASSERT_EQ(c.cols(), 2);
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 2.0);

  std::mt19937_64 rng(15);
  int m = 3, h = 4;
  Tensor<double> p = random_tensor(m, h, rng), q = random_tensor(m, h, rng);
  Tensor<double> cat = hde::concat_cols(p, q);
  EXPECT_EQ(cat.rows(), m);
  EXPECT_EQ(cat.cols(), 2 * h);

  // split back: bit-exact round trip
  Tensor<double> left(m, h), right(m, h);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < h; ++j) {
      left(i, j) = cat(i, j);
      right(i, j) = cat(i, j + h);
    }
  EXPECT_TRUE(left == p);
  EXPECT_TRUE(right == q);

  Tensor<double> bad(m + 1, h);
  EXPECT_THROW(hde::concat_cols(p, bad), ShapeError);
}

TEST(Parameter, GradShapeTracksValueAndZeroGrad) {
  Parameter<double> p("w", Tensor<double>(3, 2, {1, 2, 3, 4, 5, 6}));
  ASSERT_TRUE(p.grad.same_shape(p.value));
  p.grad(1, 1) = 7.0;
  p.zero_grad();
  for (size_t i = 0; i < p.grad.size(); ++i) EXPECT_DOUBLE_EQ(p.grad.data()[i], 0.0);
}

TEST(Tape, ForwardDeterminism) {
  auto run = [] {
    std::mt19937_64 rng(99);
    Tensor<double> a = random_tensor(4, 4, rng);
    Tensor<double> b = random_tensor(4, 4, rng);
    Tape<double> t;
    auto y = t.tanh(t.matmul(t.constant(a), t.constant(b)));
    return t.value(y);
  };
  EXPECT_TRUE(run() == run());
}

TEST(GradCheck, SquareFunction) {
  Parameter<double> x("x", Tensor<double>(1, 1, {3}));
  auto loss = [&](bool want_grad) {
    Tape<double> t;
    auto v = t.param(x);
    auto y = t.mul(v, v);
    if (want_grad) t.backward(y);
    return t.value(y)(0, 0);
  };
  auto rep = hde::grad_check<double>(loss, {&x}, {.epsilon = 1e-5});
  EXPECT_TRUE(rep.finite);
  EXPECT_NEAR(x.grad(0, 0), 6.0, 1e-8);
  EXPECT_LT(rep.max_rel_err, 1e-8);
}

TEST(GradCheck, TanhOfLinearMap) {
  std::mt19937_64 rng(16);
  Parameter<double> w("W", random_tensor(4, 4, rng));
  Tensor<double> x = random_tensor(4, 1, rng);
  auto loss = [&](bool want_grad) {
    Tape<double> t;
    auto y = t.sum_all(t.tanh(t.matmul(t.param(w), t.constant(x))));
    if (want_grad) t.backward(y);
    return t.value(y)(0, 0);
  };
  auto rep = hde::grad_check<double>(loss, {&w}, {.epsilon = 1e-5});
  EXPECT_TRUE(rep.finite);
  EXPECT_LT(rep.max_rel_err, 1e-6);
}

TEST(GradCheck, NonFiniteDiagnosticNamesParameter) {
  Parameter<double> x("culprit", Tensor<double>(1, 1, {0.0}));
  auto loss = [&](bool want_grad) {
    Tape<double> t;
    auto v = t.param(x);
    auto y = t.mul(v, v);
    if (want_grad) t.backward(y);
    double val = t.value(y)(0, 0);
    return val == 0.0 ? val : std::numeric_limits<double>::quiet_NaN();
  };
  auto rep = hde::grad_check<double>(loss, {&x}, {.epsilon = 1e-5});
  EXPECT_FALSE(rep.finite);
  EXPECT_NE(rep.diagnostic.find("culprit"), std::string::npos);
}

// Every differentiable tape op, driven through a random readout so no
// symmetric-gradient mistake can hide.
TEST(GradCheck, EveryTapeOp) {
  std::mt19937_64 rng(17);
  struct Case {
    const char* name;
    std::function<Tape<double>::Var(Tape<double>&, Tape<double>::Var, Tape<double>::Var)> op;
    int rows_a, cols_a, rows_b, cols_b;  // b unused when negative
  };
  using Tp = Tape<double>;
  std::vector<Case> cases = {
      {"add", [](Tp& t, Tp::Var a, Tp::Var b) { return t.add(a, b); }, 3, 4, 3, 4},
      {"sub", [](Tp& t, Tp::Var a, Tp::Var b) { return t.sub(a, b); }, 3, 4, 3, 4},
      {"mul", [](Tp& t, Tp::Var a, Tp::Var b) { return t.mul(a, b); }, 3, 4, 3, 4},
      {"scale", [](Tp& t, Tp::Var a, Tp::Var) { return t.scale(a, 1.7); }, 3, 4, -1, -1},
      {"add_bias", [](Tp& t, Tp::Var a, Tp::Var b) { return t.add_bias(a, b); }, 3, 4, 1, 4},
      {"matmul", [](Tp& t, Tp::Var a, Tp::Var b) { return t.matmul(a, b); }, 3, 4, 4, 2},
      {"transpose", [](Tp& t, Tp::Var a, Tp::Var) { return t.transpose(a); }, 3, 4, -1, -1},
      {"tanh", [](Tp& t, Tp::Var a, Tp::Var) { return t.tanh(a); }, 3, 4, -1, -1},
      {"sigmoid", [](Tp& t, Tp::Var a, Tp::Var) { return t.sigmoid(a); }, 3, 4, -1, -1},
      {"softmax", [](Tp& t, Tp::Var a, Tp::Var) { return t.softmax_rows(a); }, 3, 4, -1, -1},
      {"concat_cols", [](Tp& t, Tp::Var a, Tp::Var b) { return t.concat_cols(a, b); }, 3, 2, 3,
       3},
      {"concat_rows",
       [](Tp& t, Tp::Var a, Tp::Var b) {
         return t.concat_rows({a, b});
       },
       2, 4, 3, 4},
      {"slice_rows", [](Tp& t, Tp::Var a, Tp::Var) { return t.slice_rows(a, 1, 3); }, 4, 3, -1,
       -1},
      {"reverse_rows", [](Tp& t, Tp::Var a, Tp::Var) { return t.reverse_rows(a); }, 4, 3, -1, -1},
  };

  for (const auto& c : cases) {
    Parameter<double> pa("a", random_tensor(c.rows_a, c.cols_a, rng));
    bool binary = c.rows_b > 0;
    Parameter<double> pb("b", binary ? random_tensor(c.rows_b, c.cols_b, rng)
                                     : Tensor<double>(1, 1));
    Tensor<double> readout;
    auto loss = [&](bool want_grad) {
      Tape<double> t;
      auto va = t.param(pa);
      auto vb = binary ? t.param(pb) : Tp::Var{};
      auto y = c.op(t, va, vb);
      if (readout.empty()) readout = random_tensor(t.value(y).rows(), t.value(y).cols(), rng);
      auto out = t.sum_all(t.mul(y, t.constant(readout)));
      if (want_grad) t.backward(out);
      return t.value(out)(0, 0);
    };
    std::vector<Parameter<double>*> ps = {&pa};
    if (binary) ps.push_back(&pb);
    auto rep = hde::grad_check<double>(loss, ps, {.epsilon = 1e-5});
    EXPECT_TRUE(rep.finite) << c.name;
    EXPECT_LT(rep.max_rel_err, 1e-5) << c.name << " worst=" << rep.worst_param;
  }
}

TEST(GradCheck, CrossEntropyAndSegmentMaxOps) {
  std::mt19937_64 rng(18);
  Parameter<double> scores("scores", random_tensor(6, 1, rng));
  std::vector<std::vector<int>> segments = {{0, 2}, {1, 3, 4}, {}};
  auto loss = [&](bool want_grad) {
    Tape<double> t;
    auto s = t.param(scores);
    auto seg = t.segment_max(s, segments);
    auto last = t.slice_rows(s, 5, 6);
    auto all = t.concat_rows({seg, last});
    auto out = t.cross_entropy(all, 1);
    if (want_grad) t.backward(out);
    return t.value(out)(0, 0);
  };
  auto rep = hde::grad_check<double>(loss, {&scores}, {.epsilon = 1e-5});
  EXPECT_TRUE(rep.finite);
  EXPECT_LT(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Tape, SegmentMaxTieRoutesToLowestIndex) {
  Tensor<double> s(3, 1, {0.7, 0.7, 0.1});
  Parameter<double> p("s", s);
  Tape<double> t;
  auto v = t.param(p);
  auto seg = t.segment_max(v, {{0, 1, 2}});
  auto out = t.sum_all(seg);
  t.backward(out);
  EXPECT_DOUBLE_EQ(p.grad(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p.grad(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(p.grad(2, 0), 0.0);
}

TEST(Tape, FiniteForwardValuesOnFiniteInputs) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> a = random_tensor(3, 3, rng, -50, 50);
    Tape<double> t;
    auto x = t.constant(a);
    auto y = t.softmax_rows(t.tanh(t.matmul(x, x)));
    EXPECT_TRUE(t.value(y).all_finite());
  }
}
