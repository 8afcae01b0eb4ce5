#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hba/kernels.hpp"
#include "hba/ops.hpp"

using namespace hba;

namespace {

Array random_array(std::vector<std::size_t> shape, std::mt19937_64& rng,
                   double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Array a = Array::zeros(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] = dist(rng);
  return a;
}

// Backward gradient of f(leaf) vs central differences.
void check_gradient(const std::function<Value(Tape&, Value)>& build,
                    const Array& x, double rel_tol = 1e-4) {
  Tape tape;
  Value leaf = tape.leaf(x, true);
  Value loss = build(tape, leaf);
  tape.backward(loss);
  Array got = tape.grad(leaf.id);

  Array fd = finite_diff_gradient(
      [&](const Array& xp) {
        Tape t2;
        Value l2 = t2.leaf(xp, false);
        return build(t2, l2).item();
      },
      x);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    double denom = std::max({std::abs(got[i]), std::abs(fd[i]), 1e-6});
    CHECK(std::abs(got[i] - fd[i]) / denom < rel_tol);
  }
}

}  // namespace

TEST_CASE("elementwise forward basics") {
  Tape tape;
  Value a = tape.leaf(Array({2}, {1, 2}));
  Value b = tape.leaf(Array({2}, {3, 4}));
  Array r = add(a, b).val();
  CHECK(r[0] == 4);
  CHECK(r[1] == 6);
  CHECK(sigmoid(tape.leaf(Array::scalar(0.0))).item() == doctest::Approx(0.5));
  CHECK(sub(a, b).val()[0] == -2);
  CHECK(mul(a, b).val()[1] == 8);
  CHECK(div(b, a).val()[1] == 2);
}

TEST_CASE("shape mismatch names the op and shapes") {
  Tape tape;
  Value a = tape.leaf(Array::zeros({2, 3}));
  Value b = tape.leaf(Array::zeros({2, 4}));
  CHECK_THROWS_WITH_AS(add(a, b),
                       doctest::Contains("add"), std::invalid_argument);
}

TEST_CASE("broadcasting: trailing dims equal or 1") {
  Tape tape;
  Value m = tape.leaf(Array({2, 3}, {1, 2, 3, 4, 5, 6}));
  Value col = tape.leaf(Array({2, 1}, {10, 20}));
  Array r = add(m, col).val();
  CHECK(r.shape() == std::vector<std::size_t>{2, 3});
  CHECK(r[0] == 11);
  CHECK(r[5] == 26);
  Value s = tape.leaf(Array::scalar(100.0));
  CHECK(add(m, s).val()[4] == 105);
}

TEST_CASE("identity-kernel dilated conv preserves input") {
  Tape tape;
  std::mt19937_64 rng(7);
  Array in = random_array({5, 7}, rng);
  // One 1x1-ish kernel per channel routing channel c to channel c.
  Array w = Array::zeros({5, 5, 1});
  for (std::size_t c = 0; c < 5; ++c) w[c * 5 + c] = 1.0;
  Array r = kernels::conv1d(in, w, Array{}, 2);
  for (std::size_t i = 0; i < in.numel(); ++i)
    CHECK(r[i] == doctest::Approx(in[i]));
}

TEST_CASE("conv serial and OpenMP kernels agree bitwise") {
  std::mt19937_64 rng(11);
  Array in = random_array({4, 16}, rng);
  Array w = random_array({6, 4, 3}, rng);
  Array b = random_array({6, 1}, rng);
  for (int dil : {1, 2, 4}) {
    Array s = kernels::conv1d_serial(in, w, b, dil);
    Array p = kernels::conv1d_omp(in, w, b, dil);
    for (std::size_t i = 0; i < s.numel(); ++i) CHECK(s[i] == p[i]);
    Array gout = random_array({6, 16}, rng);
    Array gi1, gw1, gb1, gi2, gw2, gb2;
    kernels::conv1d_backward_serial(in, w, gout, dil, gi1, gw1, gb1);
    kernels::conv1d_backward_omp(in, w, gout, dil, gi2, gw2, gb2);
    for (std::size_t i = 0; i < gi1.numel(); ++i) CHECK(gi1[i] == gi2[i]);
    for (std::size_t i = 0; i < gw1.numel(); ++i) CHECK(gw1[i] == gw2[i]);
    for (std::size_t i = 0; i < gb1.numel(); ++i) CHECK(gb1[i] == gb2[i]);
  }
}

TEST_CASE("backward hand examples") {
  {
    Tape tape;
    Value x = tape.leaf(Array::scalar(3.0), true);
    Value loss = mul(x, x);
    tape.backward(loss);
    CHECK(tape.grad(x.id)[0] == doctest::Approx(6.0));
  }
  {
    Tape tape;
    Value x = tape.leaf(Array({2}, {0, 0}), true);
    tape.backward(sum(exp(x)));
    CHECK(tape.grad(x.id)[0] == doctest::Approx(1.0));
    CHECK(tape.grad(x.id)[1] == doctest::Approx(1.0));
  }
  {
    // d/dx log(sigmoid(x)) at 0 = 1 - sigmoid(0) = 0.5
    Tape tape;
    Value x = tape.leaf(Array::scalar(0.0), true);
    tape.backward(log(sigmoid(x)));
    CHECK(tape.grad(x.id)[0] == doctest::Approx(0.5));
  }
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape tape;
  Value x = tape.leaf(Array({2}, {1, 2}), true);
  Value y = mul(x, x);
  CHECK_THROWS_AS(tape.backward(y), std::logic_error);
}

TEST_CASE("finite differences oracle sanity") {
  auto sq = [](const Array& a) { return a[0] * a[0]; };
  Array g = finite_diff_gradient(sq, Array::scalar(3.0));
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-6));

  auto cube = [](const Array& a) { return a[0] * a[0] * a[0]; };
  g = finite_diff_gradient(cube, Array::scalar(2.0));
  CHECK(std::abs(g[0] - 12.0) < 1e-4);

  auto cst = [](const Array&) { return 4.2; };
  g = finite_diff_gradient(cst, Array({3}, {1, 2, 3}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("every primitive matches finite differences at random points") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    Array x = random_array({2, 4}, rng, 0.1, 2.0);  // positive, log-safe
    Array other = random_array({2, 4}, rng, 0.5, 2.0);
    Array colv = random_array({2, 1}, rng, 0.5, 2.0);

    check_gradient([&](Tape& t, Value v) {
      Value o = t.leaf(other);
      return sum(mul(add(v, o), sub(v, o)));
    }, x);
    check_gradient([&](Tape& t, Value v) {
      return sum(div(t.leaf(other), v));
    }, x);
    check_gradient([&](Tape& t, Value v) {
      return mean(add(exp(neg(v)), log(v)));
    }, x);
    check_gradient([&](Tape& t, Value v) {
      return sum(mul(tanh(v), sigmoid(v)));
    }, x);
    check_gradient([&](Tape& t, Value v) {
      return sum(square(sum_time(mul(v, t.leaf(colv)))));
    }, x);
    check_gradient([&](Tape& t, Value v) {
      Value e = slice_stride2(v, 1);
      Value o = slice_stride2(v, 0);
      return sum(square(interleave(sub(o, e), add(o, e))));
    }, x);
    check_gradient([&](Tape& t, Value v) {
      return sum(square(concat_rows(v, slice_rows(v, 0, 1))));
    }, x);
  }
}

TEST_CASE("conv and affine gradients match finite differences") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Array in = random_array({3, 8}, rng);
    Array w = random_array({2, 3, 3}, rng);
    Array b = random_array({2, 1}, rng);
    // w.r.t. input
    check_gradient([&](Tape& t, Value v) {
      return sum(square(conv1d(v, t.leaf(w), t.leaf(b), 2)));
    }, in);
    // w.r.t. weight
    check_gradient([&](Tape& t, Value v) {
      return sum(square(conv1d(t.leaf(in), v, t.leaf(b), 2)));
    }, w);
    // w.r.t. bias
    check_gradient([&](Tape& t, Value v) {
      return sum(square(conv1d(t.leaf(in), t.leaf(w), v, 2)));
    }, b);

    Array W = random_array({3, 4}, rng);
    Array xv = random_array({4}, rng);
    Array bv = random_array({3}, rng);
    check_gradient([&](Tape& t, Value v) {
      return sum(square(affine(v, t.leaf(xv), t.leaf(bv))));
    }, W);
    check_gradient([&](Tape& t, Value v) {
      return sum(square(affine(t.leaf(W), v, t.leaf(bv))));
    }, xv);
  }
}

TEST_CASE("forward evaluation is pure") {
  std::mt19937_64 rng(5);
  Array in = random_array({3, 8}, rng);
  Array w = random_array({2, 3, 3}, rng);
  Array b = random_array({2, 1}, rng);
  Array r1 = kernels::conv1d(in, w, b, 2);
  Array r2 = kernels::conv1d(in, w, b, 2);
  for (std::size_t i = 0; i < r1.numel(); ++i) CHECK(r1[i] == r2[i]);
}
