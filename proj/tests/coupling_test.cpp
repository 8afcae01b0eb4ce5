#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hba/coupling.hpp"
#include "hba/ops.hpp"

using namespace hba;

namespace {

Array randn(std::vector<std::size_t> shape, std::mt19937_64& rng,
            double std = 1.0) {
  std::normal_distribution<double> d(0.0, std);
  Array a = Array::zeros(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] = d(rng);
  return a;
}

CouplingStackConfig small_stack_cfg(TransformKind kind, int d = 1,
                                    int ctx = 1, int steps = 4) {
  CouplingStackConfig cfg;
  cfg.data_channels = d;
  cfg.context_channels = ctx;
  cfg.steps = steps;
  cfg.kind = kind;
  cfg.net.hidden_channels = 6;
  cfg.net.layers = 2;
  cfg.net.kernel = 3;
  cfg.net.dilations = {1, 2};
  return cfg;
}

// Randomize every parameter (including the zero-init heads) so the
// stack is away from identity.
void randomize(ParamStore& store, std::mt19937_64& rng, double std = 0.4) {
  std::normal_distribution<double> d(0.0, std);
  for (auto& [name, arr] : store.all())
    for (std::size_t i = 0; i < arr.numel(); ++i) arr[i] = d(rng);
}

}  // namespace

TEST_CASE("nlsq raw zeros give the identity map") {
  nlsq::Params p = nlsq::realize(0, 0, 0, 0, 0);
  CHECK(p.a == 0.0);
  CHECK(p.b == 1.0);
  CHECK(p.c == 0.0);
  for (double l : {-3.0, 0.0, 1.7})
    CHECK(nlsq::forward(l, p) == doctest::Approx(l));
  CHECK(nlsq::deriv(0.5, p) == doctest::Approx(1.0));
}

TEST_CASE("nlsq derivative stays positive inside the margin") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 2.0);
  for (int rep = 0; rep < 2000; ++rep) {
    nlsq::Params p =
        nlsq::realize(d(rng), d(rng) * 0.5, d(rng), d(rng) * 0.5, d(rng));
    for (double l = -6.0; l <= 6.0; l += 0.37)
      CHECK(nlsq::deriv(l, p) > 0.0);
  }
}

TEST_CASE("nlsq inverse matches forward over 10^4 random points") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 1.5);
  for (int rep = 0; rep < 10000; ++rep) {
    nlsq::Params p =
        nlsq::realize(d(rng), d(rng) * 0.5, d(rng), d(rng) * 0.5, d(rng));
    double l = d(rng) * 2.0;
    double lp = nlsq::forward(l, p);
    double back = nlsq::inverse(lp, p);
    CHECK(std::abs(back - l) < 1e-9);
  }
}

TEST_CASE("affine identity and worked example") {
  Tape tape;
  Value l = tape.leaf(Array({1, 1}, {1.0}));
  {
    Value s = tape.leaf(Array({1, 1}, {0.0}));
    Value t = tape.leaf(Array({1, 1}, {0.0}));
    TransformResult r = affine_forward(l, s, t);
    CHECK(r.out.val()[0] == doctest::Approx(1.0));
    CHECK(r.logdet.item() == doctest::Approx(0.0));
  }
  {
    Value s = tape.leaf(Array({1, 1}, {std::log(2.0)}));
    Value t = tape.leaf(Array({1, 1}, {1.0}));
    TransformResult r = affine_forward(l, s, t);
    CHECK(r.out.val()[0] == doctest::Approx(3.0));
    CHECK(r.logdet.item() == doctest::Approx(std::log(2.0)));
  }
}

TEST_CASE("affine inverse round-trips to 1e-12") {
  std::mt19937_64 rng(3);
  Array l = randn({2, 8}, rng);
  Array s = randn({2, 8}, rng, 0.8);
  Array t = randn({2, 8}, rng);
  Tape tape;
  TransformResult r =
      affine_forward(tape.leaf(l), tape.leaf(s), tape.leaf(t));
  Array back = affine_inverse(r.out.val(), s, t);
  for (std::size_t i = 0; i < l.numel(); ++i)
    CHECK(std::abs(back[i] - l[i]) < 1e-12);
}

TEST_CASE("tape nlsq agrees with scalar reference and inverts") {
  std::mt19937_64 rng(4);
  std::size_t d = 2, T = 6;
  Array l = randn({d, T}, rng, 1.5);
  Array raw = randn({5 * d, T}, rng, 0.7);
  Tape tape;
  TransformResult r = nlsq_forward(tape.leaf(l), tape.leaf(raw));

  double ld_ref = 0.0;
  for (std::size_t ch = 0; ch < d; ++ch)
    for (std::size_t t = 0; t < T; ++t) {
      nlsq::Params p =
          nlsq::realize(raw.at2(ch, t), raw.at2(d + ch, t),
                        raw.at2(2 * d + ch, t), raw.at2(3 * d + ch, t),
                        raw.at2(4 * d + ch, t));
      CHECK(r.out.val().at2(ch, t) ==
            doctest::Approx(nlsq::forward(l.at2(ch, t), p)).epsilon(1e-12));
      ld_ref += std::log(nlsq::deriv(l.at2(ch, t), p));
    }
  CHECK(r.logdet.item() == doctest::Approx(ld_ref).epsilon(1e-12));

  Array back = nlsq_inverse_plain(r.out.val(), raw);
  for (std::size_t i = 0; i < l.numel(); ++i)
    CHECK(std::abs(back[i] - l[i]) < 1e-9);
}

TEST_CASE("zero-initialized stack is the identity with zero logdet") {
  for (TransformKind kind : {TransformKind::Affine, TransformKind::Nlsq}) {
    CouplingStack stack("s", small_stack_cfg(kind, 2, 3));
    ParamStore store;
    std::mt19937_64 rng(5);
    stack.init_params(store, rng);

    Array f = randn({2, 8}, rng);
    Array ctx = randn({3, 8}, rng);
    Tape tape;
    BoundParams p = bind_params(tape, store, false);
    auto out = stack.forward(p, tape.leaf(f), tape.leaf(ctx));
    for (std::size_t i = 0; i < f.numel(); ++i)
      CHECK(out.z.val()[i] == doctest::Approx(f[i]).epsilon(1e-14));
    CHECK(out.logdet.item() == doctest::Approx(0.0));
  }
}

TEST_CASE("odd step count is rejected") {
  CHECK_THROWS_AS(CouplingStack("s", small_stack_cfg(TransformKind::Nlsq, 1, 1,
                                                     3)),
                  std::invalid_argument);
}

TEST_CASE("context length mismatch is rejected") {
  CouplingStack stack("s", small_stack_cfg(TransformKind::Nlsq, 1, 1));
  ParamStore store;
  std::mt19937_64 rng(6);
  stack.init_params(store, rng);
  Tape tape;
  BoundParams p = bind_params(tape, store, false);
  CHECK_THROWS_AS(stack.forward(p, tape.leaf(Array::zeros({1, 8})),
                                tape.leaf(Array::zeros({1, 6}))),
                  std::invalid_argument);
}

TEST_CASE("randomized stacks invert: affine 1e-12, nlsq 1e-9") {
  std::mt19937_64 rng(7);
  for (TransformKind kind : {TransformKind::Affine, TransformKind::Nlsq}) {
    double tol = kind == TransformKind::Affine ? 1e-12 : 1e-9;
    CouplingStack stack("s", small_stack_cfg(kind, 2, 2));
    ParamStore store;
    stack.init_params(store, rng);
    randomize(store, rng);
    for (int rep = 0; rep < 50; ++rep) {
      Array f = randn({2, 8}, rng, 1.5);
      Array ctx = randn({2, 8}, rng);
      Tape tape;
      BoundParams p = bind_params(tape, store, false);
      auto out = stack.forward(p, tape.leaf(f), tape.leaf(ctx));
      Array back = stack.inverse(store, out.z.val(), ctx);
      for (std::size_t i = 0; i < f.numel(); ++i)
        CHECK(std::abs(back[i] - f[i]) < tol);
    }
  }
}

TEST_CASE("stack logdet matches brute-force Jacobian determinant") {
  std::mt19937_64 rng(8);
  CouplingStack stack("s", small_stack_cfg(TransformKind::Nlsq, 1, 1, 2));
  ParamStore store;
  stack.init_params(store, rng);
  randomize(store, rng);

  Array f = randn({1, 4}, rng);
  Array ctx = randn({1, 4}, rng);
  auto fwd = [&](const Array& ff) {
    Tape tape;
    BoundParams p = bind_params(tape, store, false);
    auto out = stack.forward(p, tape.leaf(ff), tape.leaf(ctx));
    return std::pair<Array, double>(out.z.val(), out.logdet.item());
  };
  auto base = fwd(f);

  std::size_t n = f.numel();
  double h = 1e-6;
  std::vector<std::vector<double>> J(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    Array fp = f, fm = f;
    fp[j] += h;
    fm[j] -= h;
    Array zp = fwd(fp).first, zm = fwd(fm).first;
    for (std::size_t i = 0; i < n; ++i)
      J[i][j] = (zp[i] - zm[i]) / (2 * h);
  }
  // Gaussian elimination for log|det|.
  double ld = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(J[r][k]) > std::abs(J[piv][k])) piv = r;
    std::swap(J[k], J[piv]);
    ld += std::log(std::abs(J[k][k]));
    for (std::size_t r = k + 1; r < n; ++r) {
      double m = J[r][k] / J[k][k];
      for (std::size_t c = k; c < n; ++c) J[r][c] -= m * J[k][c];
    }
  }
  CHECK(base.second == doctest::Approx(ld).epsilon(1e-5));
}

TEST_CASE("perturbing the context changes the transform") {
  std::mt19937_64 rng(9);
  CouplingStack stack("s", small_stack_cfg(TransformKind::Nlsq, 1, 1));
  ParamStore store;
  stack.init_params(store, rng);
  randomize(store, rng);

  Array f = randn({1, 8}, rng);
  Array ctx = randn({1, 8}, rng);
  Array ctx2 = ctx;
  ctx2[3] += 0.5;
  Tape tape;
  BoundParams p = bind_params(tape, store, false);
  Array z1 = stack.forward(p, tape.leaf(f), tape.leaf(ctx)).z.val();
  Array z2 = stack.forward(p, tape.leaf(f), tape.leaf(ctx2)).z.val();
  double diff = 0.0;
  for (std::size_t i = 0; i < z1.numel(); ++i)
    diff += std::abs(z1[i] - z2[i]);
  CHECK(diff > 1e-8);
}

TEST_CASE("alternating parity lets every position be transformed") {
  // After a full even-length stack, changing any single input coordinate
  // must change the matching output coordinate (no frozen lane).
  std::mt19937_64 rng(10);
  CouplingStack stack("s", small_stack_cfg(TransformKind::Affine, 1, 1, 2));
  ParamStore store;
  stack.init_params(store, rng);
  randomize(store, rng);
  Array f = randn({1, 8}, rng);
  Array ctx = randn({1, 8}, rng);
  auto fwd = [&](const Array& ff) {
    Tape tape;
    BoundParams p = bind_params(tape, store, false);
    return stack.forward(p, tape.leaf(ff), tape.leaf(ctx)).z.val();
  };
  Array z0 = fwd(f);
  for (std::size_t j = 0; j < f.numel(); ++j) {
    Array f2 = f;
    f2[j] += 1e-3;
    Array z = fwd(f2);
    CHECK(std::abs(z[j] - z0[j]) > 0.0);
  }
}

TEST_CASE("stack gradients match finite differences") {
  std::mt19937_64 rng(11);
  CouplingStack stack("s", small_stack_cfg(TransformKind::Nlsq, 1, 1, 2));
  ParamStore store;
  stack.init_params(store, rng);
  randomize(store, rng, 0.3);

  Array f = randn({1, 4}, rng);
  Array ctx = randn({1, 4}, rng);
  auto loss_of = [&](const ParamStore& s) {
    Tape tape;
    BoundParams p = bind_params(tape, s, false);
    auto out = stack.forward(p, tape.leaf(f), tape.leaf(ctx));
    return sum(square(out.z)).item() + out.logdet.item();
  };

  Tape tape;
  BoundParams p = bind_params(tape, store, true);
  auto out = stack.forward(p, tape.leaf(f), tape.leaf(ctx));
  Value loss = add(sum(square(out.z)), out.logdet);
  tape.backward(loss);

  double h = 1e-5;
  for (auto& [name, arr] : store.all()) {
    const Array& g = tape.grad(p.at(name).id);
    for (std::size_t i = 0; i < arr.numel(); i += std::max<std::size_t>(
             1, arr.numel() / 5)) {  // spot-check a few entries per tensor
      ParamStore pert;
      for (auto& [n2, a2] : store.all()) pert.create(n2, a2);
      pert.at(name)[i] += h;
      double up = loss_of(pert);
      pert.at(name)[i] -= 2 * h;
      double dn = loss_of(pert);
      double fd = (up - dn) / (2 * h);
      double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
      CHECK(std::abs(fd - g[i]) / denom < 1e-4);
    }
  }
}
