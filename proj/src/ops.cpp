#include "hba/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hba/kernels.hpp"

namespace hba {

namespace {

void require_same_tape(Value a, Value b, const char* op) {
  if (a.tape != b.tape)
    throw std::logic_error(std::string(op) + ": operands on different tapes");
}

// Iteration plan for trailing-dim broadcasting.
struct BcPlan {
  std::vector<std::size_t> out_shape;
  std::vector<std::size_t> dim;         // output extents
  std::vector<std::size_t> stride_a, stride_b;  // 0 on broadcast dims
  std::size_t numel = 0;
  bool trivial = false;  // shapes equal: flat loop
};

BcPlan make_plan(const Array& a, const Array& b, const char* op) {
  BcPlan p;
  if (!broadcast_shapes(a.shape(), b.shape(), p.out_shape))
    throw std::invalid_argument(std::string(op) + ": shapes not broadcastable " +
                                Array::shape_str(a.shape()) + " vs " +
                                Array::shape_str(b.shape()));
  p.numel = Array::numel_of(p.out_shape);
  if (a.shape() == b.shape()) {
    p.trivial = true;
    return p;
  }
  std::size_t n = p.out_shape.size();
  p.dim = p.out_shape;
  p.stride_a.assign(n, 0);
  p.stride_b.assign(n, 0);
  std::size_t sa = 1, sb = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ax = n - 1 - i;
    std::size_t da = i < a.ndim() ? a.shape()[a.ndim() - 1 - i] : 1;
    std::size_t db = i < b.ndim() ? b.shape()[b.ndim() - 1 - i] : 1;
    p.stride_a[ax] = da == 1 ? 0 : sa;
    p.stride_b[ax] = db == 1 ? 0 : sb;
    sa *= da;
    sb *= db;
  }
  return p;
}

// Visits (out_index, a_index, b_index) for every output element.
template <typename F>
void bc_for_each(const BcPlan& p, F&& f) {
  if (p.trivial) {
    for (std::size_t i = 0; i < p.numel; ++i) f(i, i, i);
    return;
  }
  std::vector<std::size_t> idx(p.dim.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < p.numel; ++i) {
    f(i, ia, ib);
    for (std::size_t ax = p.dim.size(); ax-- > 0;) {
      ++idx[ax];
      ia += p.stride_a[ax];
      ib += p.stride_b[ax];
      if (idx[ax] < p.dim[ax]) break;
      ia -= p.stride_a[ax] * p.dim[ax];
      ib -= p.stride_b[ax] * p.dim[ax];
      idx[ax] = 0;
    }
  }
}

// Binary elementwise op. FwdF: (a,b)->out; GradA/GradB: (a,b,gout)->grad term.
template <typename FwdF, typename GradA, typename GradB>
Value binary_op(const char* name, Value a, Value b, FwdF fwd, GradA ga_f,
                GradB gb_f) {
  require_same_tape(a, b, name);
  Tape& tape = *a.tape;
  const Array& av = a.val();
  const Array& bv = b.val();
  BcPlan plan = make_plan(av, bv, name);
  Array out = Array::zeros(plan.trivial ? av.shape() : plan.out_shape);
  bc_for_each(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    out[i] = fwd(av[ia], bv[ib]);
  });
  int pa = a.id, pb = b.id;
  return tape.record(
      std::move(out), {pa, pb},
      [pa, pb, plan, ga_f, gb_f](Tape& t, int self) {
        const Array& av = t.value(pa);
        const Array& bv = t.value(pb);
        const Array& g = t.grad(self);
        bool need_a = t.requires_grad(pa);
        bool need_b = t.requires_grad(pb);
        Array* gra = need_a ? &t.grad(pa) : nullptr;
        Array* grb = need_b ? &t.grad(pb) : nullptr;
        bc_for_each(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          if (gra) (*gra)[ia] += ga_f(av[ia], bv[ib], g[i]);
          if (grb) (*grb)[ib] += gb_f(av[ia], bv[ib], g[i]);
        });
      });
}

// Unary elementwise op. dF receives (input, output, gout).
template <typename FwdF, typename GradF>
Value unary_op(Value a, FwdF fwd, GradF grad) {
  Tape& tape = *a.tape;
  const Array& av = a.val();
  Array out = Array::zeros(av.shape());
  for (std::size_t i = 0; i < av.numel(); ++i) out[i] = fwd(av[i]);
  int pa = a.id;
  return tape.record(std::move(out), {pa}, [pa, grad](Tape& t, int self) {
    const Array& av = t.value(pa);
    const Array& ov = t.value(self);
    const Array& g = t.grad(self);
    Array& gra = t.grad(pa);
    for (std::size_t i = 0; i < av.numel(); ++i)
      gra[i] += grad(av[i], ov[i], g[i]);
  });
}

}  // namespace

Value add(Value a, Value b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double g) { return g; },
      [](double, double, double g) { return g; });
}

Value sub(Value a, Value b) {
  return binary_op(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double g) { return g; },
      [](double, double, double g) { return -g; });
}

Value mul(Value a, Value b) {
  return binary_op(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y, double g) { return g * y; },
      [](double x, double, double g) { return g * x; });
}

Value div(Value a, Value b) {
  return binary_op(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y, double g) { return g / y; },
      [](double x, double y, double g) { return -g * x / (y * y); });
}

Value neg(Value a) {
  return unary_op(
      a, [](double x) { return -x; },
      [](double, double, double g) { return -g; });
}

Value exp(Value a) {
  return unary_op(
      a, [](double x) { return std::exp(x); },
      [](double, double o, double g) { return g * o; });
}

Value log(Value a) {
  return unary_op(
      a, [](double x) { return std::log(x); },
      [](double x, double, double g) { return g / x; });
}

Value tanh(Value a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); },
      [](double, double o, double g) { return g * (1.0 - o * o); });
}

Value sigmoid(Value a) {
  return unary_op(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double o, double g) { return g * o * (1.0 - o); });
}

Value square(Value a) {
  return unary_op(
      a, [](double x) { return x * x; },
      [](double x, double, double g) { return 2.0 * g * x; });
}

Value sum(Value a) {
  Tape& tape = *a.tape;
  const Array& av = a.val();
  double s = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) s += av[i];
  int pa = a.id;
  return tape.record(Array::scalar(s), {pa}, [pa](Tape& t, int self) {
    const double g = t.grad(self)[0];
    Array& gra = t.grad(pa);
    for (std::size_t i = 0; i < gra.numel(); ++i) gra[i] += g;
  });
}

Value mean(Value a) {
  std::size_t n = a.val().numel();
  return mul_const(sum(a), 1.0 / static_cast<double>(n));
}

Value sum_time(Value a) {
  Tape& tape = *a.tape;
  const Array& av = a.val();
  if (av.ndim() != 2)
    throw std::invalid_argument("sum_time: expects [C,T], got " +
                                Array::shape_str(av.shape()));
  std::size_t C = av.shape()[0], T = av.shape()[1];
  Array out = Array::zeros({C, 1});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < T; ++t) out[c] += av[c * T + t];
  int pa = a.id;
  return tape.record(std::move(out), {pa}, [pa, C, T](Tape& t, int self) {
    const Array& g = t.grad(self);
    Array& gra = t.grad(pa);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t tt = 0; tt < T; ++tt) gra[c * T + tt] += g[c];
  });
}

Value mean_time(Value a) {
  double inv = 1.0 / static_cast<double>(a.val().shape()[1]);
  return mul_const(sum_time(a), inv);
}

Value affine(Value w, Value x, Value b) {
  require_same_tape(w, x, "affine");
  require_same_tape(w, b, "affine");
  Tape& tape = *w.tape;
  const Array& wv = w.val();
  const Array& xv = x.val();
  const Array& bv = b.val();
  if (wv.ndim() != 2 || wv.shape()[1] != xv.numel() ||
      bv.numel() != wv.shape()[0])
    throw std::invalid_argument("affine: shape mismatch, W " +
                                Array::shape_str(wv.shape()) + " x " +
                                Array::shape_str(xv.shape()) + " b " +
                                Array::shape_str(bv.shape()));
  std::size_t m = wv.shape()[0], n = wv.shape()[1];
  Array out = Array::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = bv[i];
    for (std::size_t j = 0; j < n; ++j) acc += wv[i * n + j] * xv[j];
    out[i] = acc;
  }
  int pw = w.id, px = x.id, pb = b.id;
  return tape.record(
      std::move(out), {pw, px, pb}, [pw, px, pb, m, n](Tape& t, int self) {
        const Array& wv = t.value(pw);
        const Array& xv = t.value(px);
        const Array& g = t.grad(self);
        if (t.requires_grad(pw)) {
          Array& gw = t.grad(pw);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gw[i * n + j] += g[i] * xv[j];
        }
        if (t.requires_grad(px)) {
          Array& gx = t.grad(px);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gx[j] += g[i] * wv[i * n + j];
        }
        if (t.requires_grad(pb)) {
          Array& gb = t.grad(pb);
          for (std::size_t i = 0; i < m; ++i) gb[i] += g[i];
        }
      });
}

Value conv1d(Value in, Value w, Value b, int dilation) {
  require_same_tape(in, w, "conv1d");
  require_same_tape(in, b, "conv1d");
  Tape& tape = *in.tape;
  Array out = kernels::conv1d(in.val(), w.val(), b.val(), dilation);
  int pi = in.id, pw = w.id, pb = b.id;
  return tape.record(
      std::move(out), {pi, pw, pb}, [pi, pw, pb, dilation](Tape& t, int self) {
        Array gin, gw, gb;
        kernels::conv1d_backward(t.value(pi), t.value(pw), t.grad(self),
                                 dilation, gin, gw, gb);
        if (t.requires_grad(pi)) {
          Array& g = t.grad(pi);
          for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gin[i];
        }
        if (t.requires_grad(pw)) {
          Array& g = t.grad(pw);
          for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gw[i];
        }
        if (t.requires_grad(pb) && t.value(pb).numel()) {
          Array& g = t.grad(pb);
          for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gb[i];
        }
      });
}

Value concat_rows(Value a, Value b) {
  require_same_tape(a, b, "concat_rows");
  Tape& tape = *a.tape;
  const Array& av = a.val();
  const Array& bv = b.val();
  if (av.ndim() != 2 || bv.ndim() != 2 || av.shape()[1] != bv.shape()[1])
    throw std::invalid_argument("concat_rows: shape mismatch " +
                                Array::shape_str(av.shape()) + " vs " +
                                Array::shape_str(bv.shape()));
  std::size_t c1 = av.shape()[0], c2 = bv.shape()[0], T = av.shape()[1];
  Array out = Array::zeros({c1 + c2, T});
  std::copy(av.data(), av.data() + av.numel(), out.data());
  std::copy(bv.data(), bv.data() + bv.numel(), out.data() + av.numel());
  int pa = a.id, pb = b.id;
  return tape.record(std::move(out), {pa, pb},
                     [pa, pb, c1, c2, T](Tape& t, int self) {
                       const Array& g = t.grad(self);
                       if (t.requires_grad(pa)) {
                         Array& ga = t.grad(pa);
                         for (std::size_t i = 0; i < c1 * T; ++i) ga[i] += g[i];
                       }
                       if (t.requires_grad(pb)) {
                         Array& gb = t.grad(pb);
                         for (std::size_t i = 0; i < c2 * T; ++i)
                           gb[i] += g[c1 * T + i];
                       }
                     });
}

Value slice_rows(Value a, std::size_t r0, std::size_t r1) {
  Tape& tape = *a.tape;
  const Array& av = a.val();
  if (av.ndim() != 2 || r1 > av.shape()[0] || r0 >= r1)
    throw std::invalid_argument("slice_rows: bad range [" + std::to_string(r0) +
                                "," + std::to_string(r1) + ") for " +
                                Array::shape_str(av.shape()));
  std::size_t T = av.shape()[1];
  Array out = Array::zeros({r1 - r0, T});
  std::copy(av.data() + r0 * T, av.data() + r1 * T, out.data());
  int pa = a.id;
  return tape.record(std::move(out), {pa}, [pa, r0, r1, T](Tape& t, int self) {
    const Array& g = t.grad(self);
    Array& ga = t.grad(pa);
    for (std::size_t i = 0; i < (r1 - r0) * T; ++i) ga[r0 * T + i] += g[i];
  });
}

Value slice_stride2(Value a, int offset) {
  Tape& tape = *a.tape;
  const Array& av = a.val();
  if (av.ndim() != 2)
    throw std::invalid_argument("slice_stride2: expects [C,T], got " +
                                Array::shape_str(av.shape()));
  if (offset != 0 && offset != 1)
    throw std::invalid_argument("slice_stride2: offset must be 0 or 1");
  std::size_t C = av.shape()[0], T = av.shape()[1];
  if (T % 2 != 0)
    throw std::invalid_argument("slice_stride2: length " + std::to_string(T) +
                                " is odd");
  std::size_t Th = T / 2;
  Array out = Array::zeros({C, Th});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < Th; ++t)
      out[c * Th + t] = av[c * T + 2 * t + offset];
  int pa = a.id;
  return tape.record(std::move(out), {pa},
                     [pa, C, T, Th, offset](Tape& t, int self) {
                       const Array& g = t.grad(self);
                       Array& ga = t.grad(pa);
                       for (std::size_t c = 0; c < C; ++c)
                         for (std::size_t tt = 0; tt < Th; ++tt)
                           ga[c * T + 2 * tt + offset] += g[c * Th + tt];
                     });
}

Value interleave(Value a, Value b) {
  require_same_tape(a, b, "interleave");
  Tape& tape = *a.tape;
  const Array& av = a.val();
  const Array& bv = b.val();
  if (!av.same_shape(bv) || av.ndim() != 2)
    throw std::invalid_argument("interleave: need equal [C,T] shapes, got " +
                                Array::shape_str(av.shape()) + " vs " +
                                Array::shape_str(bv.shape()));
  std::size_t C = av.shape()[0], Th = av.shape()[1], T = 2 * Th;
  Array out = Array::zeros({C, T});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < Th; ++t) {
      out[c * T + 2 * t] = av[c * Th + t];
      out[c * T + 2 * t + 1] = bv[c * Th + t];
    }
  int pa = a.id, pb = b.id;
  return tape.record(std::move(out), {pa, pb},
                     [pa, pb, C, T, Th](Tape& t, int self) {
                       const Array& g = t.grad(self);
                       if (t.requires_grad(pa)) {
                         Array& ga = t.grad(pa);
                         for (std::size_t c = 0; c < C; ++c)
                           for (std::size_t tt = 0; tt < Th; ++tt)
                             ga[c * Th + tt] += g[c * T + 2 * tt];
                       }
                       if (t.requires_grad(pb)) {
                         Array& gb = t.grad(pb);
                         for (std::size_t c = 0; c < C; ++c)
                           for (std::size_t tt = 0; tt < Th; ++tt)
                             gb[c * Th + tt] += g[c * T + 2 * tt + 1];
                       }
                     });
}

Value broadcast_cols(Value a, std::size_t t_out) {
  Tape& tape = *a.tape;
  const Array& av = a.val();
  if (av.ndim() != 2 || av.shape()[1] != 1)
    throw std::invalid_argument("broadcast_cols: expects [C,1], got " +
                                Array::shape_str(av.shape()));
  std::size_t C = av.shape()[0];
  Array out = Array::zeros({C, t_out});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < t_out; ++t) out[c * t_out + t] = av[c];
  int pa = a.id;
  return tape.record(std::move(out), {pa}, [pa, C, t_out](Tape& t, int self) {
    const Array& g = t.grad(self);
    Array& ga = t.grad(pa);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t tt = 0; tt < t_out; ++tt) ga[c] += g[c * t_out + tt];
  });
}

Value constant(Tape& tape, Array v) { return tape.leaf(std::move(v), false); }
Value constant(Tape& tape, double v) { return tape.leaf(Array::scalar(v)); }

Value add_const(Value a, double c) {
  return unary_op(
      a, [c](double x) { return x + c; },
      [](double, double, double g) { return g; });
}

Value mul_const(Value a, double c) {
  return unary_op(
      a, [c](double x) { return x * c; },
      [c](double, double, double g) { return g * c; });
}

Array finite_diff_gradient(const std::function<double(const Array&)>& f,
                           const Array& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_gradient: h <= 0");
  Array g = Array::zeros(x.shape());
  Array xp = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    double orig = xp[i];
    xp[i] = orig + h;
    double fp = f(xp);
    xp[i] = orig - h;
    double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace hba
