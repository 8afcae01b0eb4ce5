#include "hba/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hba {

namespace nlsq {

double monotone_margin() { return 0.95 * 8.0 * std::sqrt(3.0) / 9.0; }

Params realize(double a, double bhat, double chat, double dhat, double g) {
  Params p;
  p.a = a;
  p.b = std::exp(bhat);
  p.d = std::exp(dhat);
  p.c = monotone_margin() * (p.b / p.d) * std::tanh(chat);
  p.g = g;
  return p;
}

double forward(double l, const Params& p) {
  double u = p.d * l + p.g;
  return p.a + p.b * l + p.c / (1.0 + u * u);
}

double deriv(double l, const Params& p) {
  double u = p.d * l + p.g;
  double denom = 1.0 + u * u;
  return p.b - 2.0 * p.c * p.d * u / (denom * denom);
}

double inverse(double lp, const Params& p) {
  double root;
  if (std::abs(p.c) < 1e-300) {
    root = (lp - p.a) / p.b;
  } else {
    // (a - lp + b*l)(1 + (d*l + g)^2) + c = 0, cubic in l.
    const double am = p.a - lp;
    const double A = p.b * p.d * p.d;
    const double B = 2.0 * p.b * p.d * p.g + am * p.d * p.d;
    const double C = p.b * (1.0 + p.g * p.g) + 2.0 * p.d * p.g * am;
    const double D = am * (1.0 + p.g * p.g) + p.c;
    const double shift = B / (3.0 * A);
    const double pp = (3.0 * A * C - B * B) / (3.0 * A * A);
    const double qq =
        (2.0 * B * B * B - 9.0 * A * B * C + 27.0 * A * A * D) /
        (27.0 * A * A * A);
    const double disc = qq * qq / 4.0 + pp * pp * pp / 27.0;
    if (disc >= 0.0) {
      double s = std::sqrt(disc);
      root = std::cbrt(-qq / 2.0 + s) + std::cbrt(-qq / 2.0 - s) - shift;
    } else {
      // Three real roots; monotonicity says only one satisfies the
      // original equation, so keep the one with the smallest residual.
      double r = 2.0 * std::sqrt(-pp / 3.0);
      double phi = std::acos(std::clamp(
          3.0 * qq / (pp * r), -1.0, 1.0));
      root = 0.0;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < 3; ++j) {
        double t = r * std::cos((phi - 2.0 * M_PI * j) / 3.0) - shift;
        double res = std::abs(forward(t, p) - lp);
        if (res < best) {
          best = res;
          root = t;
        }
      }
    }
  }
  // Newton polish.
  for (int it = 0; it < 2; ++it) {
    double den = deriv(root, p);
    root -= (forward(root, p) - lp) / den;
  }
  double residual = std::abs(forward(root, p) - lp);
  if (!(residual <= 1e-9))
    throw std::runtime_error("nlsq inverse: residual " +
                             std::to_string(residual) +
                             " exceeds 1e-9 (root selection failure)");
  return root;
}

}  // namespace nlsq

TransformKind transform_kind_from_string(const std::string& s) {
  if (s == "affine") return TransformKind::Affine;
  if (s == "nlsq") return TransformKind::Nlsq;
  throw std::invalid_argument("unknown transform kind: " + s);
}

std::string to_string(TransformKind k) {
  return k == TransformKind::Affine ? "affine" : "nlsq";
}

std::pair<Value, Value> affine_params(Value raw) {
  std::size_t d = raw.val().shape().at(0) / 2;
  Value s = mul_const(tanh(slice_rows(raw, 0, d)), 2.0);
  Value t = slice_rows(raw, d, 2 * d);
  return {s, t};
}

TransformResult affine_forward(Value l, Value s, Value t) {
  Value out = add(mul(l, exp(s)), t);
  return {out, sum(s)};
}

Array affine_inverse(const Array& lp, const Array& s, const Array& t) {
  if (!lp.same_shape(s) || !lp.same_shape(t))
    throw std::invalid_argument("affine_inverse: shape mismatch");
  Array l = Array::zeros(lp.shape());
  for (std::size_t i = 0; i < lp.numel(); ++i)
    l[i] = (lp[i] - t[i]) * std::exp(-s[i]);
  return l;
}

TransformResult nlsq_forward(Value l, Value raw) {
  std::size_t d = l.val().shape().at(0);
  if (raw.val().shape().at(0) != 5 * d)
    throw std::invalid_argument("nlsq_forward: conditioner must emit 5 rows "
                                "per channel");
  Value a = slice_rows(raw, 0, d);
  Value bhat = slice_rows(raw, d, 2 * d);
  Value chat = slice_rows(raw, 2 * d, 3 * d);
  Value dhat = slice_rows(raw, 3 * d, 4 * d);
  Value g = slice_rows(raw, 4 * d, 5 * d);

  Value b = exp(bhat);
  Value dd = exp(dhat);
  Value c = mul_const(mul(div(b, dd), tanh(chat)), nlsq::monotone_margin());
  Value u = add(mul(dd, l), g);
  Value denom = add_const(square(u), 1.0);
  Value out = add(add(a, mul(b, l)), div(c, denom));
  Value dydl =
      sub(b, div(mul_const(mul(mul(c, dd), u), 2.0), square(denom)));
  return {out, sum(log(dydl))};
}

Array nlsq_inverse_plain(const Array& lp, const Array& raw) {
  std::size_t d = lp.shape().at(0), T = lp.shape().at(1);
  Array l = Array::zeros(lp.shape());
  for (std::size_t ch = 0; ch < d; ++ch)
    for (std::size_t t = 0; t < T; ++t) {
      nlsq::Params p = nlsq::realize(raw.at2(ch, t), raw.at2(d + ch, t),
                                     raw.at2(2 * d + ch, t),
                                     raw.at2(3 * d + ch, t),
                                     raw.at2(4 * d + ch, t));
      l.at2(ch, t) = nlsq::inverse(lp.at2(ch, t), p);
    }
  return l;
}

CouplingStack::CouplingStack(std::string prefix, CouplingStackConfig cfg)
    : prefix_(std::move(prefix)), cfg_(cfg) {
  if (cfg_.steps % 2 != 0)
    throw std::invalid_argument("CouplingStack: step count must be even");
  ConvNetConfig net = cfg_.net;
  net.in_channels = cfg_.data_channels + cfg_.context_channels;
  net.out_channels = params_per_channel() * cfg_.data_channels;
  for (int i = 0; i < cfg_.steps; ++i)
    conditioners_.emplace_back(prefix_ + ".step" + std::to_string(i), net);
}

void CouplingStack::init_params(ParamStore& store,
                                std::mt19937_64& rng) const {
  for (auto& c : conditioners_) c.init_params(store, rng);
}

CouplingStack::ForwardOut CouplingStack::forward(const BoundParams& p, Value f,
                                                 Value context) const {
  // Copy the shape: creating tape nodes below can reallocate the storage
  // a reference from f.val() would point into.
  const std::vector<std::size_t> fshape = f.val().shape();
  if (fshape.at(0) != static_cast<std::size_t>(cfg_.data_channels))
    throw std::invalid_argument("CouplingStack: expected " +
                                std::to_string(cfg_.data_channels) +
                                " data channels, got " +
                                Array::shape_str(fshape));
  if (context.val().shape().at(1) != fshape.at(1))
    throw std::invalid_argument("CouplingStack: context length mismatch");
  Tape& tape = *f.tape;
  Value h = f;
  Value logdet = constant(tape, 0.0);
  if (fshape.at(1) % 2 != 0) {
    // Odd block length (the K-th scale of short trajectories): no even-odd
    // split is possible, so transform the whole block with parameters
    // driven by the context alone. Still an exact bijection.
    Value zeros = constant(tape, Array::zeros(fshape));
    for (int i = 0; i < cfg_.steps; ++i) {
      Value raw = conditioners_[i].forward(p, concat_rows(zeros, context));
      TransformResult tr;
      if (cfg_.kind == TransformKind::Affine) {
        auto [s, t] = affine_params(raw);
        tr = affine_forward(h, s, t);
      } else {
        tr = nlsq_forward(h, raw);
      }
      logdet = add(logdet, tr.logdet);
      h = tr.out;
    }
    return {h, logdet};
  }
  for (int i = 0; i < cfg_.steps; ++i) {
    int parity = i % 2;
    Value l = slice_stride2(h, 0);
    Value r = slice_stride2(h, 1);
    Value target = parity == 0 ? l : r;
    Value untouched = parity == 0 ? r : l;
    Value ctx_half = slice_stride2(context, parity == 0 ? 1 : 0);
    Value raw = conditioners_[i].forward(p, concat_rows(untouched, ctx_half));
    TransformResult tr;
    if (cfg_.kind == TransformKind::Affine) {
      auto [s, t] = affine_params(raw);
      tr = affine_forward(target, s, t);
    } else {
      tr = nlsq_forward(target, raw);
    }
    logdet = add(logdet, tr.logdet);
    h = parity == 0 ? interleave(tr.out, untouched)
                    : interleave(untouched, tr.out);
  }
  return {h, logdet};
}

Array CouplingStack::inverse(const ParamStore& store, const Array& z,
                             const Array& context) const {
  Array h = z;
  if (h.shape().at(1) % 2 != 0) {
    Array zeros = Array::zeros(h.shape());
    for (int i = cfg_.steps - 1; i >= 0; --i) {
      Array raw = conditioners_[i].eval(store, arr::concat_rows(zeros, context));
      if (cfg_.kind == TransformKind::Affine) {
        std::size_t d = static_cast<std::size_t>(cfg_.data_channels);
        Array s = arr::slice_rows(raw, 0, d);
        for (std::size_t j = 0; j < s.numel(); ++j)
          s[j] = 2.0 * std::tanh(s[j]);
        Array t = arr::slice_rows(raw, d, 2 * d);
        h = affine_inverse(h, s, t);
      } else {
        h = nlsq_inverse_plain(h, raw);
      }
    }
    return h;
  }
  for (int i = cfg_.steps - 1; i >= 0; --i) {
    int parity = i % 2;
    auto [l, r] = arr::temporal_split(h);
    const Array& target = parity == 0 ? l : r;
    const Array& untouched = parity == 0 ? r : l;
    Array ctx_half = arr::slice_stride2(context, parity == 0 ? 1 : 0);
    Array raw =
        conditioners_[i].eval(store, arr::concat_rows(untouched, ctx_half));
    Array inv;
    if (cfg_.kind == TransformKind::Affine) {
      std::size_t d = static_cast<std::size_t>(cfg_.data_channels);
      Array s = arr::slice_rows(raw, 0, d);
      for (std::size_t j = 0; j < s.numel(); ++j)
        s[j] = 2.0 * std::tanh(s[j]);
      Array t = arr::slice_rows(raw, d, 2 * d);
      inv = affine_inverse(target, s, t);
    } else {
      inv = nlsq_inverse_plain(target, raw);
    }
    h = parity == 0 ? arr::interleave(inv, untouched)
                    : arr::interleave(untouched, inv);
  }
  return h;
}

}  // namespace hba
