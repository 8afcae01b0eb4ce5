#include "hba/haar.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hba::haar {

namespace {

void check_alpha(double a) {
  if (!(a >= 0.0 && a < 1.0))
    throw std::invalid_argument("haar: alpha must lie in [0,1), got " +
                                std::to_string(a));
}

void check_even(std::size_t T) {
  if (T % 2 != 0)
    throw std::invalid_argument("haar: sequence length " + std::to_string(T) +
                                " is odd, even length required");
}

}  // namespace

double MixParam::unconstrained_for(double alpha, double epsilon) {
  double s = alpha / (1.0 - epsilon);
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("MixParam: target alpha out of range");
  return std::log(s / (1.0 - s));
}

Value realize_alpha(Value unconstrained, double epsilon) {
  return mul_const(sigmoid(unconstrained), 1.0 - epsilon);
}

std::pair<Value, Value> split_even_odd(Value y) {
  check_even(y.val().shape().at(1));
  Value e = slice_stride2(y, 1);
  Value o = slice_stride2(y, 0);
  return {e, o};
}

std::pair<Value, Value> haar_mix(Value e, Value o, Value alpha) {
  check_alpha(alpha.val().item());
  Tape& tape = *e.tape;
  Value one_minus = sub(constant(tape, 1.0), alpha);
  Value c = add(mul(one_minus, e), mul(alpha, o));
  Value f = sub(o, c);
  return {f, c};
}

FhbaResult f_hba_forward(Value y, Value alpha) {
  const std::size_t d = y.val().shape().at(0);
  const std::size_t T = y.val().shape().at(1);
  check_even(T);
  auto [e, o] = split_even_odd(y);
  auto [f, c] = haar_mix(e, o, alpha);
  // Closed form: logdet = (d*T/2) * log(1 - alpha).
  Tape& tape = *y.tape;
  Value logdet = mul_const(log(sub(constant(tape, 1.0), alpha)),
                           static_cast<double>(d * T) / 2.0);
  return {f, c, logdet};
}

PyramidV decompose(Value y, int K, const std::vector<Value>& alphas) {
  const std::size_t T = y.val().shape().at(1);
  check_scale_count(T, K);
  if (alphas.size() != 1 && static_cast<int>(alphas.size()) != K)
    throw std::invalid_argument("decompose: need 1 or K alphas");
  PyramidV p;
  Value cur = y;
  Tape& tape = *y.tape;
  Value total = constant(tape, 0.0);
  for (int k = 0; k < K; ++k) {
    Value a = alphas.size() == 1 ? alphas[0] : alphas[k];
    FhbaResult r = f_hba_forward(cur, a);
    p.fines.push_back(r.fine);
    p.coarses.push_back(r.coarse);
    p.logdets.push_back(r.logdet);
    total = add(total, r.logdet);
    cur = r.coarse;
  }
  p.coarsest = cur;
  p.total_logdet = total;
  return p;
}

std::pair<Array, Array> split_even_odd(const Array& y) {
  const std::size_t d = y.shape().at(0), T = y.shape().at(1);
  check_even(T);
  Array e = Array::zeros({d, T / 2});
  Array o = Array::zeros({d, T / 2});
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t t = 0; t < T / 2; ++t) {
      o.at2(c, t) = y.at2(c, 2 * t);
      e.at2(c, t) = y.at2(c, 2 * t + 1);
    }
  return {e, o};
}

std::pair<Array, Array> haar_mix(const Array& e, const Array& o, double alpha) {
  check_alpha(alpha);
  if (!e.same_shape(o))
    throw std::invalid_argument("haar_mix: even/odd shape mismatch " +
                                Array::shape_str(e.shape()) + " vs " +
                                Array::shape_str(o.shape()));
  Array c = Array::zeros(e.shape());
  Array f = Array::zeros(e.shape());
  for (std::size_t i = 0; i < e.numel(); ++i) {
    c[i] = (1.0 - alpha) * e[i] + alpha * o[i];
    f[i] = o[i] - c[i];
  }
  return {f, c};
}

FhbaArrays f_hba_forward(const Array& y, double alpha) {
  const std::size_t d = y.shape().at(0), T = y.shape().at(1);
  check_even(T);
  auto [e, o] = split_even_odd(y);
  auto [f, c] = haar_mix(e, o, alpha);
  double logdet = static_cast<double>(d * T) / 2.0 * std::log(1.0 - alpha);
  return {std::move(f), std::move(c), logdet};
}

Array f_hba_inverse(const Array& f, const Array& c, double alpha) {
  check_alpha(alpha);
  if (!f.same_shape(c))
    throw std::invalid_argument("f_hba_inverse: fine/coarse shape mismatch " +
                                Array::shape_str(f.shape()) + " vs " +
                                Array::shape_str(c.shape()));
  const std::size_t d = f.shape().at(0), Th = f.shape().at(1);
  Array y = Array::zeros({d, 2 * Th});
  for (std::size_t ch = 0; ch < d; ++ch)
    for (std::size_t t = 0; t < Th; ++t) {
      double o = f.at2(ch, t) + c.at2(ch, t);
      double e = (c.at2(ch, t) - alpha * o) / (1.0 - alpha);
      y.at2(ch, 2 * t) = o;
      y.at2(ch, 2 * t + 1) = e;
    }
  return y;
}

Pyramid decompose(const Array& y, int K, const std::vector<double>& alphas) {
  check_scale_count(y.shape().at(1), K);
  if (alphas.size() != 1 && static_cast<int>(alphas.size()) != K)
    throw std::invalid_argument("decompose: need 1 or K alphas");
  Pyramid p;
  Array cur = y;
  for (int k = 0; k < K; ++k) {
    double a = alpha_for_scale(alphas, k);
    FhbaArrays r = f_hba_forward(cur, a);
    p.fines.push_back(std::move(r.fine));
    p.logdets.push_back(r.logdet);
    p.alphas.push_back(a);
    p.total_logdet += r.logdet;
    cur = std::move(r.coarse);
  }
  p.coarsest = std::move(cur);
  return p;
}

Array reconstruct(const Pyramid& p) {
  if (p.fines.size() != p.alphas.size())
    throw std::invalid_argument("reconstruct: fines/alphas count mismatch");
  Array cur = p.coarsest;
  for (std::size_t k = p.fines.size(); k-- > 0;) {
    if (!p.fines[k].same_shape(cur))
      throw std::invalid_argument(
          "reconstruct: scale " + std::to_string(k + 1) + " shape " +
          Array::shape_str(p.fines[k].shape()) + " inconsistent with coarse " +
          Array::shape_str(cur.shape()));
    cur = f_hba_inverse(p.fines[k], cur, p.alphas[k]);
  }
  return cur;
}

void check_scale_count(std::size_t T, int K) {
  if (K < 1) throw std::invalid_argument("haar: K must be >= 1");
  std::size_t div = std::size_t{1} << K;
  if (div > T || T % div != 0)
    throw std::invalid_argument(
        "haar: length " + std::to_string(T) + " must be divisible by 2^K = " +
        std::to_string(div) + " (K = " + std::to_string(K) + ")");
}

double alpha_for_scale(const std::vector<double>& alphas, int k) {
  return alphas.size() == 1 ? alphas[0] : alphas.at(k);
}

}  // namespace hba::haar
