#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "hba/ops.hpp"

namespace hba::haar {

// Learnable mixing weight, sigmoid-parameterized so the realized value
// stays in [0, 1-epsilon] and log(1-alpha) stays finite.
struct MixParam {
  double unconstrained = 0.0;
  double epsilon = 1e-3;

  double realized() const {
    return (1.0 - epsilon) / (1.0 + std::exp(-unconstrained));
  }
  // Unconstrained value whose realized alpha equals the target.
  static double unconstrained_for(double alpha, double epsilon = 1e-3);
};

// Realized alpha as a tape value from the unconstrained parameter.
Value realize_alpha(Value unconstrained, double epsilon = 1e-3);

// ---- Differentiable (tape) path, used by the likelihood ----

std::pair<Value, Value> split_even_odd(Value y);           // -> (e, o)
std::pair<Value, Value> haar_mix(Value e, Value o, Value alpha);  // -> (f, c)

struct FhbaResult {
  Value fine, coarse, logdet;
};
FhbaResult f_hba_forward(Value y, Value alpha);

struct PyramidV {
  std::vector<Value> fines;   // f_1 .. f_K
  Value coarsest;             // c_K
  std::vector<Value> coarses;  // c_1 .. c_K (conditioning inputs)
  std::vector<Value> logdets;
  Value total_logdet;
};
// alphas: one shared value or one per scale.
PyramidV decompose(Value y, int K, const std::vector<Value>& alphas);

// ---- Plain-array path, used by sampling, inspection and as the
// independent route in tests ----

std::pair<Array, Array> split_even_odd(const Array& y);
std::pair<Array, Array> haar_mix(const Array& e, const Array& o, double alpha);

struct FhbaArrays {
  Array fine, coarse;
  double logdet;
};
FhbaArrays f_hba_forward(const Array& y, double alpha);
Array f_hba_inverse(const Array& f, const Array& c, double alpha);

struct Pyramid {
  std::vector<Array> fines;
  Array coarsest;
  std::vector<double> logdets;
  std::vector<double> alphas;
  double total_logdet = 0.0;
};
Pyramid decompose(const Array& y, int K, const std::vector<double>& alphas);
Array reconstruct(const Pyramid& p);

// K is valid iff K >= 1, 2^K divides T and K <= log2(T).
void check_scale_count(std::size_t T, int K);
double alpha_for_scale(const std::vector<double>& alphas, int k);

}  // namespace hba::haar
