#pragma once

#include <string>
#include <vector>

#include "hba/arrayops.hpp"
#include "hba/net.hpp"

namespace hba {

// Elementwise monotonic map a + b*l + c / (1 + (d*l + g)^2) with a
// closed-form cubic inverse. Parameters are realized from unconstrained
// values so the map is strictly increasing.
namespace nlsq {

struct Params {
  double a, b, c, d, g;
};

// |c| < (8*sqrt(3)/9) * b/d guarantees monotonicity; we stay at 95%.
double monotone_margin();

Params realize(double a, double bhat, double chat, double dhat, double g);
double forward(double l, const Params& p);
double deriv(double l, const Params& p);
// Cardano root of the implied cubic plus one Newton polish; throws if
// the residual exceeds 1e-9 (would indicate a root-selection bug).
double inverse(double lp, const Params& p);

}  // namespace nlsq

enum class TransformKind { Affine, Nlsq };

TransformKind transform_kind_from_string(const std::string& s);
std::string to_string(TransformKind k);

// Elementwise affine l' = l*exp(s) + t.
struct TransformResult {
  Value out, logdet;
};
TransformResult affine_forward(Value l, Value s, Value t);
Array affine_inverse(const Array& lp, const Array& s, const Array& t);

// NLSq on the tape; raw is the conditioner output with 5 rows per
// data channel (a, bhat, chat, dhat, g).
TransformResult nlsq_forward(Value l, Value raw);
Array nlsq_inverse_plain(const Array& lp, const Array& raw);

// Realized affine parameters from 2 raw rows per channel: the log-scale
// is squashed to (-2, 2) so early training cannot blow the scale up.
std::pair<Value, Value> affine_params(Value raw);

struct CouplingStackConfig {
  int data_channels = 2;      // d of the trajectory
  int context_channels = 0;   // rows of the conditioning input
  int steps = 8;              // must be even so both halves get transformed
  TransformKind kind = TransformKind::Nlsq;
  ConvNetConfig net;          // in/out channels filled in by the stack
};

// A sequence of conditional split-coupling steps with alternating parity.
class CouplingStack {
 public:
  CouplingStack() = default;
  CouplingStack(std::string prefix, CouplingStackConfig cfg);

  void init_params(ParamStore& store, std::mt19937_64& rng) const;

  struct ForwardOut {
    Value z, logdet;
  };
  // f: [d,T], context: [context_channels,T]. T must be even.
  ForwardOut forward(const BoundParams& p, Value f, Value context) const;

  // Exact inverse on plain arrays (no gradients).
  Array inverse(const ParamStore& store, const Array& z,
                const Array& context) const;

  const CouplingStackConfig& config() const { return cfg_; }

 private:
  int params_per_channel() const {
    return cfg_.kind == TransformKind::Affine ? 2 : 5;
  }
  std::string prefix_;
  CouplingStackConfig cfg_;
  std::vector<GatedConvNet> conditioners_;
};

}  // namespace hba
