#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hba/coupling.hpp"
#include "hba/haar.hpp"

namespace hba {

struct ModelConfig {
  int K = 2;
  int d = 2;
  int T_obs = 8;
  int T_fut = 16;
  int steps_per_stack = 8;
  int channels = 32;   // conditioner hidden width (256 at full scale)
  int layers = 4;
  int kernel = 3;
  std::vector<int> dilations = {1, 2, 4, 8};
  int enc_channels = 16;
  std::string transform = "nlsq";
  bool hba_prior = true;      // false: fixed N(0,I) prior ablation
  bool per_scale_alpha = false;
  double alpha_init = 0.5;
  double alpha_epsilon = 1e-3;
  std::uint64_t init_seed = 1;

  std::map<std::string, std::string> to_kv() const;
  static ModelConfig from_kv(const std::map<std::string, std::string>& kv);
};

// Latents of one trajectory: z_1..z_{K-1}, z^f_K (fine chain) and z^c_K.
struct LatentStack {
  std::vector<Array> fine;  // per-scale latents, sizes T/2^k x d
  Array coarse;             // z^c_K
};

// The coarse-to-fine block-autoregressive flow over future trajectories,
// conditioned on the observed past.
class HBAFlowModel {
 public:
  explicit HBAFlowModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Differentiable log p(y|x); y: [d,T] with T divisible by 2^K,
  // x: [d,T_obs]. All parameters, including alpha, receive gradients.
  Value log_likelihood(Tape& tape, const BoundParams& p, const Array& y,
                       const Array& x) const;

  // No-gradient convenience wrapper.
  double log_likelihood(const Array& y, const Array& x) const;

  // Same value computed by independently re-decomposing each coarse
  // trajectory (the other factorization ordering); test route.
  double log_likelihood_rescan(const Array& y, const Array& x) const;

  // Coarse-to-fine ancestral sampling. Deterministic given the seed.
  // stage_counter, when given, receives the number of sequential scale
  // stages (always K+1, independent of n).
  std::vector<Array> sample(const Array& x, int n, int T_future,
                            std::uint64_t seed, double temperature = 1.0,
                            int* stage_counter = nullptr) const;

  // Latents and prior terms exposed for tests/diagnostics.
  Value prior_logprob(Tape& tape, const BoundParams& p,
                      const std::vector<Value>& fine_latents,
                      Value coarse_latent,
                      const std::vector<Value>& coarses, Value enc) const;

  std::vector<double> realized_alphas() const;

  // Past-trajectory encoding as a plain array ([enc_channels,1]).
  Array encode_past(const Array& x) const;
  Value encode_past(const BoundParams& p, Value x) const;

 private:
  Value alpha_value(Tape& tape, const BoundParams& p, int scale) const;
  std::vector<Value> alpha_values(Tape& tape, const BoundParams& p) const;
  std::pair<Value, Value> prior_moments(const BoundParams& p,
                                        const GatedConvNet& net,
                                        Value input) const;
  std::pair<Array, Array> prior_moments_plain(const GatedConvNet& net,
                                              const Array& input) const;

  ModelConfig cfg_;
  ParamStore params_;
  GatedConvNet encoder_;
  std::vector<CouplingStack> fine_stacks_;  // index k-1 handles f_k
  CouplingStack coarse_stack_;
  std::vector<GatedConvNet> prior_fine_;    // p(z_k | c_k, x)
  GatedConvNet prior_coarse_;               // p(z^c_K | x)
};

// Gaussian log-density with diagonal covariance, summed over elements.
Value gaussian_logprob(Value z, Value mean, Value logstd);
double gaussian_logprob_plain(const Array& z, const Array& mean,
                              const Array& logstd);

// Smooth squash keeping log-std in (-7, 2) with f(0) = 0.
Value squash_logstd(Value raw);
double squash_logstd_plain(double raw);

}  // namespace hba
