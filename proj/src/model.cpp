#include "hba/model.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hba {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::string alpha_name(bool per_scale, int k) {
  return per_scale ? "haar.alpha" + std::to_string(k) : "haar.alpha";
}

}  // namespace

std::map<std::string, std::string> ModelConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["model.K"] = std::to_string(K);
  kv["model.d"] = std::to_string(d);
  kv["model.T_obs"] = std::to_string(T_obs);
  kv["model.T_fut"] = std::to_string(T_fut);
  kv["model.steps_per_stack"] = std::to_string(steps_per_stack);
  kv["model.channels"] = std::to_string(channels);
  kv["model.layers"] = std::to_string(layers);
  kv["model.kernel"] = std::to_string(kernel);
  kv["model.dilations"] = join_ints(dilations);
  kv["model.enc_channels"] = std::to_string(enc_channels);
  kv["model.transform"] = transform;
  kv["model.hba_prior"] = hba_prior ? "1" : "0";
  kv["model.per_scale_alpha"] = per_scale_alpha ? "1" : "0";
  kv["model.alpha_init"] = std::to_string(alpha_init);
  kv["model.alpha_epsilon"] = std::to_string(alpha_epsilon);
  kv["model.init_seed"] = std::to_string(init_seed);
  return kv;
}

ModelConfig ModelConfig::from_kv(
    const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end())
      throw std::invalid_argument("model config: missing key " + k);
    return it->second;
  };
  c.K = std::stoi(get("model.K"));
  c.d = std::stoi(get("model.d"));
  c.T_obs = std::stoi(get("model.T_obs"));
  c.T_fut = std::stoi(get("model.T_fut"));
  c.steps_per_stack = std::stoi(get("model.steps_per_stack"));
  c.channels = std::stoi(get("model.channels"));
  c.layers = std::stoi(get("model.layers"));
  c.kernel = std::stoi(get("model.kernel"));
  c.dilations = split_ints(get("model.dilations"));
  c.enc_channels = std::stoi(get("model.enc_channels"));
  c.transform = get("model.transform");
  c.hba_prior = get("model.hba_prior") == "1";
  c.per_scale_alpha = get("model.per_scale_alpha") == "1";
  c.alpha_init = std::stod(get("model.alpha_init"));
  c.alpha_epsilon = std::stod(get("model.alpha_epsilon"));
  c.init_seed = std::stoull(get("model.init_seed"));
  return c;
}

Value squash_logstd(Value raw) {
  static const double t0 = std::atanh(5.0 / 9.0);
  return add_const(
      mul_const(tanh(add_const(mul_const(raw, 1.0 / 4.5), t0)), 4.5), -2.5);
}

double squash_logstd_plain(double raw) {
  static const double t0 = std::atanh(5.0 / 9.0);
  return -2.5 + 4.5 * std::tanh(raw / 4.5 + t0);
}

Value gaussian_logprob(Value z, Value mean, Value logstd) {
  Value norm = div(sub(z, mean), exp(logstd));
  Value per_elem = add_const(
      neg(add(logstd, mul_const(square(norm), 0.5))), -kHalfLog2Pi);
  return sum(per_elem);
}

double gaussian_logprob_plain(const Array& z, const Array& mean,
                              const Array& logstd) {
  if (!z.same_shape(mean) || !z.same_shape(logstd))
    throw std::invalid_argument("gaussian_logprob: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < z.numel(); ++i) {
    double s = std::exp(logstd[i]);
    double u = (z[i] - mean[i]) / s;
    total += -kHalfLog2Pi - logstd[i] - 0.5 * u * u;
  }
  return total;
}

HBAFlowModel::HBAFlowModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.K < 1) throw std::invalid_argument("model: K must be >= 1");
  haar::check_scale_count(static_cast<std::size_t>(cfg_.T_fut), cfg_.K);

  ConvNetConfig base;
  base.hidden_channels = cfg_.channels;
  base.layers = cfg_.layers;
  base.kernel = cfg_.kernel;
  base.dilations = cfg_.dilations;

  ConvNetConfig enc_cfg = base;
  enc_cfg.in_channels = cfg_.d;
  enc_cfg.out_channels = cfg_.enc_channels;
  encoder_ = GatedConvNet("enc", enc_cfg);

  TransformKind kind = transform_kind_from_string(cfg_.transform);
  for (int k = 1; k <= cfg_.K; ++k) {
    CouplingStackConfig sc;
    sc.data_channels = cfg_.d;
    sc.context_channels = cfg_.d + cfg_.enc_channels;  // (c_k, enc(x))
    sc.steps = cfg_.steps_per_stack;
    sc.kind = kind;
    sc.net = base;
    fine_stacks_.emplace_back("fine" + std::to_string(k), sc);
  }
  {
    CouplingStackConfig sc;
    sc.data_channels = cfg_.d;
    sc.context_channels = cfg_.enc_channels;  // x only
    sc.steps = cfg_.steps_per_stack;
    sc.kind = kind;
    sc.net = base;
    coarse_stack_ = CouplingStack("coarse", sc);
  }
  if (cfg_.hba_prior) {
    for (int k = 1; k <= cfg_.K; ++k) {
      ConvNetConfig pc = base;
      pc.in_channels = cfg_.d + cfg_.enc_channels;
      pc.out_channels = 2 * cfg_.d;
      prior_fine_.emplace_back("prior.f" + std::to_string(k), pc);
    }
    ConvNetConfig pc = base;
    pc.in_channels = cfg_.enc_channels;
    pc.out_channels = 2 * cfg_.d;
    prior_coarse_ = GatedConvNet("prior.c", pc);
  }

  std::mt19937_64 rng(cfg_.init_seed);
  encoder_.init_params(params_, rng);
  for (auto& s : fine_stacks_) s.init_params(params_, rng);
  coarse_stack_.init_params(params_, rng);
  for (auto& n : prior_fine_) n.init_params(params_, rng);
  if (cfg_.hba_prior) prior_coarse_.init_params(params_, rng);

  double raw = haar::MixParam::unconstrained_for(cfg_.alpha_init,
                                                 cfg_.alpha_epsilon);
  if (cfg_.per_scale_alpha) {
    for (int k = 0; k < cfg_.K; ++k)
      params_.create(alpha_name(true, k), Array({1}, {raw}));
  } else {
    params_.create(alpha_name(false, 0), Array({1}, {raw}));
  }
}

Value HBAFlowModel::alpha_value(Tape& tape, const BoundParams& p,
                                int scale) const {
  (void)tape;
  Value raw = bound(p, alpha_name(cfg_.per_scale_alpha, scale));
  return haar::realize_alpha(raw, cfg_.alpha_epsilon);
}

std::vector<Value> HBAFlowModel::alpha_values(Tape& tape,
                                              const BoundParams& p) const {
  std::vector<Value> out;
  int n = cfg_.per_scale_alpha ? cfg_.K : 1;
  for (int k = 0; k < n; ++k) out.push_back(alpha_value(tape, p, k));
  return out;
}

std::vector<double> HBAFlowModel::realized_alphas() const {
  std::vector<double> out;
  int n = cfg_.per_scale_alpha ? cfg_.K : 1;
  for (int k = 0; k < n; ++k) {
    haar::MixParam m{params_.at(alpha_name(cfg_.per_scale_alpha, k))[0],
                     cfg_.alpha_epsilon};
    out.push_back(m.realized());
  }
  return out;
}

Value HBAFlowModel::encode_past(const BoundParams& p, Value x) const {
  if (x.val().numel() == 0)
    throw std::invalid_argument("encode_past: empty observed trajectory");
  return mean_time(encoder_.forward(p, x));
}

Array HBAFlowModel::encode_past(const Array& x) const {
  Tape tape;
  BoundParams p = bind_params(tape, params_, false);
  return encode_past(p, tape.leaf(x)).val();
}

std::pair<Value, Value> HBAFlowModel::prior_moments(const BoundParams& p,
                                                    const GatedConvNet& net,
                                                    Value input) const {
  Value raw = net.forward(p, input);
  std::size_t d = static_cast<std::size_t>(cfg_.d);
  Value mean = slice_rows(raw, 0, d);
  Value logstd = squash_logstd(slice_rows(raw, d, 2 * d));
  return {mean, logstd};
}

std::pair<Array, Array> HBAFlowModel::prior_moments_plain(
    const GatedConvNet& net, const Array& input) const {
  Array raw = net.eval(params_, input);
  std::size_t d = static_cast<std::size_t>(cfg_.d);
  Array mean = arr::slice_rows(raw, 0, d);
  Array logstd = arr::slice_rows(raw, d, 2 * d);
  for (std::size_t i = 0; i < logstd.numel(); ++i)
    logstd[i] = squash_logstd_plain(logstd[i]);
  return {mean, logstd};
}

Value HBAFlowModel::prior_logprob(Tape& tape, const BoundParams& p,
                                  const std::vector<Value>& fine_latents,
                                  Value coarse_latent,
                                  const std::vector<Value>& coarses,
                                  Value enc) const {
  Value total = constant(tape, 0.0);
  if (!cfg_.hba_prior) {
    // Gaussian-prior ablation: fixed N(0, I) on every latent.
    for (const Value& z : fine_latents) {
      Value zero = constant(tape, Array::zeros(z.val().shape()));
      total = add(total, gaussian_logprob(z, zero, zero));
    }
    Value zero = constant(tape, Array::zeros(coarse_latent.val().shape()));
    total = add(total, gaussian_logprob(coarse_latent, zero, zero));
    return total;
  }
  for (std::size_t k = 0; k < fine_latents.size(); ++k) {
    std::size_t Tk = coarses[k].val().shape().at(1);
    Value input = concat_rows(coarses[k], broadcast_cols(enc, Tk));
    auto [mean, logstd] = prior_moments(p, prior_fine_[k], input);
    total = add(total, gaussian_logprob(fine_latents[k], mean, logstd));
  }
  std::size_t TK = coarse_latent.val().shape().at(1);
  auto [mean, logstd] =
      prior_moments(p, prior_coarse_, broadcast_cols(enc, TK));
  total = add(total, gaussian_logprob(coarse_latent, mean, logstd));
  return total;
}

Value HBAFlowModel::log_likelihood(Tape& tape, const BoundParams& p,
                                   const Array& y, const Array& x) const {
  if (y.ndim() != 2 || y.shape()[0] != static_cast<std::size_t>(cfg_.d))
    throw std::invalid_argument("log_likelihood: y must be [d,T], got " +
                                Array::shape_str(y.shape()));
  haar::check_scale_count(y.shape()[1], cfg_.K);

  Value yv = tape.leaf(y);
  Value xv = tape.leaf(x);
  Value enc = encode_past(p, xv);
  std::vector<Value> alphas = alpha_values(tape, p);
  haar::PyramidV pyr = haar::decompose(yv, cfg_.K, alphas);

  Value total = pyr.total_logdet;
  std::vector<Value> fine_latents;
  for (int k = 0; k < cfg_.K; ++k) {
    std::size_t Tk = pyr.coarses[k].val().shape().at(1);
    Value ctx = concat_rows(pyr.coarses[k], broadcast_cols(enc, Tk));
    auto out = fine_stacks_[k].forward(p, pyr.fines[k], ctx);
    total = add(total, out.logdet);
    fine_latents.push_back(out.z);
  }
  std::size_t TK = pyr.coarsest.val().shape().at(1);
  auto cout = coarse_stack_.forward(p, pyr.coarsest, broadcast_cols(enc, TK));
  total = add(total, cout.logdet);
  total = add(total,
              prior_logprob(tape, p, fine_latents, cout.z, pyr.coarses, enc));
  return total;
}

double HBAFlowModel::log_likelihood(const Array& y, const Array& x) const {
  Tape tape;
  BoundParams p = bind_params(tape, params_, false);
  return log_likelihood(tape, p, y, x).item();
}

double HBAFlowModel::log_likelihood_rescan(const Array& y,
                                           const Array& x) const {
  // Re-derives each (f_k, c_k) pair by decomposing from the top every
  // time; algebraically the same factorization, different code path.
  Tape tape;
  BoundParams p = bind_params(tape, params_, false);
  Value yv = tape.leaf(y);
  Value xv = tape.leaf(x);
  Value enc = encode_past(p, xv);
  std::vector<Value> alphas = alpha_values(tape, p);

  Value total = constant(tape, 0.0);
  std::vector<Value> fine_latents;
  std::vector<Value> coarses;
  Value coarsest{};
  for (int k = 1; k <= cfg_.K; ++k) {
    std::vector<Value> ak = alphas;
    if (ak.size() > 1) ak.resize(static_cast<std::size_t>(k));
    haar::PyramidV part = haar::decompose(yv, k, ak);
    total = add(total, part.logdets.back());
    Value fk = part.fines.back();
    Value ck = part.coarses.back();
    coarses.push_back(ck);
    std::size_t Tk = ck.val().shape().at(1);
    Value ctx = concat_rows(ck, broadcast_cols(enc, Tk));
    auto out = fine_stacks_[k - 1].forward(p, fk, ctx);
    total = add(total, out.logdet);
    fine_latents.push_back(out.z);
    if (k == cfg_.K) coarsest = ck;
  }
  std::size_t TK = coarsest.val().shape().at(1);
  auto cout = coarse_stack_.forward(p, coarsest, broadcast_cols(enc, TK));
  total = add(total, cout.logdet);
  total =
      add(total, prior_logprob(tape, p, fine_latents, cout.z, coarses, enc));
  return total.item();
}

std::vector<Array> HBAFlowModel::sample(const Array& x, int n, int T_future,
                                        std::uint64_t seed, double temperature,
                                        int* stage_counter) const {
  haar::check_scale_count(static_cast<std::size_t>(T_future), cfg_.K);
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Array enc = encode_past(x);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t d = static_cast<std::size_t>(cfg_.d);
  int stages = 0;
  std::vector<double> alphas = realized_alphas();

  auto draw = [&](const Array& mean, const Array& logstd) {
    Array z = Array::zeros(mean.shape());
    for (std::size_t i = 0; i < z.numel(); ++i)
      z[i] = mean[i] + std::exp(logstd[i]) * temperature * gauss(rng);
    return z;
  };

  // Stage 1: coarsest latent -> c_K for all samples.
  std::size_t TK = static_cast<std::size_t>(T_future) >> cfg_.K;
  Array ctx_c = arr::broadcast_cols(enc, TK);
  Array mean_c = Array::zeros({d, TK});
  Array logstd_c = Array::zeros({d, TK});
  if (cfg_.hba_prior)
    std::tie(mean_c, logstd_c) = prior_moments_plain(prior_coarse_, ctx_c);
  std::vector<Array> cur(n);
  ++stages;
  for (int i = 0; i < n; ++i)
    cur[i] = coarse_stack_.inverse(params_, draw(mean_c, logstd_c), ctx_c);

  // Stages K..1: fine latent -> f_k, then invert the Haar step.
  for (int k = cfg_.K; k >= 1; --k) {
    ++stages;
    std::size_t Tk = static_cast<std::size_t>(T_future) >> k;
    double alpha = haar::alpha_for_scale(alphas, k - 1);
    for (int i = 0; i < n; ++i) {
      Array ctx = arr::concat_rows(cur[i], arr::broadcast_cols(enc, Tk));
      Array mean = Array::zeros({d, Tk});
      Array logstd = Array::zeros({d, Tk});
      if (cfg_.hba_prior)
        std::tie(mean, logstd) = prior_moments_plain(prior_fine_[k - 1], ctx);
      Array f = fine_stacks_[k - 1].inverse(params_, draw(mean, logstd), ctx);
      cur[i] = haar::f_hba_inverse(f, cur[i], alpha);
    }
  }
  if (stage_counter) *stage_counter = stages;
  return cur;
}

}  // namespace hba
