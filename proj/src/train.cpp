#include "hba/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hba/checkpoint.hpp"

namespace hba::train {

void AdaMax::step(ParamStore& params, const GradMap& grads) {
  ++t_;
  double bias = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  for (auto& [name, theta] : params.all()) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Array& g = git->second;
    if (!g.same_shape(theta))
      throw std::invalid_argument("AdaMax: gradient shape mismatch for " +
                                  name);
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (!std::isfinite(g[i]))
        throw NumericError("AdaMax: non-finite gradient in parameter " + name);
    Array& m = m_.try_emplace(name, Array::zeros(theta.shape())).first->second;
    Array& u = u_.try_emplace(name, Array::zeros(theta.shape())).first->second;
    for (std::size_t i = 0; i < theta.numel(); ++i) {
      u[i] = std::max(beta2_ * u[i], std::abs(g[i]));
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      theta[i] -= (lr_ / bias) * m[i] / (u[i] + eps_);
    }
  }
}

double clip_global_norm(GradMap& grads, double max_norm) {
  double sq = 0.0;
  for (auto& [k, g] : grads)
    for (std::size_t i = 0; i < g.numel(); ++i) sq += g[i] * g[i];
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (auto& [k, g] : grads)
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= s;
  }
  return norm;
}

double batch_nll(const HBAFlowModel& model,
                 const std::vector<data::Example>& batch,
                 const std::vector<std::size_t>& indices, GradMap* grads,
                 bool parallel) {
  if (indices.empty()) throw std::invalid_argument("batch_nll: empty batch");
  const std::size_t n = indices.size();
  std::vector<double> losses(n, 0.0);
  std::vector<GradMap> per_example(grads ? n : 0);
  std::vector<std::string> errors(n);

#pragma omp parallel for if (parallel) schedule(dynamic)
  for (long j = 0; j < static_cast<long>(n); ++j) {
    try {
      const data::Example& ex = batch[indices[j]];
      Tape tape;
      BoundParams p = bind_params(tape, model.params(), grads != nullptr);
      Value ll = model.log_likelihood(tape, p, ex.y, ex.x);
      losses[j] = -ll.item();
      if (grads) {
        tape.backward(ll);
        GradMap& gm = per_example[j];
        for (auto& [name, v] : p) gm.emplace(name, tape.grad(v.id));
      }
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  double inv = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (double l : losses) total += l;
  if (grads) {
    // Reduce in index order: NLL = -mean(logL), so negate and average.
    for (std::size_t j = 0; j < n; ++j)
      for (auto& [name, g] : per_example[j]) {
        auto [it, fresh] = grads->try_emplace(name, Array::zeros(g.shape()));
        Array& acc = it->second;
        for (std::size_t i = 0; i < g.numel(); ++i) acc[i] -= inv * g[i];
      }
  }
  return total * inv;
}

TrainResult fit(HBAFlowModel& model,
                const std::vector<data::Example>& examples,
                const TrainConfig& cfg) {
  if (examples.empty()) throw std::invalid_argument("fit: empty dataset");
  std::mt19937_64 rng(cfg.seed);

  // Deterministic train/val split.
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = std::min(
      examples.size() - 1,
      static_cast<std::size_t>(std::ceil(cfg.val_fraction *
                                         static_cast<double>(order.size()))));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
  if (train_idx.empty()) throw std::invalid_argument("fit: no training data");
  if (val_idx.empty()) val_idx = train_idx;  // tiny datasets

  AdaMax opt(cfg.lr);
  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::map<std::string, Array> best_params;
  auto t0 = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t off = 0; off < train_idx.size();
         off += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(
          train_idx.size(), off + static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::size_t> batch(train_idx.begin() + off,
                                     train_idx.begin() + end);
      GradMap grads;
      double loss = batch_nll(model, examples, batch, &grads, cfg.parallel);
      if (!std::isfinite(loss)) {
        std::ostringstream diag;
        double maxp = 0.0;
        for (auto& [k, v] : model.params().all())
          for (std::size_t i = 0; i < v.numel(); ++i)
            maxp = std::max(maxp, std::abs(v[i]));
        diag << "fit: non-finite loss at epoch " << epoch << " batch "
             << batches << "; alpha=" << model.realized_alphas()[0]
             << " max|param|=" << maxp;
        throw NumericError(diag.str());
      }
      clip_global_norm(grads, cfg.clip_norm);
      opt.step(model.params(), grads);
      epoch_loss += loss;
      ++batches;
      ++result.steps;
    }
    epoch_loss /= static_cast<double>(batches);
    result.final_train_nll = epoch_loss;

    double val_nll = batch_nll(model, examples, val_idx, nullptr, cfg.parallel);
    if (val_nll < best_val) {
      best_val = val_nll;
      best_params = model.params().all();
    }
    auto now = std::chrono::steady_clock::now();
    double wall =
        std::chrono::duration<double>(now - t0).count();
    std::ostringstream line;
    line << epoch << "," << epoch_loss << "," << val_nll << ","
         << model.realized_alphas()[0] << "," << wall;
    result.log_lines.push_back(line.str());
  }

  if (!best_params.empty()) model.params().all() = best_params;
  result.best_val_nll = best_val;
  if (!cfg.checkpoint_path.empty()) {
    auto kv = model.config().to_kv();
    kv["train.steps"] = std::to_string(result.steps);
    kv["train.seed"] = std::to_string(cfg.seed);
    checkpoint::save_model_params(cfg.checkpoint_path, kv, model.params());
  }
  return result;
}

}  // namespace hba::train
