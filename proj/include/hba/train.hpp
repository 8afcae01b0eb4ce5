#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hba/data.hpp"
#include "hba/model.hpp"

namespace hba::train {

using GradMap = std::map<std::string, Array>;

// AdaMax: infinity-norm variant of Adam.
class AdaMax {
 public:
  AdaMax(double lr = 2e-3, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // u <- max(beta2*u, |g|); m <- beta1*m + (1-beta1)*g;
  // theta <- theta - (lr/(1-beta1^t)) * m/(u+eps).
  void step(ParamStore& params, const GradMap& grads);

  long step_count() const { return t_; }
  void set_step_count(long t) { t_ = t; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::map<std::string, Array> m_, u_;
};

// Scales grads down so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(GradMap& grads, double max_norm);

// Mean NLL over a batch; when grads is non-null also accumulates the
// averaged parameter gradients. Per-example terms may run on separate
// threads; the reduction order is fixed so results are deterministic.
double batch_nll(const HBAFlowModel& model,
                 const std::vector<data::Example>& batch,
                 const std::vector<std::size_t>& indices, GradMap* grads,
                 bool parallel = true);

struct TrainConfig {
  int batch_size = 32;
  int epochs = 20;
  double lr = 2e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  std::string checkpoint_path;  // best-val params, empty = don't save
  bool parallel = true;
  int log_every_epochs = 1;
};

// Thrown when the loss turns non-finite; carries diagnostics.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  std::vector<std::string> log_lines;  // epoch,train_nll,val_nll,alpha,wall_s
  double best_val_nll = 0.0;
  double final_train_nll = 0.0;
  long steps = 0;
};

TrainResult fit(HBAFlowModel& model, const std::vector<data::Example>& examples,
                const TrainConfig& cfg);

}  // namespace hba::train
