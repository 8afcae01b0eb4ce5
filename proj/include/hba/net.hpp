#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "hba/ops.hpp"

namespace hba {

// Named parameter arrays. std::map keeps iteration order stable, which
// the optimizer and checkpoint format rely on.
class ParamStore {
 public:
  Array& create(const std::string& name, Array init) {
    auto [it, fresh] = params_.emplace(name, std::move(init));
    if (!fresh)
      throw std::logic_error("ParamStore: duplicate parameter " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return params_.count(name) > 0; }

  Array& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end())
      throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
  }
  const Array& at(const std::string& name) const {
    return const_cast<ParamStore*>(this)->at(name);
  }

  std::map<std::string, Array>& all() { return params_; }
  const std::map<std::string, Array>& all() const { return params_; }
  std::size_t count() const { return params_.size(); }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (auto& [k, v] : params_) n += v.numel();
    return n;
  }

 private:
  std::map<std::string, Array> params_;
};

// Parameters registered as leaves on one tape.
using BoundParams = std::map<std::string, Value>;

inline BoundParams bind_params(Tape& tape, const ParamStore& store,
                               bool requires_grad = true) {
  BoundParams out;
  for (auto& [name, arr] : store.all())
    out.emplace(name, tape.leaf(arr, requires_grad));
  return out;
}

inline Value bound(const BoundParams& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end())
    throw std::out_of_range("bound params: missing " + name);
  return it->second;
}

// Gated dilated-convolution stack: every hidden layer computes
// tanh(conv) * sigmoid(conv) from a shared 2H-channel convolution, the
// head is a kernel-1 convolution initialized to zero so dependent flow
// transforms start at identity.
struct ConvNetConfig {
  int in_channels = 1;
  int hidden_channels = 32;
  int out_channels = 2;
  int layers = 4;
  int kernel = 3;
  std::vector<int> dilations = {1, 2, 4, 8};
};

class GatedConvNet {
 public:
  GatedConvNet() = default;
  GatedConvNet(std::string prefix, ConvNetConfig cfg)
      : prefix_(std::move(prefix)), cfg_(cfg) {}

  void init_params(ParamStore& store, std::mt19937_64& rng) const;

  Value forward(const BoundParams& p, Value in) const;

  // Convenience for non-differentiating callers (sampling, inversion).
  Array eval(const ParamStore& store, const Array& in) const;

  const ConvNetConfig& config() const { return cfg_; }
  const std::string& prefix() const { return prefix_; }

 private:
  int dilation_at(int layer) const {
    return cfg_.dilations[layer % cfg_.dilations.size()];
  }
  std::string prefix_;
  ConvNetConfig cfg_;
};

}  // namespace hba
