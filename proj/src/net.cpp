#include "hba/net.hpp"

#include <cmath>

namespace hba {

namespace {

Array normal_init(std::vector<std::size_t> shape, double stddev,
                  std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Array a = Array::zeros(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] = dist(rng);
  return a;
}

}  // namespace

void GatedConvNet::init_params(ParamStore& store, std::mt19937_64& rng) const {
  int in_ch = cfg_.in_channels;
  std::size_t k = static_cast<std::size_t>(cfg_.kernel);
  for (int l = 0; l < cfg_.layers; ++l) {
    std::size_t cout = static_cast<std::size_t>(2 * cfg_.hidden_channels);
    std::size_t cin = static_cast<std::size_t>(in_ch);
    double stddev = 1.0 / std::sqrt(static_cast<double>(cin * k));
    store.create(prefix_ + ".l" + std::to_string(l) + ".w",
                 normal_init({cout, cin, k}, stddev, rng));
    store.create(prefix_ + ".l" + std::to_string(l) + ".b",
                 Array::zeros({cout, 1}));
    in_ch = cfg_.hidden_channels;
  }
  std::size_t oc = static_cast<std::size_t>(cfg_.out_channels);
  std::size_t hc = static_cast<std::size_t>(cfg_.hidden_channels);
  store.create(prefix_ + ".out.w", Array::zeros({oc, hc, 1}));
  store.create(prefix_ + ".out.b", Array::zeros({oc, 1}));
}

Value GatedConvNet::forward(const BoundParams& p, Value in) const {
  Value h = in;
  std::size_t hidden = static_cast<std::size_t>(cfg_.hidden_channels);
  for (int l = 0; l < cfg_.layers; ++l) {
    std::string base = prefix_ + ".l" + std::to_string(l);
    Value pre = conv1d(h, bound(p, base + ".w"), bound(p, base + ".b"),
                       dilation_at(l));
    Value filt = slice_rows(pre, 0, hidden);
    Value gate = slice_rows(pre, hidden, 2 * hidden);
    h = mul(tanh(filt), sigmoid(gate));
  }
  return conv1d(h, bound(p, prefix_ + ".out.w"), bound(p, prefix_ + ".out.b"),
                1);
}

Array GatedConvNet::eval(const ParamStore& store, const Array& in) const {
  Tape tape;
  BoundParams p = bind_params(tape, store, /*requires_grad=*/false);
  Value out = forward(p, tape.leaf(in));
  return out.val();
}

}  // namespace hba
