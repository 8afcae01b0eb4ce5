#include "hba/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace hba::kernels {

namespace {
std::atomic<bool> g_parallel{true};

void check_conv_shapes(const Array& in, const Array& w, const Array& b) {
  if (in.ndim() != 2)
    throw std::invalid_argument("conv1d: input must be [C,T], got " +
                                Array::shape_str(in.shape()));
  if (w.ndim() != 3)
    throw std::invalid_argument("conv1d: weight must be [Cout,Cin,k], got " +
                                Array::shape_str(w.shape()));
  if (w.shape()[1] != in.shape()[0])
    throw std::invalid_argument("conv1d: channel mismatch, input " +
                                Array::shape_str(in.shape()) + " weight " +
                                Array::shape_str(w.shape()));
  if (w.shape()[2] % 2 == 0)
    throw std::invalid_argument("conv1d: kernel size must be odd");
  if (b.numel() != 0 && b.numel() != w.shape()[0])
    throw std::invalid_argument("conv1d: bias size mismatch");
}

template <bool Parallel>
Array conv1d_impl(const Array& in, const Array& w, const Array& b,
                  int dilation) {
  check_conv_shapes(in, w, b);
  const std::size_t cin = in.shape()[0], T = in.shape()[1];
  const std::size_t cout = w.shape()[0], k = w.shape()[2];
  const int half = static_cast<int>(k - 1) / 2;
  Array out = Array::zeros({cout, T});
  const double* ip = in.data();
  const double* wp = w.data();
  const double* bp = b.numel() ? b.data() : nullptr;
  double* op = out.data();
#pragma omp parallel for if (Parallel) schedule(static)
  for (long co = 0; co < static_cast<long>(cout); ++co) {
    for (std::size_t t = 0; t < T; ++t) {
      double acc = bp ? bp[co] : 0.0;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* wrow = wp + (co * cin + ci) * k;
        for (std::size_t j = 0; j < k; ++j) {
          long pos = static_cast<long>(t) +
                     dilation * (static_cast<long>(j) - half);
          if (pos < 0 || pos >= static_cast<long>(T)) continue;
          acc += wrow[j] * ip[ci * T + pos];
        }
      }
      op[co * T + t] = acc;
    }
  }
  return out;
}

template <bool Parallel>
void conv1d_backward_impl(const Array& in, const Array& w, const Array& gout,
                          int dilation, Array& gin, Array& gw, Array& gb) {
  const std::size_t cin = in.shape()[0], T = in.shape()[1];
  const std::size_t cout = w.shape()[0], k = w.shape()[2];
  const int half = static_cast<int>(k - 1) / 2;
  gin = Array::zeros({cin, T});
  gw = Array::zeros({cout, cin, k});
  gb = Array::zeros({cout, 1});
  const double* ip = in.data();
  const double* wp = w.data();
  const double* gp = gout.data();

  // Weight and bias grads: independent across output channels.
#pragma omp parallel for if (Parallel) schedule(static)
  for (long co = 0; co < static_cast<long>(cout); ++co) {
    for (std::size_t t = 0; t < T; ++t) {
      const double g = gp[co * T + t];
      gb[co] += g;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        double* gwrow = gw.data() + (co * cin + ci) * k;
        for (std::size_t j = 0; j < k; ++j) {
          long pos = static_cast<long>(t) +
                     dilation * (static_cast<long>(j) - half);
          if (pos < 0 || pos >= static_cast<long>(T)) continue;
          gwrow[j] += g * ip[ci * T + pos];
        }
      }
    }
  }
  // Input grads: independent across input channels.
#pragma omp parallel for if (Parallel) schedule(static)
  for (long ci = 0; ci < static_cast<long>(cin); ++ci) {
    for (std::size_t co = 0; co < cout; ++co) {
      const double* wrow = wp + (co * cin + ci) * k;
      for (std::size_t t = 0; t < T; ++t) {
        const double g = gp[co * T + t];
        for (std::size_t j = 0; j < k; ++j) {
          long pos = static_cast<long>(t) +
                     dilation * (static_cast<long>(j) - half);
          if (pos < 0 || pos >= static_cast<long>(T)) continue;
          gin[ci * T + pos] += g * wrow[j];
        }
      }
    }
  }
}

}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel_enabled() { return g_parallel.load(); }

Array conv1d_serial(const Array& in, const Array& w, const Array& b,
                    int dilation) {
  return conv1d_impl<false>(in, w, b, dilation);
}
Array conv1d_omp(const Array& in, const Array& w, const Array& b,
                 int dilation) {
  return conv1d_impl<true>(in, w, b, dilation);
}
Array conv1d(const Array& in, const Array& w, const Array& b, int dilation) {
  return g_parallel.load() ? conv1d_omp(in, w, b, dilation)
                           : conv1d_serial(in, w, b, dilation);
}

void conv1d_backward_serial(const Array& in, const Array& w, const Array& gout,
                            int dilation, Array& gin, Array& gw, Array& gb) {
  conv1d_backward_impl<false>(in, w, gout, dilation, gin, gw, gb);
}
void conv1d_backward_omp(const Array& in, const Array& w, const Array& gout,
                         int dilation, Array& gin, Array& gw, Array& gb) {
  conv1d_backward_impl<true>(in, w, gout, dilation, gin, gw, gb);
}
void conv1d_backward(const Array& in, const Array& w, const Array& gout,
                     int dilation, Array& gin, Array& gw, Array& gb) {
  if (g_parallel.load())
    conv1d_backward_omp(in, w, gout, dilation, gin, gw, gb);
  else
    conv1d_backward_serial(in, w, gout, dilation, gin, gw, gb);
}

}  // namespace hba::kernels
