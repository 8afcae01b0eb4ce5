#pragma once

#include "hba/array.hpp"

namespace hba::kernels {

// Global switch between the OpenMP kernels and the serial reference.
// Serial is the ground truth in tests; both must agree bit-for-bit
// aside from floating-point reduction order (conv avoids reductions
// across threads, so outputs are identical).
void set_parallel(bool on);
bool parallel_enabled();

// Dilated 1-D convolution, symmetric zero padding, length-preserving.
// in: [Cin,T], w: [Cout,Cin,k] (k odd), b: [Cout,1] or empty.
Array conv1d_serial(const Array& in, const Array& w, const Array& b,
                    int dilation);
Array conv1d_omp(const Array& in, const Array& w, const Array& b,
                 int dilation);
Array conv1d(const Array& in, const Array& w, const Array& b, int dilation);

// Gradients of conv1d w.r.t. input, weight, bias given upstream grad gout.
void conv1d_backward_serial(const Array& in, const Array& w, const Array& gout,
                            int dilation, Array& gin, Array& gw, Array& gb);
void conv1d_backward_omp(const Array& in, const Array& w, const Array& gout,
                         int dilation, Array& gin, Array& gw, Array& gb);
void conv1d_backward(const Array& in, const Array& w, const Array& gout,
                     int dilation, Array& gin, Array& gw, Array& gb);

}  // namespace hba::kernels
