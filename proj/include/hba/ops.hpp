#pragma once

#include <functional>

#include "hba/tape.hpp"

namespace hba {

// Elementwise with trailing-dim broadcasting.
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value div(Value a, Value b);

// Unary elementwise.
Value neg(Value a);
Value exp(Value a);
Value log(Value a);
Value tanh(Value a);
Value sigmoid(Value a);
Value square(Value a);

// Reductions.
Value sum(Value a);                // -> scalar
Value mean(Value a);               // -> scalar
Value sum_time(Value a);           // [C,T] -> [C,1]
Value mean_time(Value a);          // [C,T] -> [C,1]

// Linear algebra / structure.
Value affine(Value w, Value x, Value b);         // [m,n]·[n] + [m] -> [m]
Value conv1d(Value in, Value w, Value b, int dilation);  // see kernels.hpp
Value concat_rows(Value a, Value b);             // [C1,T] ++ [C2,T]
Value slice_rows(Value a, std::size_t r0, std::size_t r1);
Value slice_stride2(Value a, int offset);        // columns offset, offset+2, ...
Value interleave(Value a, Value b);              // cols a0,b0,a1,b1,...
Value broadcast_cols(Value a, std::size_t t);    // [C,1] -> [C,T]

// Scalar convenience.
Value constant(Tape& tape, Array v);
Value constant(Tape& tape, double v);
Value add_const(Value a, double c);
Value mul_const(Value a, double c);

// Central finite differences of a scalar-valued function; test oracle.
Array finite_diff_gradient(const std::function<double(const Array&)>& f,
                           const Array& x, double h = 1e-5);

}  // namespace hba
