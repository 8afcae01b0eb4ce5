#pragma once

#include <stdexcept>
#include <utility>

#include "hba/array.hpp"

// Plain (non-taped) counterparts of the structural ops, used on the
// sampling/inversion path and as an independent route in tests.
namespace hba::arr {

inline std::pair<Array, Array> temporal_split(const Array& h) {
  if (h.ndim() != 2 || h.shape()[1] % 2 != 0)
    throw std::invalid_argument("temporal_split: need [C,T] with even T, got " +
                                Array::shape_str(h.shape()));
  std::size_t C = h.shape()[0], T = h.shape()[1], Th = T / 2;
  Array l = Array::zeros({C, Th});
  Array r = Array::zeros({C, Th});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < Th; ++t) {
      l.at2(c, t) = h.at2(c, 2 * t);
      r.at2(c, t) = h.at2(c, 2 * t + 1);
    }
  return {std::move(l), std::move(r)};
}

inline Array interleave(const Array& a, const Array& b) {
  if (!a.same_shape(b) || a.ndim() != 2)
    throw std::invalid_argument("interleave: need equal [C,T] shapes");
  std::size_t C = a.shape()[0], Th = a.shape()[1];
  Array out = Array::zeros({C, 2 * Th});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < Th; ++t) {
      out.at2(c, 2 * t) = a.at2(c, t);
      out.at2(c, 2 * t + 1) = b.at2(c, t);
    }
  return out;
}

inline Array slice_stride2(const Array& a, int offset) {
  auto [l, r] = temporal_split(a);
  return offset == 0 ? l : r;
}

inline Array concat_rows(const Array& a, const Array& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.shape()[1] != b.shape()[1])
    throw std::invalid_argument("concat_rows: shape mismatch " +
                                Array::shape_str(a.shape()) + " vs " +
                                Array::shape_str(b.shape()));
  Array out = Array::zeros({a.shape()[0] + b.shape()[0], a.shape()[1]});
  std::copy(a.data(), a.data() + a.numel(), out.data());
  std::copy(b.data(), b.data() + b.numel(), out.data() + a.numel());
  return out;
}

inline Array slice_rows(const Array& a, std::size_t r0, std::size_t r1) {
  if (a.ndim() != 2 || r1 > a.shape()[0] || r0 >= r1)
    throw std::invalid_argument("slice_rows: bad range");
  std::size_t T = a.shape()[1];
  Array out = Array::zeros({r1 - r0, T});
  std::copy(a.data() + r0 * T, a.data() + r1 * T, out.data());
  return out;
}

inline Array broadcast_cols(const Array& a, std::size_t t_out) {
  if (a.ndim() != 2 || a.shape()[1] != 1)
    throw std::invalid_argument("broadcast_cols: expects [C,1]");
  std::size_t C = a.shape()[0];
  Array out = Array::zeros({C, t_out});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < t_out; ++t) out.at2(c, t) = a[c];
  return out;
}

}  // namespace hba::arr
