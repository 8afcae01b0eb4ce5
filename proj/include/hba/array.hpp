#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hba {

// Dense row-major array of 64-bit floats. Value type, no views.
class Array {
 public:
  Array() = default;

  Array(std::vector<std::size_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    if (numel_of(shape_) != data_.size())
      throw std::invalid_argument("Array: shape/value count mismatch: " +
                                  shape_str(shape_) + " vs " +
                                  std::to_string(data_.size()) + " values");
  }

  static Array zeros(std::vector<std::size_t> shape) {
    std::size_t n = numel_of(shape);
    return Array(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Array full(std::vector<std::size_t> shape, double v) {
    std::size_t n = numel_of(shape);
    return Array(std::move(shape), std::vector<double>(n, v));
  }

  static Array scalar(double v) { return Array({}, {v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool is_scalar() const { return data_.size() == 1; }
  double item() const {
    if (data_.size() != 1)
      throw std::logic_error("Array::item: not a scalar, shape " +
                             shape_str(shape_));
    return data_[0];
  }

  // 2-D accessors for the common [channels, time] layout.
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const {
    return shape_.size() == 2 ? shape_[1] : numel();
  }
  double& at2(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at2(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  bool same_shape(const Array& o) const { return shape_ == o.shape_; }

  static std::size_t numel_of(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
  }

  static std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Broadcast rule: trailing dimensions equal or 1.
inline bool broadcast_shapes(const std::vector<std::size_t>& a,
                             const std::vector<std::size_t>& b,
                             std::vector<std::size_t>& out) {
  std::size_t n = std::max(a.size(), b.size());
  out.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) return false;
    out[n - 1 - i] = std::max(da, db);
  }
  return true;
}

}  // namespace hba
