#ifndef TATN_TENSOR_HPP
#define TATN_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tatn/common.hpp"

namespace tatn {

// Dense row-major rank-2 tensor. Everything in the toolkit is a matrix:
// vectors are 1 x n rows (or n x 1 columns), scalars are 1 x 1.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0)
      throw DimensionError("tensor dims must be positive, got " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    data_.assign(static_cast<std::size_t>(rows) * cols, T(0));
  }
  Tensor(int rows, int cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows <= 0 || cols <= 0 ||
        data_.size() != static_cast<std::size_t>(rows) * cols)
      throw DimensionError("tensor data does not match shape " +
                           std::to_string(rows) + "x" + std::to_string(cols));
  }

  static Tensor scalar(T v) { return Tensor(1, 1, {v}); }
  static Tensor row(std::vector<T> v) {
    int n = static_cast<int>(v.size());
    return Tensor(1, n, std::move(v));
  }
  static Tensor column(std::vector<T> v) {
    int n = static_cast<int>(v.size());
    return Tensor(n, 1, std::move(v));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t size() const {
    return static_cast<std::int64_t>(rows_) * cols_;
  }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  T operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  T* row_ptr(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const T* row_ptr(int i) const {
    return data_.data() + static_cast<std::size_t>(i) * cols_;
  }

  const std::vector<T>& vec() const { return data_; }
  std::vector<T>& vec() { return data_; }

  bool same_shape(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

}  // namespace tatn

#endif
