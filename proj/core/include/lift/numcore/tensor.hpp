#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "lift/errors.hpp"

namespace lift::num {

enum class Dtype { f32, f64 };

template <typename T>
constexpr Dtype dtype_of() {
  return sizeof(T) == 4 ? Dtype::f32 : Dtype::f64;
}

// Dense row-major tensor. Everything the models touch is rank-2 (scalars are
// 1x1, vectors 1xn); shape stays a general dim list to keep serialization and
// invariant checks uniform.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  Tensor(int rows, int cols) : shape_{rows, cols}, data_(check_size(rows, cols), T(0)) {}

  Tensor(int rows, int cols, std::vector<T> data) : shape_{rows, cols}, data_(std::move(data)) {
    if (static_cast<int64_t>(data_.size()) != int64_t(rows) * cols) {
      throw ShapeError("tensor data length does not match shape");
    }
  }

  static Tensor scalar(T v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }

  static Tensor from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    int r = static_cast<int>(rows.size());
    int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    Tensor t(r, c);
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != c) throw ShapeError("ragged rows");
      for (T v : row) t.data_[i++] = v;
    }
    return t;
  }

  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const { return shape_.size() < 2 ? 0 : shape_[1]; }
  const std::vector<int>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  constexpr Dtype dtype() const { return dtype_of<T>(); }

  T& at(int r, int c) { return data_[static_cast<size_t>(r) * cols() + c]; }
  T at(int r, int c) const { return data_[static_cast<size_t>(r) * cols() + c]; }
  T item() const {
    if (size() != 1) throw ShapeError("item() on non-scalar tensor");
    return data_[0];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  void add_inplace(const Tensor& o) {
    if (!same_shape(o)) throw ShapeError("add_inplace shape mismatch");
    for (int64_t i = 0; i < size(); ++i) data_[i] += o.data_[i];
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(rows(), cols());
    for (int64_t i = 0; i < size(); ++i) out.vec()[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  static int64_t check_size(int rows, int cols) {
    if (rows < 0 || cols < 0) throw ShapeError("negative tensor dim");
    return static_cast<int64_t>(rows) * cols;
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

// Serial row-major matmul, ikj order so the inner loop streams both b and c.
template <typename T>
void matmul_into(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c, bool accumulate) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) throw ShapeError("matmul inner dims differ");
  if (c.rows() != m || c.cols() != n) throw ShapeError("matmul output shape");
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  if (!accumulate) std::fill(pc, pc + static_cast<int64_t>(m) * n, T(0));
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const T aik = pa[static_cast<int64_t>(i) * k + kk];
      if (aik == T(0)) continue;
      const T* brow = pb + static_cast<int64_t>(kk) * n;
      T* crow = pc + static_cast<int64_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

}  // namespace lift::num
