// msam/matrix.hpp

// Copyright 2026  The msam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MSAM_MATRIX_HPP_
#define MSAM_MATRIX_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msam/error.hpp"

namespace msam {

/// Dense row-major matrix. Deliberately minimal: the networks here only
/// need matrix-vector products and rank-1 updates.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T value = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T &operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Matrix &) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// out = W x + b (b may be empty).
template <typename T>
void affine(const Matrix<T> &w, std::span<const T> b, std::span<const T> x,
            std::span<T> out) {
  if (x.size() != w.cols() || out.size() != w.rows() ||
      (!b.empty() && b.size() != w.rows()))
    throw ShapeError("affine: " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + " applied to length " +
                     std::to_string(x.size()));
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto wr = w.row(r);
    T acc = b.empty() ? T(0) : b[r];
    for (std::size_t c = 0; c < wr.size(); ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

/// grad_w += g x^T, grad_in += W^T g (grad_in may be empty).
template <typename T>
void affine_backward(const Matrix<T> &w, std::span<const T> x,
                     std::span<const T> g, Matrix<T> &grad_w,
                     std::span<T> grad_in) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const T gr = g[r];
    if (gr == T(0)) continue;
    auto gw = grad_w.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) gw[c] += gr * x[c];
    if (!grad_in.empty()) {
      auto wr = w.row(r);
      for (std::size_t c = 0; c < wr.size(); ++c) grad_in[c] += gr * wr[c];
    }
  }
}

template <typename T>
void relu_inplace(std::span<T> v) {
  for (auto &x : v) x = x > T(0) ? x : T(0);
}

}  // namespace msam

#endif  // MSAM_MATRIX_HPP_
