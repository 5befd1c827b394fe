// Copyright 2026 The nbprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NBPRUNE_MATRIX_HPP_
#define NBPRUNE_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nbprune/errors.hpp"

namespace nbprune {

// Dense row-major float32 matrix. Used for embeddings and probability rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw ArgumentError("matrix value count does not match rows*cols");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<float> row(std::size_t i) {
    return {values_.data() + i * cols_, cols_};
  }
  float operator()(std::size_t i, std::size_t j) const {
    return values_[i * cols_ + j];
  }
  float& operator()(std::size_t i, std::size_t j) {
    return values_[i * cols_ + j];
  }

  std::span<const float> values() const { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

}  // namespace nbprune

#endif  // NBPRUNE_MATRIX_HPP_
