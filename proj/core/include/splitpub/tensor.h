// Copyright 2026 The splitpub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace splitpub {

// Row-major dense matrix of doubles. The only numeric carrier in the
// library: features, activations, parameters and gradients all use it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Builds a matrix from nested rows; all rows must have equal length.
  static Matrix FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool AllFinite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a (n x k) * b (k x m).
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T * b where a is (k x n), b is (k x m).
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
// a * b^T where a is (n x k), b is (m x k).
Matrix MatMulTransB(const Matrix& a, const Matrix& b);

// Adds a 1 x cols bias row to every row of m.
void AddRowBroadcast(Matrix& m, const Matrix& bias);
// Column sums as a 1 x cols matrix.
Matrix ColumnSums(const Matrix& m);

// [left | right]; row counts must match.
Matrix ConcatColumns(const Matrix& left, const Matrix& right);
// Columns [begin, end) of m.
Matrix SliceColumns(const Matrix& m, std::size_t begin, std::size_t end);
// Rows of m selected by index, in the given order.
Matrix GatherRows(const Matrix& m, std::span<const std::size_t> indices);
// Columns of m selected by index, in the given order.
Matrix GatherColumns(const Matrix& m, std::span<const std::size_t> indices);

}  // namespace splitpub
