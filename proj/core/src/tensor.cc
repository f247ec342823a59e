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

#include "splitpub/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "splitpub/errors.h"

namespace splitpub {
namespace {

std::string Shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ConfigError("matrix data length " + std::to_string(data_.size()) +
                      " does not match shape " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
}

Matrix Matrix::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ConfigError("ragged rows in Matrix::FromRows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ConfigError("MatMul shape mismatch: " + Shape(a) + " * " + Shape(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix MatMulTransA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ConfigError("MatMulTransA shape mismatch: " + Shape(a) + "^T * " +
                      Shape(b));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto a_row = a.row(k);
    auto b_row = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
    }
  }
  return out;
}

Matrix MatMulTransB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ConfigError("MatMulTransB shape mismatch: " + Shape(a) + " * " +
                      Shape(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto a_row = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto b_row = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a_row[k] * b_row[k];
      out(i, j) = acc;
    }
  }
  return out;
}

void AddRowBroadcast(Matrix& m, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != m.cols()) {
    throw ConfigError("bias shape " + Shape(bias) + " does not broadcast onto " +
                      Shape(m));
  }
  auto b = bias.row(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] += b[j];
  }
}

Matrix ColumnSums(const Matrix& m) {
  Matrix out(1, m.cols());
  auto o = out.row(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) o[j] += r[j];
  }
  return out;
}

Matrix ConcatColumns(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw ConfigError("ConcatColumns row mismatch: " + Shape(left) + " | " +
                      Shape(right));
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t i = 0; i < left.rows(); ++i) {
    auto o = out.row(i);
    auto l = left.row(i);
    auto r = right.row(i);
    std::copy(l.begin(), l.end(), o.begin());
    std::copy(r.begin(), r.end(), o.begin() + left.cols());
  }
  return out;
}

Matrix SliceColumns(const Matrix& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.cols()) {
    throw ConfigError("SliceColumns range out of bounds for " + Shape(m));
  }
  Matrix out(m.rows(), end - begin);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    std::copy(r.begin() + begin, r.begin() + end, out.row(i).begin());
  }
  return out;
}

Matrix GatherRows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows()) {
      throw ConfigError("GatherRows index " + std::to_string(indices[i]) +
                        " out of range for " + Shape(m));
    }
    auto r = m.row(indices[i]);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

Matrix GatherColumns(const Matrix& m, std::span<const std::size_t> indices) {
  for (std::size_t c : indices) {
    if (c >= m.cols()) {
      throw ConfigError("GatherColumns index " + std::to_string(c) +
                        " out of range for " + Shape(m));
    }
  }
  Matrix out(m.rows(), indices.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    auto o = out.row(i);
    for (std::size_t j = 0; j < indices.size(); ++j) o[j] = r[indices[j]];
  }
  return out;
}

}  // namespace splitpub
