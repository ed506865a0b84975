// Copyright 2026 The cood Authors
// SPDX-License-Identifier: Apache-2.0
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

// Dense kernels used by density fitting, scoring and the losses. Everything
// here is double precision, row-major and free of shared state.

#ifndef COOD_LINALG_HPP_
#define COOD_LINALG_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cood {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix Identity(std::size_t n);
  // Builds from nested rows; all rows must share a length.
  static Matrix FromRows(const std::vector<Vector>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  Matrix Transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);
double FrobeniusNorm(const Matrix& m);
Matrix MatMul(const Matrix& a, const Matrix& b);

// Lower-triangular L with L * L^T = s. Throws NotPositiveDefinite on a
// non-positive pivot; the caller is expected to regularize and retry.
Matrix Cholesky(const Matrix& s);

// log det(L L^T) = 2 * sum(log L_ii).
double LogDetPsd(const Matrix& chol);

// Solves L y = b by forward substitution.
Vector SolveLower(const Matrix& chol, std::span<const double> b);

// Solves (L L^T) x = b by forward then back substitution.
Vector SolvePsd(const Matrix& chol, std::span<const double> b);

// Sample mean and maximum-likelihood (1/N) covariance, symmetrized.
std::pair<Vector, Matrix> MeanAndCovariance(std::span<const Vector> samples);

// Cosine similarity clamped to [-1, 1]; throws DomainError on a zero vector.
double CosineSimilarity(std::span<const double> u, std::span<const double> w);

// Overflow-safe log(sum(exp(v))).
double LogSumExp(std::span<const double> values);

}  // namespace cood

#endif  // COOD_LINALG_HPP_
