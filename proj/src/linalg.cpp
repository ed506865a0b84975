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

#include "cood/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cood/error.hpp"

namespace cood {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  Require(data_.size() == rows_ * cols_, ErrorCode::kShapeMismatch,
          "matrix data length " + std::to_string(data_.size()) + " != " +
              std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::FromRows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Require(rows[r].size() == cols, ErrorCode::kShapeMismatch,
            "ragged rows in Matrix::FromRows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), ErrorCode::kShapeMismatch, "dot of unequal lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

double FrobeniusNorm(const Matrix& m) { return Norm(m.data()); }

Matrix MatMul(const Matrix& a, const Matrix& b) {
  Require(a.cols() == b.rows(), ErrorCode::kShapeMismatch, "matmul inner dims");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix Cholesky(const Matrix& s) {
  Require(s.rows() == s.cols(), ErrorCode::kShapeMismatch, "cholesky of non-square matrix");
  const std::size_t n = s.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = s(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) {
      Fail(ErrorCode::kNotPositiveDefinite,
           "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    const double diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = s(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / diag;
    }
  }
  return l;
}

double LogDetPsd(const Matrix& chol) {
  Require(chol.rows() == chol.cols(), ErrorCode::kShapeMismatch, "factor not square");
  double acc = 0.0;
  for (std::size_t i = 0; i < chol.rows(); ++i) {
    const double d = chol(i, i);
    Require(d > 0.0, ErrorCode::kDomainError, "non-positive diagonal in factor");
    acc += std::log(d);
  }
  return 2.0 * acc;
}

Vector SolveLower(const Matrix& chol, std::span<const double> b) {
  const std::size_t n = chol.rows();
  Require(chol.cols() == n && b.size() == n, ErrorCode::kShapeMismatch,
          "solve dims do not match factor");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= chol(i, k) * y[k];
    Require(chol(i, i) != 0.0, ErrorCode::kDomainError, "zero diagonal in factor");
    y[i] = acc / chol(i, i);
  }
  return y;
}

Vector SolvePsd(const Matrix& chol, std::span<const double> b) {
  const std::size_t n = chol.rows();
  const Vector y = SolveLower(chol, b);
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= chol(k, ii) * x[k];
    x[ii] = acc / chol(ii, ii);
  }
  return x;
}

std::pair<Vector, Matrix> MeanAndCovariance(std::span<const Vector> samples) {
  Require(samples.size() >= 2, ErrorCode::kTooFewSamples,
          "need at least 2 samples, got " + std::to_string(samples.size()));
  const std::size_t dim = samples.front().size();
  Vector mean(dim, 0.0);
  for (const auto& s : samples) {
    Require(s.size() == dim, ErrorCode::kShapeMismatch, "samples differ in dimension");
    for (std::size_t i = 0; i < dim; ++i) mean[i] += s[i];
  }
  const double count = static_cast<double>(samples.size());
  for (double& m : mean) m /= count;

  Matrix cov(dim, dim);
  Vector centered(dim);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < dim; ++i) centered[i] = s[i] - mean[i];
    for (std::size_t i = 0; i < dim; ++i) {
      const double ci = centered[i];
      for (std::size_t j = 0; j < dim; ++j) cov(i, j) += ci * centered[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      const double v = 0.5 * (cov(i, j) + cov(j, i)) / count;
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return {std::move(mean), std::move(cov)};
}

double CosineSimilarity(std::span<const double> u, std::span<const double> w) {
  Require(u.size() == w.size(), ErrorCode::kShapeMismatch, "cosine similarity of unequal lengths");
  // Rescale each side by a power of two so tiny or huge inputs neither
  // underflow nor overflow; the rescaling itself is exact.
  auto scaled = [](std::span<const double> v) {
    double peak = 0.0;
    for (double e : v) peak = std::max(peak, std::abs(e));
    Require(peak > 0.0, ErrorCode::kDomainError, "cosine similarity of zero vector");
    int exponent = 0;
    std::frexp(peak, &exponent);
    Vector out(v.begin(), v.end());
    for (double& e : out) e = std::ldexp(e, -exponent);
    return out;
  };
  const Vector a = scaled(u);
  const Vector b = scaled(w);
  return std::clamp(Dot(a, b) / std::sqrt(Dot(a, a) * Dot(b, b)), -1.0, 1.0);
}

double LogSumExp(std::span<const double> values) {
  Require(!values.empty(), ErrorCode::kEmptyList, "log_sum_exp of empty list");
  if (values.size() == 1) return values[0];
  const double peak = *std::max_element(values.begin(), values.end());
  if (std::isinf(peak)) return peak;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

}  // namespace cood
