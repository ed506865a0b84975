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

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the code under test except for plain data
// types and forward passes needed to evaluate a loss.

#ifndef COOD_TESTS_ORACLES_HPP_
#define COOD_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "cood/linalg.hpp"
#include "cood/metrics.hpp"
#include "cood/network.hpp"
#include "cood/objectives.hpp"

namespace cood::oracle {

inline Matrix RandomMatrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0,
                           double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// Random symmetric positive definite A A^T + I.
inline Matrix RandomSpd(std::size_t n, std::mt19937_64& rng) {
  const Matrix a = RandomMatrix(n, n, rng);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = i == j ? 1.0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += a(i, k) * a(j, k);
      s(i, j) = acc;
    }
  return s;
}

// Laplace expansion along the first row.
inline double CofactorDeterminant(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Matrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, jj = 0; j < n; ++j)
        if (j != c) minor(i - 1, jj++) = m(i, j);
    det += (c % 2 == 0 ? 1.0 : -1.0) * m(0, c) * CofactorDeterminant(minor);
  }
  return det;
}

// Gauss-Jordan with partial pivoting.
inline Matrix ExplicitInverse(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::Identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(col, j), a(piv, j));
      std::swap(inv(col, j), inv(piv, j));
    }
    const double p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// log N(z; mu, sigma) via an explicit inverse and determinant, both from
// Gauss-Jordan elimination carried out in long double so the oracle's own
// rounding stays well below the tolerances it is compared at.
inline double GaussianLogPdf(const Vector& z, const Vector& mu, const Matrix& sigma) {
  using Real = long double;
  const std::size_t n = z.size();
  std::vector<Real> a(n * n), inv(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = sigma(i, j);
    inv[i * n + i] = 1.0L;
  }
  Real det = 1.0L;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[col * n + j], a[piv * n + j]);
        std::swap(inv[col * n + j], inv[piv * n + j]);
      }
      det = -det;
    }
    const Real p = a[col * n + col];
    det *= p;
    for (std::size_t j = 0; j < n; ++j) {
      a[col * n + j] /= p;
      inv[col * n + j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const Real f = a[r * n + col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  Real q = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q += (static_cast<Real>(z[i]) - mu[i]) * inv[i * n + j] * (static_cast<Real>(z[j]) - mu[j]);
  const Real two_pi = 2.0L * std::numbers::pi_v<long double>;
  return static_cast<double>(-0.5L * (q + static_cast<Real>(n) * std::log(two_pi) + std::log(det)));
}

// ---- metrics, by exhaustive enumeration ----

inline double BruteAuroc(const ScoreSet& s) {
  double wins = 0.0;
  for (double a : s.inlier_scores)
    for (double b : s.outlier_scores) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return wins / static_cast<double>(s.inlier_scores.size() * s.outlier_scores.size());
}

inline std::vector<double> DistinctDescending(const ScoreSet& s) {
  std::set<double> all(s.inlier_scores.begin(), s.inlier_scores.end());
  all.insert(s.outlier_scores.begin(), s.outlier_scores.end());
  return {all.rbegin(), all.rend()};
}

inline double CountAtLeast(const std::vector<double>& v, double t) {
  return static_cast<double>(std::count_if(v.begin(), v.end(), [t](double x) { return x >= t; }));
}

// Exact rational average precision, rounded once at the end.
inline double BruteAupr(const ScoreSet& s) {
  const std::int64_t p = static_cast<std::int64_t>(s.inlier_scores.size());
  std::int64_t num = 0, den = 1, prev_tp = 0;
  for (double t : DistinctDescending(s)) {
    const auto tp = static_cast<std::int64_t>(CountAtLeast(s.inlier_scores, t));
    const auto fp = static_cast<std::int64_t>(CountAtLeast(s.outlier_scores, t));
    if (tp > prev_tp) {
      // num/den += (tp - prev_tp) * tp / (tp + fp)
      const std::int64_t n2 = (tp - prev_tp) * tp, d2 = tp + fp;
      num = num * d2 + n2 * den;
      den *= d2;
      const std::int64_t g = std::gcd(num, den);
      num /= g;
      den /= g;
    }
    prev_tp = tp;
  }
  return static_cast<double>(num) / static_cast<double>(den * p);
}

inline double BruteFprAtTpr(const ScoreSet& s, double target) {
  double best_t = -std::numeric_limits<double>::infinity();
  for (double t : s.inlier_scores)
    if (CountAtLeast(s.inlier_scores, t) / static_cast<double>(s.inlier_scores.size()) >= target)
      best_t = std::max(best_t, t);
  return CountAtLeast(s.outlier_scores, best_t) / static_cast<double>(s.outlier_scores.size());
}

// Exact: the best (tpr + tnr) / 2 as an integer numerator over 2pn.
inline double BruteDetectionAccuracy(const ScoreSet& s) {
  std::vector<double> thresholds = DistinctDescending(s);
  thresholds.push_back(std::numeric_limits<double>::infinity());
  const double p = static_cast<double>(s.inlier_scores.size());
  const double n = static_cast<double>(s.outlier_scores.size());
  double best = 0.0;
  for (double t : thresholds) {
    const double tp = CountAtLeast(s.inlier_scores, t);
    const double tn = n - CountAtLeast(s.outlier_scores, t);
    best = std::max(best, tp * n + tn * p);
  }
  return best / (2.0 * p * n);
}

// ---- UPGMA by exhaustive search over current clusters ----

struct OracleMerge {
  std::size_t left, right;
  double height;
};

// Average distances are recomputed from leaf sets at every step.
inline std::vector<OracleMerge> BruteUpgma(const Matrix& d) {
  const std::size_t n = d.rows();
  struct C {
    std::vector<std::size_t> leaves;
    std::size_t id;
  };
  std::vector<C> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({{i}, i});
  std::vector<OracleMerge> out;
  std::size_t next_id = n;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{n, n};
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = 0; j < clusters.size(); ++j) {
        if (i == j) continue;
        double sum = 0.0;
        for (std::size_t a : clusters[i].leaves)
          for (std::size_t b : clusters[j].leaves) sum += d(a, b);
        const double avg = sum / static_cast<double>(clusters[i].leaves.size() *
                                                     clusters[j].leaves.size());
        const std::size_t mi = clusters[i].leaves.front(), mj = clusters[j].leaves.front();
        if (mi > mj) continue;  // visit each unordered pair once, smaller min-leaf first
        const std::pair<std::size_t, std::size_t> key{mi, mj};
        if (avg < best || (avg == best && key < best_key)) {
          best = avg;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    C merged;
    merged.leaves = clusters[bi].leaves;
    merged.leaves.insert(merged.leaves.end(), clusters[bj].leaves.begin(),
                         clusters[bj].leaves.end());
    std::sort(merged.leaves.begin(), merged.leaves.end());
    merged.id = next_id++;
    out.push_back({clusters[bi].id, clusters[bj].id, best});
    const std::size_t hi = std::max(bi, bj), lo = std::min(bi, bj);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(hi));
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(lo));
    clusters.push_back(std::move(merged));
  }
  return out;
}

// Leaf sums with integer values when `integer` is set, so every average is
// exact and heights can be compared bit for bit.
inline Matrix RandomDistance(std::size_t n, std::mt19937_64& rng, bool integer) {
  Matrix d(n, n);
  std::uniform_int_distribution<int> iu(1, 6);
  std::uniform_real_distribution<double> ru(0.1, 5.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = integer ? iu(rng) : ru(rng);
  return d;
}

// ---- finite differences on the training objective ----

inline double TotalLoss(const EncoderParams& params, const Matrix& v0, const Matrix& v1,
                        const std::vector<std::size_t>& labels, const TrainConfig& cfg,
                        Stage stage) {
  const auto r = ComputeObjective(params, v0, v1, labels, cfg, stage);
  return r.diagnostics.contrastive_loss + cfg.lambda * r.diagnostics.class_loss;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor) over every parameter entry.
// Central differences at h = 1e-5 resolve a derivative only to about
// eps * |L| / h ~ 1e-10 * |L|, so entries below the floor are effectively
// held to an absolute error of 1e-4 * floor.
inline GradCheck CheckGradients(const EncoderParams& params, const Matrix& v0, const Matrix& v1,
                                const std::vector<std::size_t>& labels, const TrainConfig& cfg,
                                Stage stage, double h = 1e-5, double floor = 1e-5) {
  const auto analytic = ComputeObjective(params, v0, v1, labels, cfg, stage).grads;
  const auto grads = analytic.Tensors();
  EncoderParams probe = params;
  auto tensors = probe.Tensors();
  GradCheck out;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    for (std::size_t i = 0; i < tensors[t].values.size(); ++i) {
      double& x = tensors[t].values[i];
      const double saved = x;
      x = saved + h;
      const double fp = TotalLoss(probe, v0, v1, labels, cfg, stage);
      x = saved - h;
      const double fm = TotalLoss(probe, v0, v1, labels, cfg, stage);
      x = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = grads[t].values[i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace cood::oracle

#endif  // COOD_TESTS_ORACLES_HPP_
