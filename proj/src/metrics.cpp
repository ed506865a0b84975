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

#include "cood/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cood/error.hpp"

namespace cood {
namespace {

// Distinct score levels in descending order with the inlier/outlier count at
// each level.
struct Level {
  double score;
  double inliers;
  double outliers;
};

std::vector<Level> DescendingLevels(const ScoreSet& s) {
  Require(!s.inlier_scores.empty() && !s.outlier_scores.empty(), ErrorCode::kEmptySide,
          "both inlier and outlier scores are required");
  std::vector<std::pair<double, bool>> all;
  all.reserve(s.inlier_scores.size() + s.outlier_scores.size());
  for (double v : s.inlier_scores) all.emplace_back(v, true);
  for (double v : s.outlier_scores) all.emplace_back(v, false);
  for (const auto& [v, _] : all)
    Require(std::isfinite(v), ErrorCode::kDomainError, "non-finite score");
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Level> levels;
  for (const auto& [v, inlier] : all) {
    if (levels.empty() || levels.back().score != v) levels.push_back({v, 0.0, 0.0});
    (inlier ? levels.back().inliers : levels.back().outliers) += 1.0;
  }
  return levels;
}

}  // namespace

double Auroc(const ScoreSet& s) {
  const auto levels = DescendingLevels(s);
  const double p = static_cast<double>(s.inlier_scores.size());
  const double n = static_cast<double>(s.outlier_scores.size());
  double outliers_below = n;
  double wins = 0.0;
  for (const auto& l : levels) {
    outliers_below -= l.outliers;
    wins += l.inliers * outliers_below + 0.5 * l.inliers * l.outliers;
  }
  return wins / (p * n);
}

double Aupr(const ScoreSet& s) {
  const auto levels = DescendingLevels(s);
  const double p = static_cast<double>(s.inlier_scores.size());
  // Extended-precision accumulation with a single final rounding, so the
  // result is the correctly rounded average precision in practice.
  double tp = 0.0, fp = 0.0;
  long double area = 0.0L;
  for (const auto& l : levels) {
    tp += l.inliers;
    fp += l.outliers;
    if (l.inliers > 0.0)
      area += static_cast<long double>(l.inliers * tp) / static_cast<long double>(tp + fp);
  }
  return static_cast<double>(area / static_cast<long double>(p));
}

double FprAtTpr(const ScoreSet& s, double tpr_target) {
  Require(tpr_target > 0.0 && tpr_target <= 1.0, ErrorCode::kDomainError,
          "tpr target must lie in (0, 1]");
  const auto levels = DescendingLevels(s);
  const double p = static_cast<double>(s.inlier_scores.size());
  const double n = static_cast<double>(s.outlier_scores.size());
  double tp = 0.0, fp = 0.0;
  for (const auto& l : levels) {
    tp += l.inliers;
    fp += l.outliers;
    if (tp / p >= tpr_target) return fp / n;
  }
  return fp / n;  // unreachable: tp / p reaches 1 at the last level
}

double DetectionAccuracy(const ScoreSet& s) {
  const auto levels = DescendingLevels(s);
  const double p = static_cast<double>(s.inlier_scores.size());
  const double n = static_cast<double>(s.outlier_scores.size());
  // Maximize the integer numerator of (tp/p + tn/n) / 2 over 2pn, then divide once.
  double tp = 0.0, fp = 0.0;
  double best = p * n;  // threshold above every score
  for (const auto& l : levels) {
    tp += l.inliers;
    fp += l.outliers;
    best = std::max(best, tp * n + (n - fp) * p);
  }
  return best / (2.0 * p * n);
}

double OodRank(std::span<const double> inlier_scores, double score) {
  Require(!inlier_scores.empty(), ErrorCode::kEmptyList, "ood rank needs inlier scores");
  std::size_t greater = 0;
  for (double v : inlier_scores)
    if (v > score) ++greater;
  return 100.0 * static_cast<double>(greater) / static_cast<double>(inlier_scores.size());
}

double RankDispersion(const std::vector<std::vector<double>>& runs) {
  Require(runs.size() >= 2, ErrorCode::kMisalignedRuns, "rank dispersion needs >= 2 runs");
  const std::size_t samples = runs.front().size();
  Require(samples > 0, ErrorCode::kMisalignedRuns, "runs hold no samples");
  for (const auto& r : runs)
    Require(r.size() == samples, ErrorCode::kMisalignedRuns,
            "runs differ in length (" + std::to_string(r.size()) + " vs " +
                std::to_string(samples) + ")");
  const double k = static_cast<double>(runs.size());
  double total = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r[j];
    mean /= k;
    double var = 0.0;
    for (const auto& r : runs) var += (r[j] - mean) * (r[j] - mean);
    total += std::sqrt(var / k);
  }
  return total / static_cast<double>(samples);
}

MetricBlock ComputeMetrics(const ScoreSet& s) {
  return {Auroc(s), Aupr(s), FprAtTpr(s, 0.95), DetectionAccuracy(s)};
}

}  // namespace cood
