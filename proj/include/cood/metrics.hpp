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

// OOD evaluation metrics. Scores are inlier-likeness: higher means more
// in-distribution, and inliers are the positive class throughout. Every
// metric depends on the scores only through comparisons, so any strictly
// increasing transform of all scores leaves the results unchanged.

#ifndef COOD_METRICS_HPP_
#define COOD_METRICS_HPP_

#include <span>
#include <vector>

namespace cood {

struct ScoreSet {
  std::vector<double> inlier_scores;
  std::vector<double> outlier_scores;
};

// P(random inlier outranks random outlier), ties count one half.
double Auroc(const ScoreSet& s);

// Average precision with inliers as positives: sum over distinct thresholds
// (descending) of precision * recall increment.
double Aupr(const ScoreSet& s);

// Threshold t is the largest inlier score whose TPR (fraction of inliers >= t)
// reaches `tpr_target`; returns the fraction of outliers >= t.
double FprAtTpr(const ScoreSet& s, double tpr_target = 0.95);

// max over thresholds of (TPR + TNR) / 2.
double DetectionAccuracy(const ScoreSet& s);

// 100 * fraction of inlier scores strictly greater than `score`. Higher
// means more OOD-like.
double OodRank(std::span<const double> inlier_scores, double score);

// Mean over samples of the population standard deviation of rank across runs.
double RankDispersion(const std::vector<std::vector<double>>& runs);

struct MetricBlock {
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr_at_95_tpr = 0.0;
  double detection_accuracy = 0.0;
};

MetricBlock ComputeMetrics(const ScoreSet& s);

}  // namespace cood

#endif  // COOD_METRICS_HPP_
