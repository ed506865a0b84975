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

// Confusion log probability (CLP): how much probability an ensemble
// classifier trained on the joint inlier+outlier label set assigns to inlier
// classes when shown a test set. Also the pairwise class confusion matrix,
// its symmetric distance transform and average-linkage (UPGMA) clustering.

#ifndef COOD_CLP_HPP_
#define COOD_CLP_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cood/linalg.hpp"

namespace cood {

// rows = test samples, cols = joint class set; row i is c(x_i).
struct PredictionMatrix {
  Matrix probs;
  std::size_t ensemble_size = 1;
  std::optional<std::vector<std::size_t>> labels;

  std::size_t num_classes() const { return probs.cols(); }
  void Validate() const;
};

// Entrywise mean of member probability matrices; each member row must sum
// to 1 within 1e-6.
PredictionMatrix EnsembleAverage(const std::vector<Matrix>& members);

// log of the mean inlier-class mass over all rows. -inf when that mass is 0.
double Clp(const PredictionMatrix& preds, const std::set<std::size_t>& inlier_classes);

// Clp over each group of rows sharing a true label, for labels outside
// `inlier_classes`.
std::map<std::size_t, double> ClasswiseClp(const PredictionMatrix& preds,
                                           const std::set<std::size_t>& inlier_classes);

// u(i, j) = mean of c_i(x) over the test samples of class j. Columns sum to 1.
Matrix PairwiseConfusion(const PredictionMatrix& preds);

struct DistanceMatrix {
  Matrix d;
  double cap = 0.0;  // value substituted for infinite entries
  std::vector<std::pair<std::size_t, std::size_t>> capped;
};

// d(i, j) = sqrt(-log((u(i,j) + u(j,i)) / 2)). The diagonal is 0 when
// u(i,i) >= 1 - 1e-9. Infinite entries become 2x the largest finite entry.
DistanceMatrix ConfusionDistance(const Matrix& u);

struct MergeNode {
  std::size_t id = 0;  // leaves are 0..n-1, merge m creates node n+m
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct MergeTree {
  std::size_t num_leaves = 0;
  std::vector<MergeNode> merges;
};

// UPGMA. Among equally close cluster pairs the one with the lexicographically
// smallest (smaller min-leaf, larger min-leaf) wins; the cluster holding the
// smaller min-leaf becomes the left child.
MergeTree AverageLinkage(const Matrix& d);

std::string SerializeMergeTree(const MergeTree& tree);

std::string PredictionsToCsv(const PredictionMatrix& preds);
PredictionMatrix PredictionsFromCsv(const std::string& text);

}  // namespace cood

#endif  // COOD_CLP_HPP_
