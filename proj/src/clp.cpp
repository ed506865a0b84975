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

#include "cood/clp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cood/error.hpp"
#include "cood/text.hpp"
#include "json.hpp"

namespace cood {
namespace {

constexpr double kRowSumTolerance = 1e-6;
constexpr char kPredictionsSchema[] = "# schema: cood.predictions.v1";

void CheckStochastic(const Matrix& m, const std::string& what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) {
      Require(v >= 0.0 && v <= 1.0 + kRowSumTolerance, ErrorCode::kNotNormalized,
              what + ": entry outside [0, 1] in row " + std::to_string(r));
      sum += v;
    }
    Require(std::abs(sum - 1.0) <= kRowSumTolerance, ErrorCode::kNotNormalized,
            what + ": row " + std::to_string(r) + " sums to " + std::to_string(sum));
  }
}

nlohmann::ordered_json NodeJson(const MergeTree& tree, std::size_t id) {
  if (id < tree.num_leaves) return {{"leaf", id}};
  const MergeNode& n = tree.merges[id - tree.num_leaves];
  return {{"id", n.id},
          {"height", n.height},
          {"size", n.size},
          {"children", {NodeJson(tree, n.left), NodeJson(tree, n.right)}}};
}

}  // namespace

void PredictionMatrix::Validate() const {
  CheckStochastic(probs, "prediction matrix");
  if (labels) {
    Require(labels->size() == probs.rows(), ErrorCode::kShapeMismatch,
            "labels and prediction rows differ in length");
    for (std::size_t l : *labels)
      Require(l < probs.cols(), ErrorCode::kUnknownClass, "label outside the class set");
  }
}

PredictionMatrix EnsembleAverage(const std::vector<Matrix>& members) {
  Require(!members.empty(), ErrorCode::kEmptySet, "ensemble has no members");
  const Matrix& first = members.front();
  PredictionMatrix out;
  out.probs = Matrix(first.rows(), first.cols());
  out.ensemble_size = members.size();
  for (std::size_t m = 0; m < members.size(); ++m) {
    Require(members[m].rows() == first.rows() && members[m].cols() == first.cols(),
            ErrorCode::kShapeMismatch, "ensemble members differ in shape");
    CheckStochastic(members[m], "ensemble member " + std::to_string(m));
    for (std::size_t i = 0; i < first.size(); ++i) out.probs.data()[i] += members[m].data()[i];
  }
  const double k = static_cast<double>(members.size());
  for (double& v : out.probs.data()) v /= k;
  return out;
}

double Clp(const PredictionMatrix& preds, const std::set<std::size_t>& inlier_classes) {
  Require(preds.probs.rows() > 0, ErrorCode::kEmptySet, "CLP of an empty test set");
  for (std::size_t c : inlier_classes)
    Require(c < preds.num_classes(), ErrorCode::kUnknownClass,
            "inlier class " + std::to_string(c) + " not among prediction columns");
  double mass = 0.0;
  for (std::size_t r = 0; r < preds.probs.rows(); ++r)
    for (std::size_t c : inlier_classes) mass += preds.probs(r, c);
  mass /= static_cast<double>(preds.probs.rows());
  if (mass <= 0.0) return -INFINITY;
  return std::min(0.0, std::log(mass));
}

std::map<std::size_t, double> ClasswiseClp(const PredictionMatrix& preds,
                                           const std::set<std::size_t>& inlier_classes) {
  Require(preds.labels.has_value(), ErrorCode::kMissingLabels,
          "class-wise CLP needs true labels");
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < preds.labels->size(); ++r) {
    const std::size_t l = (*preds.labels)[r];
    if (!inlier_classes.contains(l)) groups[l].push_back(r);
  }
  std::map<std::size_t, double> out;
  for (const auto& [label, rows] : groups) {
    PredictionMatrix sub;
    sub.ensemble_size = preds.ensemble_size;
    sub.probs = Matrix(rows.size(), preds.num_classes());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = preds.probs.row(rows[i]);
      std::copy(src.begin(), src.end(), sub.probs.row(i).begin());
    }
    out[label] = Clp(sub, inlier_classes);
  }
  return out;
}

Matrix PairwiseConfusion(const PredictionMatrix& preds) {
  Require(preds.labels.has_value(), ErrorCode::kMissingLabels,
          "pairwise confusion needs true labels");
  const std::size_t k = preds.num_classes();
  Matrix u(k, k);
  std::vector<double> counts(k, 0.0);
  for (std::size_t r = 0; r < preds.probs.rows(); ++r) {
    const std::size_t j = (*preds.labels)[r];
    Require(j < k, ErrorCode::kUnknownClass, "label outside the class set");
    counts[j] += 1.0;
    for (std::size_t i = 0; i < k; ++i) u(i, j) += preds.probs(r, i);
  }
  for (std::size_t j = 0; j < k; ++j) {
    Require(counts[j] > 0.0, ErrorCode::kEmptyClass,
            "class " + std::to_string(j) + " has no test samples");
    for (std::size_t i = 0; i < k; ++i) u(i, j) /= counts[j];
  }
  return u;
}

DistanceMatrix ConfusionDistance(const Matrix& u) {
  Require(u.rows() == u.cols(), ErrorCode::kShapeMismatch, "confusion matrix must be square");
  const std::size_t k = u.rows();
  DistanceMatrix out;
  out.d = Matrix(k, k);
  double largest = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double m = 0.5 * (u(i, j) + u(j, i));
      Require(m <= 1.0 + 1e-9, ErrorCode::kDomainError,
              "averaged confusion " + std::to_string(m) + " exceeds 1");
      Require(u(i, j) >= 0.0 && u(j, i) >= 0.0, ErrorCode::kDomainError,
              "negative confusion probability");
      double d;
      if (i == j && u(i, i) >= 1.0 - 1e-9) {
        d = 0.0;
      } else if (m <= 0.0) {
        d = INFINITY;
      } else {
        d = std::sqrt(std::max(0.0, -std::log(std::min(m, 1.0))));
      }
      out.d(i, j) = d;
      out.d(j, i) = d;
      if (std::isfinite(d)) largest = std::max(largest, d);
    }
  }
  out.cap = largest > 0.0 ? 2.0 * largest : 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (std::isinf(out.d(i, j))) {
        out.d(i, j) = out.cap;
        if (i <= j) out.capped.emplace_back(i, j);
      }
    }
  }
  return out;
}

MergeTree AverageLinkage(const Matrix& d) {
  const std::size_t n = d.rows();
  Require(d.cols() == n && n >= 2, ErrorCode::kInvalidDistanceMatrix,
          "need a square matrix with at least 2 leaves");
  for (std::size_t i = 0; i < n; ++i) {
    Require(d(i, i) == 0.0, ErrorCode::kInvalidDistanceMatrix, "diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j)
      Require(std::isfinite(d(i, j)) && d(i, j) >= 0.0 && d(i, j) == d(j, i),
              ErrorCode::kInvalidDistanceMatrix,
              "entries must be finite, nonnegative and symmetric");
  }

  struct Cluster {
    std::size_t node;
    std::size_t min_leaf;
    std::size_t size;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, i, 1});
  // Sum of leaf-to-leaf distances between active clusters.
  std::vector<std::vector<double>> sums(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sums[i][j] = d(i, j);

  MergeTree tree;
  tree.num_leaves = n;
  while (active.size() > 1) {
    std::size_t bp = 0, bq = 1;
    double best = INFINITY;
    std::pair<std::size_t, std::size_t> best_key{n, n};
    for (std::size_t p = 0; p < active.size(); ++p) {
      for (std::size_t q = p + 1; q < active.size(); ++q) {
        const double avg = sums[p][q] / static_cast<double>(active[p].size * active[q].size);
        const std::pair<std::size_t, std::size_t> key = std::minmax(active[p].min_leaf, active[q].min_leaf);
        if (avg < best || (avg == best && key < best_key)) {
          best = avg;
          best_key = key;
          bp = p;
          bq = q;
        }
      }
    }
    const Cluster& a = active[bp];
    const Cluster& b = active[bq];
    const bool a_left = a.min_leaf < b.min_leaf;
    MergeNode node;
    node.id = n + tree.merges.size();
    node.left = a_left ? a.node : b.node;
    node.right = a_left ? b.node : a.node;
    node.height = best;
    node.size = a.size + b.size;
    tree.merges.push_back(node);

    active[bp] = {node.id, std::min(a.min_leaf, b.min_leaf), node.size};
    for (std::size_t r = 0; r < active.size(); ++r) {
      if (r == bp || r == bq) continue;
      sums[bp][r] += sums[bq][r];
      sums[r][bp] = sums[bp][r];
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bq));
    sums.erase(sums.begin() + static_cast<std::ptrdiff_t>(bq));
    for (auto& row : sums) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bq));
  }
  return tree;
}

std::string SerializeMergeTree(const MergeTree& tree) {
  nlohmann::ordered_json doc;
  doc["format"] = "cood.merge_tree";
  doc["version"] = 1;
  doc["num_leaves"] = tree.num_leaves;
  nlohmann::ordered_json merges = nlohmann::ordered_json::array();
  for (const auto& m : tree.merges)
    merges.push_back({{"id", m.id}, {"left", m.left}, {"right", m.right},
                      {"height", m.height}, {"size", m.size}});
  doc["merges"] = std::move(merges);
  doc["root"] = NodeJson(tree, tree.merges.empty() ? 0 : tree.merges.back().id);
  return doc.dump(1) + "\n";
}

std::string PredictionsToCsv(const PredictionMatrix& preds) {
  std::string out = std::string(kPredictionsSchema) + "\n";
  out += "# ensemble_size: " + std::to_string(preds.ensemble_size) + "\n";
  std::vector<std::string> header;
  if (preds.labels) header.push_back("label");
  for (std::size_t c = 0; c < preds.num_classes(); ++c) header.push_back(std::to_string(c));
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (std::size_t r = 0; r < preds.probs.rows(); ++r) {
    bool first = true;
    if (preds.labels) {
      out += std::to_string((*preds.labels)[r]);
      first = false;
    }
    for (double v : preds.probs.row(r)) {
      out += (first ? "" : ",") + FormatDouble(v);
      first = false;
    }
    out += "\n";
  }
  return out;
}

PredictionMatrix PredictionsFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  PredictionMatrix preds;
  bool schema_seen = false;
  bool header_seen = false;
  bool has_labels = false;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line == kPredictionsSchema) schema_seen = true;
      const std::string tag = "# ensemble_size: ";
      if (line.rfind(tag, 0) == 0)
        preds.ensemble_size = ParseUnsigned(line.substr(tag.size()), "ensemble_size");
      continue;
    }
    const auto fields = SplitString(line, ',');
    if (!header_seen) {
      has_labels = !fields.empty() && fields.front() == "label";
      cols = fields.size() - (has_labels ? 1 : 0);
      header_seen = true;
      continue;
    }
    Require(fields.size() == cols + (has_labels ? 1 : 0), ErrorCode::kMalformedFile,
            "prediction row has wrong field count");
    std::size_t f = 0;
    if (has_labels) labels.push_back(ParseUnsigned(fields[f++], "label"));
    for (; f < fields.size(); ++f) values.push_back(ParseDouble(fields[f], "probability"));
  }
  Require(schema_seen, ErrorCode::kMalformedFile, "prediction CSV lacks its schema line");
  Require(header_seen, ErrorCode::kMalformedFile, "prediction CSV has no header");
  const std::size_t rows = cols == 0 ? 0 : values.size() / cols;
  preds.probs = Matrix(rows, cols, std::move(values));
  if (has_labels) preds.labels = std::move(labels);
  preds.Validate();
  return preds;
}

}  // namespace cood
