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

#include "cood/density.hpp"

#include <cmath>
#include <numbers>

#include "cood/error.hpp"
#include "json.hpp"

namespace cood {
namespace {

constexpr int kBankFormatVersion = 1;
constexpr double kRegularizationFloor = 1e-12;

void Factorize(ClassGaussian& g) {
  g.chol = Cholesky(g.covariance);
  g.log_det = LogDetPsd(g.chol);
}

}  // namespace

GaussianBank FitBank(const std::vector<std::vector<Vector>>& per_class, double epsilon_scale) {
  Require(!per_class.empty(), ErrorCode::kTooFewSamples, "bank needs at least one class");
  Require(epsilon_scale >= 0.0, ErrorCode::kConfigError, "epsilon_scale must be >= 0");
  GaussianBank bank;
  bank.epsilon_scale = epsilon_scale;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    Require(per_class[c].size() >= 2, ErrorCode::kTooFewSamples,
            "class " + std::to_string(c) + " has " + std::to_string(per_class[c].size()) +
                " samples, need >= 2");
    auto [mean, cov] = MeanAndCovariance(per_class[c]);
    const std::size_t n = mean.size();
    if (c == 0) bank.dim = n;
    Require(n == bank.dim, ErrorCode::kShapeMismatch, "classes differ in dimension");
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += cov(i, i);
    const double reg = epsilon_scale * trace / static_cast<double>(n) + kRegularizationFloor;
    for (std::size_t i = 0; i < n; ++i) cov(i, i) += reg;

    ClassGaussian g;
    g.class_id = c;
    g.mean = std::move(mean);
    g.covariance = std::move(cov);
    g.sample_count = per_class[c].size();
    try {
      Factorize(g);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotPositiveDefinite) throw;
      Fail(ErrorCode::kNotPositiveDefinite,
           "class " + std::to_string(c) + " covariance not PD with epsilon_scale " +
               std::to_string(epsilon_scale) + " (added " + std::to_string(reg) + ")");
    }
    bank.components.push_back(std::move(g));
  }
  return bank;
}

GaussianBank FitBankFromLabeled(const Matrix& z, std::span<const std::size_t> labels,
                                std::size_t num_classes, double epsilon_scale) {
  Require(z.rows() == labels.size(), ErrorCode::kShapeMismatch,
          "representations and labels differ in length");
  std::vector<std::vector<Vector>> per_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Require(labels[i] < num_classes, ErrorCode::kLabelOutOfRange, "label out of range");
    auto row = z.row(i);
    per_class[labels[i]].emplace_back(row.begin(), row.end());
  }
  return FitBank(per_class, epsilon_scale);
}

ScoreEntry Score(const GaussianBank& bank, std::span<const double> z) {
  Require(z.size() == bank.dim, ErrorCode::kShapeMismatch,
          "query dim " + std::to_string(z.size()) + " != bank dim " + std::to_string(bank.dim));
  const double log_two_pi_n = static_cast<double>(bank.dim) * std::log(2.0 * std::numbers::pi);
  ScoreEntry best{-INFINITY, 0};
  bool first = true;
  Vector diff(bank.dim);
  for (const auto& g : bank.components) {
    for (std::size_t i = 0; i < bank.dim; ++i) diff[i] = z[i] - g.mean[i];
    // (z - mu)^T Sigma^-1 (z - mu) = |L^-1 (z - mu)|^2
    const Vector y = SolveLower(g.chol, diff);
    const double quad = Dot(y, y);
    const double s = -quad - (log_two_pi_n + g.log_det);
    if (first || s > best.score) {
      best = {s, g.class_id};
      first = false;
    }
  }
  return best;
}

std::vector<ScoreEntry> ScoreBatch(const GaussianBank& bank, const Matrix& z) {
  std::vector<ScoreEntry> out;
  out.reserve(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) out.push_back(Score(bank, z.row(r)));
  return out;
}

std::string SerializeBank(const GaussianBank& bank) {
  nlohmann::ordered_json doc;
  doc["format"] = "cood.gaussian_bank";
  doc["version"] = kBankFormatVersion;
  doc["dim"] = bank.dim;
  doc["epsilon_scale"] = bank.epsilon_scale;
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const auto& g : bank.components) {
    comps.push_back({{"class_id", g.class_id},
                     {"sample_count", g.sample_count},
                     {"mean", g.mean},
                     {"covariance", g.covariance.data()}});
  }
  doc["components"] = std::move(comps);
  return doc.dump(1) + "\n";
}

GaussianBank DeserializeBank(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    Require(doc.at("format") == "cood.gaussian_bank", ErrorCode::kMalformedFile,
            "not a cood.gaussian_bank document");
    Require(doc.at("version") == kBankFormatVersion, ErrorCode::kIncompatibleModel,
            "unsupported bank version");
    GaussianBank bank;
    bank.dim = doc.at("dim");
    bank.epsilon_scale = doc.at("epsilon_scale");
    for (const auto& jc : doc.at("components")) {
      ClassGaussian g;
      g.class_id = jc.at("class_id");
      g.sample_count = jc.at("sample_count");
      g.mean = jc.at("mean").get<Vector>();
      g.covariance = Matrix(bank.dim, bank.dim, jc.at("covariance").get<std::vector<double>>());
      Require(g.mean.size() == bank.dim, ErrorCode::kMalformedFile, "mean has wrong length");
      Factorize(g);
      bank.components.push_back(std::move(g));
    }
    Require(!bank.components.empty(), ErrorCode::kMalformedFile, "bank has no components");
    return bank;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedFile, std::string("bank document: ") + e.what());
  }
}

}  // namespace cood
