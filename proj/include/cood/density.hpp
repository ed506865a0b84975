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

// Class-conditional Gaussians over the representation z and the OOD score
//
//   s(z) = max_c [ -(z - mu_c)^T Sigma_c^-1 (z - mu_c) - log((2 pi)^n det Sigma_c) ]
//
// which is twice the log-density of the best-fitting class component.

#ifndef COOD_DENSITY_HPP_
#define COOD_DENSITY_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cood/linalg.hpp"

namespace cood {

struct ClassGaussian {
  std::size_t class_id = 0;
  Vector mean;
  Matrix covariance;  // regularized
  Matrix chol;
  double log_det = 0.0;
  std::size_t sample_count = 0;
};

struct GaussianBank {
  std::vector<ClassGaussian> components;
  std::size_t dim = 0;
  double epsilon_scale = 0.0;
};

inline constexpr double kDefaultEpsilonScale = 1e-6;

// `per_class[c]` holds the representations of class c. Each covariance gets
// (epsilon_scale * trace / n + 1e-12) added to its diagonal before factoring.
GaussianBank FitBank(const std::vector<std::vector<Vector>>& per_class,
                     double epsilon_scale = kDefaultEpsilonScale);

// Groups rows of `z` by label, then fits.
GaussianBank FitBankFromLabeled(const Matrix& z, std::span<const std::size_t> labels,
                                std::size_t num_classes,
                                double epsilon_scale = kDefaultEpsilonScale);

struct ScoreEntry {
  double score = 0.0;
  std::size_t best_class = 0;
};

// Ties between components go to the lowest class id.
ScoreEntry Score(const GaussianBank& bank, std::span<const double> z);
std::vector<ScoreEntry> ScoreBatch(const GaussianBank& bank, const Matrix& z);

std::string SerializeBank(const GaussianBank& bank);
GaussianBank DeserializeBank(const std::string& text);

}  // namespace cood

#endif  // COOD_DENSITY_HPP_
