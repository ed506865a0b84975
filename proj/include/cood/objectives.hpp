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

// Contrastive (NT-Xent) and label-smoothed cross-entropy objectives, the
// joint training step, and the two-stage schedule built on them.

#ifndef COOD_OBJECTIVES_HPP_
#define COOD_OBJECTIVES_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cood/augment.hpp"
#include "cood/data.hpp"
#include "cood/linalg.hpp"
#include "cood/network.hpp"

namespace cood {

struct NtXentResult {
  double loss = 0.0;
  Matrix grad_view0;
  Matrix grad_view1;
};

// Mean over the batch of the per-sample loss summed over both anchor views.
// For anchor view a of sample i the denominator runs over all N cross-view
// embeddings (the positive included) and the N-1 other same-view embeddings.
NtXentResult NtXentLoss(const Matrix& view0, const Matrix& view1, double tau);

struct CrossEntropyResult {
  double loss = 0.0;
  Matrix grad_logits;
};

// Target puts 1 - alpha on the true class and alpha / (k - 1) on every other
// class. Mean over the batch.
CrossEntropyResult LabelSmoothedCrossEntropy(const Matrix& logits,
                                             std::span<const std::size_t> labels, double alpha,
                                             std::size_t num_classes);

struct TrainConfig {
  double tau = 1.0;
  double lambda = 100.0;
  double alpha = 0.01;
  std::size_t stage1_epochs = 10;
  std::size_t stage2_epochs = 10;
  std::size_t batch_size = 64;
  // Off: no projection head and no contrastive term, stage 1 is skipped.
  bool use_contrastive = true;
  double stage1_lr = 0.1;
  double stage2_lr = 0.1;
  double warmup_fraction = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  std::vector<TransformSpec> transforms;

  void Validate() const;
};

enum class Stage { kContrastive, kJoint };

struct StepDiagnostics {
  double contrastive_loss = 0.0;
  double class_loss = 0.0;
  double lr = 0.0;
};

struct ObjectiveResult {
  StepDiagnostics diagnostics;
  ParamGrads grads;
};

// Loss and gradients for one batch of already-augmented views. Stage 1 uses
// the contrastive term alone. Stage 2 uses L_con + lambda * L_class, with
// L_class averaged over the two views.
ObjectiveResult ComputeObjective(const EncoderParams& params, const Matrix& view0,
                                 const Matrix& view1, std::span<const std::size_t> labels,
                                 const TrainConfig& config, Stage stage);

// Parameter groups the optimizer touches in `stage`.
std::vector<ParamGroup> ActiveGroups(const TrainConfig& config, Stage stage);

// Augments every row twice, evaluates the objective and applies one
// SGD-with-momentum step at learning rate `lr`.
StepDiagnostics CombinedStep(EncoderParams& params, OptimizerState& optimizer,
                             const Matrix& inputs, std::span<const std::size_t> labels,
                             const std::optional<ImageShape>& image_shape,
                             const TrainConfig& config, Stage stage, double lr,
                             std::mt19937_64& rng);

struct EpochRecord {
  std::size_t epoch = 0;  // global, counting across stages
  Stage stage = Stage::kContrastive;
  double contrastive_loss = 0.0;
  double class_loss = 0.0;
  double lr = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Stage 1 minimizes L_con for stage1_epochs; stage 2 minimizes
// L_con + lambda * L_class for stage2_epochs with a fresh warmup+cosine
// schedule. Deterministic for a given seed.
EncoderParams TrainTwoStage(const Dataset& dataset, const NetworkConfig& net_config,
                            const TrainConfig& train_config, std::uint64_t seed,
                            const EpochCallback& on_epoch = {});

}  // namespace cood

#endif  // COOD_OBJECTIVES_HPP_
