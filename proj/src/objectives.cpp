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

#include "cood/objectives.hpp"

#include <cmath>
#include <string>

#include "cood/error.hpp"

namespace cood {
namespace {

struct Normalized {
  Matrix unit;
  Vector norms;
};

Normalized NormalizeRows(const Matrix& m) {
  Normalized out{m, Vector(m.rows())};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double n = Norm(m.row(i));
    Require(n > 0.0, ErrorCode::kZeroEmbedding, "embedding row " + std::to_string(i) + " is zero");
    out.norms[i] = n;
    for (double& v : out.unit.row(i)) v /= n;
  }
  return out;
}

// Gradient w.r.t. the raw row given the gradient w.r.t. its unit vector.
void UnnormalizeGrad(const Normalized& n, const Matrix& d_unit, Matrix& d_raw) {
  for (std::size_t i = 0; i < d_unit.rows(); ++i) {
    auto e = n.unit.row(i);
    auto g = d_unit.row(i);
    const double proj = Dot(e, g);
    auto out = d_raw.row(i);
    for (std::size_t k = 0; k < e.size(); ++k) out[k] = (g[k] - e[k] * proj) / n.norms[i];
  }
}

Matrix RowsOf(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = m.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::size_t StepsPerEpoch(std::size_t n, std::size_t batch) { return n / batch; }

}  // namespace

NtXentResult NtXentLoss(const Matrix& view0, const Matrix& view1, double tau) {
  const std::size_t n = view0.rows();
  Require(view1.rows() == n && view0.cols() == view1.cols(), ErrorCode::kShapeMismatch,
          "contrastive views differ in shape");
  Require(n >= 2, ErrorCode::kBatchTooSmall, "contrastive loss needs N >= 2");
  Require(tau > 0.0, ErrorCode::kDomainError, "temperature must be positive");

  const Normalized e[2] = {NormalizeRows(view0), NormalizeRows(view1)};
  Matrix d_unit[2] = {Matrix(n, view0.cols()), Matrix(n, view0.cols())};

  // Per anchor: N cross-view logits followed by N-1 same-view logits.
  std::vector<double> logits(2 * n - 1);
  double total = 0.0;
  for (int a = 0; a < 2; ++a) {
    const int b = 1 - a;
    for (std::size_t i = 0; i < n; ++i) {
      auto anchor = e[a].unit.row(i);
      std::size_t slot = 0;
      for (std::size_t j = 0; j < n; ++j) logits[slot++] = Dot(anchor, e[b].unit.row(j)) / tau;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) logits[slot++] = Dot(anchor, e[a].unit.row(j)) / tau;
      const double lse = LogSumExp(logits);
      total += lse - logits[i];

      // d(term)/d(logit) = softmax - indicator(positive).
      auto d_anchor = d_unit[a].row(i);
      slot = 0;
      auto accumulate = [&](int view, std::size_t j, std::size_t s) {
        double coeff = std::exp(logits[s] - lse);
        if (view == b && j == i) coeff -= 1.0;
        coeff /= tau * static_cast<double>(n);
        auto other = e[view].unit.row(j);
        auto d_other = d_unit[view].row(j);
        for (std::size_t k = 0; k < anchor.size(); ++k) {
          d_anchor[k] += coeff * other[k];
          d_other[k] += coeff * anchor[k];
        }
      };
      for (std::size_t j = 0; j < n; ++j) accumulate(b, j, slot++);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) accumulate(a, j, slot++);
    }
  }

  NtXentResult result;
  result.loss = total / static_cast<double>(n);
  result.grad_view0 = Matrix(n, view0.cols());
  result.grad_view1 = Matrix(n, view0.cols());
  UnnormalizeGrad(e[0], d_unit[0], result.grad_view0);
  UnnormalizeGrad(e[1], d_unit[1], result.grad_view1);
  return result;
}

CrossEntropyResult LabelSmoothedCrossEntropy(const Matrix& logits,
                                             std::span<const std::size_t> labels, double alpha,
                                             std::size_t num_classes) {
  Require(logits.rows() == labels.size() && logits.cols() == num_classes,
          ErrorCode::kShapeMismatch, "logits shape does not match labels/classes");
  Require(alpha >= 0.0 && alpha < 1.0, ErrorCode::kDomainError, "alpha must lie in [0, 1)");
  Require(!labels.empty(), ErrorCode::kBatchTooSmall, "cross-entropy of an empty batch");
  const double batch = static_cast<double>(labels.size());
  const double off = num_classes > 1 ? alpha / static_cast<double>(num_classes - 1) : 0.0;
  const double on = num_classes > 1 ? 1.0 - alpha : 1.0;

  CrossEntropyResult result;
  result.grad_logits = Matrix(logits.rows(), num_classes);
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    Require(labels[r] < num_classes, ErrorCode::kLabelOutOfRange,
            "label " + std::to_string(labels[r]) + " >= " + std::to_string(num_classes));
    auto row = logits.row(r);
    const double lse = LogSumExp(row);
    auto grad = result.grad_logits.row(r);
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double target = k == labels[r] ? on : off;
      total -= target * (row[k] - lse);
      grad[k] = (std::exp(row[k] - lse) - target) / batch;
    }
  }
  result.loss = total / batch;
  return result;
}

void TrainConfig::Validate() const {
  Require(tau > 0.0, ErrorCode::kConfigError, "train.tau must be > 0");
  Require(lambda >= 0.0, ErrorCode::kConfigError, "train.lambda must be >= 0");
  Require(alpha >= 0.0 && alpha < 1.0, ErrorCode::kConfigError, "train.alpha must lie in [0, 1)");
  Require(batch_size >= 2, ErrorCode::kConfigError, "train.batch_size must be >= 2");
  Require(stage1_lr >= 0.0 && stage2_lr >= 0.0, ErrorCode::kConfigError,
          "learning rates must be >= 0");
  Require(warmup_fraction >= 0.0 && warmup_fraction <= 1.0, ErrorCode::kConfigError,
          "train.warmup_fraction must lie in [0, 1]");
  Require(momentum >= 0.0 && momentum < 1.0, ErrorCode::kConfigError,
          "train.momentum must lie in [0, 1)");
  Require(weight_decay >= 0.0, ErrorCode::kConfigError, "train.weight_decay must be >= 0");
  for (const auto& t : transforms) t.Validate();
}

ObjectiveResult ComputeObjective(const EncoderParams& params, const Matrix& view0,
                                 const Matrix& view1, std::span<const std::size_t> labels,
                                 const TrainConfig& config, Stage stage) {
  const bool contrastive = config.use_contrastive;
  const bool supervised = stage == Stage::kJoint;
  Require(contrastive || supervised, ErrorCode::kConfigError,
          "contrastive stage requested with contrastive training disabled");

  ObjectiveResult result{{}, ZerosLike(params)};
  ViewTrace traces[2];
  Matrix z[2] = {Encode(params, view0, &traces[0].encoder), Encode(params, view1, &traces[1].encoder)};
  UpstreamGrads upstream[2];

  if (contrastive) {
    Matrix emb[2];
    for (int v = 0; v < 2; ++v) {
      traces[v].projection.emplace();
      emb[v] = Project(params, z[v], /*training=*/true, &*traces[v].projection);
    }
    NtXentResult con = NtXentLoss(emb[0], emb[1], config.tau);
    result.diagnostics.contrastive_loss = con.loss;
    upstream[0].embeddings = std::move(con.grad_view0);
    upstream[1].embeddings = std::move(con.grad_view1);
  }

  if (supervised) {
    const std::size_t k = params.config.num_classes;
    double class_loss = 0.0;
    for (int v = 0; v < 2; ++v) {
      CrossEntropyResult ce = LabelSmoothedCrossEntropy(Classify(params, z[v]), labels, config.alpha, k);
      class_loss += 0.5 * ce.loss;
      for (double& g : ce.grad_logits.data()) g *= 0.5 * config.lambda;
      upstream[v].logits = std::move(ce.grad_logits);
    }
    result.diagnostics.class_loss = class_loss;
  }

  for (int v = 0; v < 2; ++v) Backward(params, traces[v], upstream[v], result.grads);
  return result;
}

std::vector<ParamGroup> ActiveGroups(const TrainConfig& config, Stage stage) {
  std::vector<ParamGroup> groups = {ParamGroup::kEncoder};
  if (config.use_contrastive) groups.push_back(ParamGroup::kProjection);
  if (stage == Stage::kJoint) groups.push_back(ParamGroup::kClassifier);
  return groups;
}

StepDiagnostics CombinedStep(EncoderParams& params, OptimizerState& optimizer,
                             const Matrix& inputs, std::span<const std::size_t> labels,
                             const std::optional<ImageShape>& image_shape,
                             const TrainConfig& config, Stage stage, double lr,
                             std::mt19937_64& rng) {
  Require(inputs.rows() == labels.size(), ErrorCode::kShapeMismatch,
          "batch inputs and labels differ in length");
  Matrix view0(inputs.rows(), inputs.cols());
  Matrix view1(inputs.rows(), inputs.cols());
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    auto [a, b] = TransformPair(inputs.row(r), config.transforms, image_shape, rng);
    Require(a.size() == inputs.cols() && b.size() == inputs.cols(), ErrorCode::kShapeMismatch,
            "transforms changed the input width");
    std::copy(a.begin(), a.end(), view0.row(r).begin());
    std::copy(b.begin(), b.end(), view1.row(r).begin());
  }
  ObjectiveResult obj = ComputeObjective(params, view0, view1, labels, config, stage);
  const auto groups = ActiveGroups(config, stage);
  SgdMomentumStep(optimizer, params, obj.grads, lr, groups);
  obj.diagnostics.lr = lr;
  return obj.diagnostics;
}

EncoderParams TrainTwoStage(const Dataset& dataset, const NetworkConfig& net_config,
                            const TrainConfig& train_config, std::uint64_t seed,
                            const EpochCallback& on_epoch) {
  train_config.Validate();
  net_config.Validate();
  Require(dataset.size() > 0, ErrorCode::kEmptyDataset, "training set is empty");
  Require(dataset.size() >= train_config.batch_size, ErrorCode::kEmptyDataset,
          "training set smaller than one batch");
  Require(dataset.dim() == net_config.input_dim, ErrorCode::kShapeMismatch,
          "dataset dim does not match network input_dim");
  Require(dataset.num_classes <= net_config.num_classes, ErrorCode::kShapeMismatch,
          "dataset has more classes than the classifier head");

  EncoderParams params = InitParams(net_config, seed);
  std::mt19937_64 aug_rng(DeriveSeed(seed, 1));
  const std::size_t steps = StepsPerEpoch(dataset.size(), train_config.batch_size);
  std::size_t global_epoch = 0;

  auto run_stage = [&](Stage stage, std::size_t epochs, double base_lr) {
    if (epochs == 0) return;
    Schedule schedule;
    schedule.base_lr = base_lr;
    schedule.total_steps = epochs * steps;
    schedule.warmup_steps = static_cast<std::size_t>(
        std::lround(train_config.warmup_fraction * static_cast<double>(schedule.total_steps)));
    OptimizerState opt =
        MakeOptimizer(params, train_config.momentum, train_config.weight_decay);
    std::size_t step = 0;
    for (std::size_t e = 0; e < epochs; ++e, ++global_epoch) {
      const auto batches = Batches(dataset.size(), train_config.batch_size,
                                   DeriveSeed(seed, 1000 + global_epoch), /*drop_last=*/true);
      EpochRecord rec{global_epoch, stage, 0.0, 0.0, 0.0};
      for (const auto& batch : batches) {
        const Matrix inputs = RowsOf(dataset.inputs, batch);
        std::vector<std::size_t> labels;
        labels.reserve(batch.size());
        for (std::size_t idx : batch) labels.push_back(dataset.labels[idx]);
        const double lr = LearningRate(schedule, step++);
        const StepDiagnostics d = CombinedStep(params, opt, inputs, labels, dataset.image_shape,
                                               train_config, stage, lr, aug_rng);
        Require(std::isfinite(d.contrastive_loss) && std::isfinite(d.class_loss),
                ErrorCode::kDomainError,
                "training diverged at epoch " + std::to_string(global_epoch) +
                    " (non-finite loss); lower the learning rate or lambda");
        rec.contrastive_loss += d.contrastive_loss / static_cast<double>(batches.size());
        rec.class_loss += d.class_loss / static_cast<double>(batches.size());
        rec.lr = lr;
      }
      if (on_epoch) on_epoch(rec);
    }
  };

  if (train_config.use_contrastive)
    run_stage(Stage::kContrastive, train_config.stage1_epochs, train_config.stage1_lr);
  run_stage(Stage::kJoint, train_config.stage2_epochs, train_config.stage2_lr);
  return params;
}

}  // namespace cood
