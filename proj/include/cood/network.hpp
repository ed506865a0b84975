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

// Encoder f, supervised head g and projection head h as plain fully
// connected networks, with hand-written backward passes, SGD with momentum
// and the warmup + cosine learning-rate schedule.
//
//   x --f--> z --g--> logits
//            z --h--> embedding
//
// f is a stack of Linear+ReLU layers ending at the representation z. g is a
// single Linear layer. h is Linear -> [BatchNorm] -> ReLU -> Linear.

#ifndef COOD_NETWORK_HPP_
#define COOD_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cood/linalg.hpp"

namespace cood {

struct NetworkConfig {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_widths = {32, 32};
  std::size_t representation_dim = 16;
  std::size_t num_classes = 2;
  std::size_t projection_hidden = 32;
  std::size_t embedding_dim = 16;
  std::size_t width_multiplier = 1;
  bool use_projection_batchnorm = true;

  void Validate() const;
  // Output widths of every encoder layer, hidden widths already scaled.
  std::vector<std::size_t> EncoderWidths() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// Weight is out x in; y = x W^T + b for a row-major batch x.
struct Dense {
  Matrix weight;
  Vector bias;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  friend bool operator==(const Dense&, const Dense&) = default;
};

enum class ParamGroup { kEncoder, kClassifier, kProjection };

struct TensorRef {
  std::string name;
  ParamGroup group;
  std::span<double> values;
};

struct ConstTensorRef {
  std::string name;
  ParamGroup group;
  std::span<const double> values;
};

struct EncoderParams {
  NetworkConfig config;
  std::vector<Dense> encoder;
  Dense classifier;
  Dense projection_in;
  Vector bn_scale;
  Vector bn_shift;
  Dense projection_out;

  // Stable order, shared by gradients and optimizer buffers of equal shape.
  std::vector<TensorRef> Tensors();
  std::vector<ConstTensorRef> Tensors() const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Gradients and momentum buffers share the parameter layout.
using ParamGrads = EncoderParams;

EncoderParams InitParams(const NetworkConfig& config, std::uint64_t seed);
EncoderParams ZerosLike(const EncoderParams& params);
void AddInPlace(EncoderParams& target, const EncoderParams& source, double scale = 1.0);

struct EncoderTrace {
  std::vector<Matrix> layer_inputs;  // input to layer l
  std::vector<Matrix> pre_activations;
  Matrix output;  // z
};

struct ProjectionTrace {
  Matrix input;        // z
  Matrix hidden_pre;   // first linear output
  Matrix normalized;   // batch-normalized hidden_pre (when enabled)
  Vector batch_mean;
  Vector batch_inv_std;
  Matrix hidden_post;  // after optional BN, before ReLU
  Matrix hidden;       // after ReLU
  Matrix output;       // embedding
};

inline constexpr double kBatchNormEpsilon = 1e-5;

Matrix LinearForward(const Matrix& x, const Dense& layer);

// Representation z for every row of `batch`.
Matrix Encode(const EncoderParams& params, const Matrix& batch, EncoderTrace* trace = nullptr);
Matrix Classify(const EncoderParams& params, const Matrix& z);
Matrix Project(const EncoderParams& params, const Matrix& z, bool training,
               ProjectionTrace* trace = nullptr);

struct ViewTrace {
  EncoderTrace encoder;
  std::optional<ProjectionTrace> projection;
};

struct UpstreamGrads {
  std::optional<Matrix> logits;      // dL/dlogits, batch x k
  std::optional<Matrix> embeddings;  // dL/d(embedding), batch x embedding_dim
};

// Accumulates parameter gradients of one view into `grads`. Contributions of
// both heads meet at z and flow through the shared encoder.
void Backward(const EncoderParams& params, const ViewTrace& trace, const UpstreamGrads& upstream,
              ParamGrads& grads);

struct OptimizerState {
  double momentum = 0.9;
  double weight_decay = 1e-6;
  EncoderParams buffer;
};

OptimizerState MakeOptimizer(const EncoderParams& params, double momentum = 0.9,
                             double weight_decay = 1e-6);

inline constexpr ParamGroup kAllGroups[] = {ParamGroup::kEncoder, ParamGroup::kClassifier,
                                            ParamGroup::kProjection};

// buffer <- m * buffer + grad + wd * param; param <- param - lr * buffer.
// Tensors whose group is not listed in `active` are left untouched.
void SgdMomentumStep(OptimizerState& state, EncoderParams& params, const ParamGrads& grads,
                     double lr,
                     std::span<const ParamGroup> active = kAllGroups);

struct Schedule {
  double base_lr = 0.1;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;
};

double LearningRate(const Schedule& schedule, std::size_t step);

// Versioned JSON document; doubles are written in shortest round-trip form.
std::string SerializeParams(const EncoderParams& params);
EncoderParams DeserializeParams(const std::string& text);

}  // namespace cood

#endif  // COOD_NETWORK_HPP_
