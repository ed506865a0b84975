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

#include "cood/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cood/error.hpp"
#include "json.hpp"

namespace cood {
namespace {

constexpr int kParamsFormatVersion = 1;

Dense MakeDense(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  Dense d{Matrix(out, in), Vector(out, 0.0)};
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(in)));
  for (double& w : d.weight.data()) w = normal(rng);
  return d;
}

Dense ZeroDense(const Dense& like) {
  return {Matrix(like.weight.rows(), like.weight.cols()), Vector(like.bias.size(), 0.0)};
}

void AccumulateInto(Matrix& target, const Matrix& source) {
  for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] += source.data()[i];
}

void ReluInPlace(Matrix& m) {
  for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

// dY -> (dW, db accumulated), returns dX.
Matrix LinearBackward(const Dense& layer, const Matrix& input, const Matrix& d_out, Dense& grad) {
  const std::size_t batch = input.rows();
  const std::size_t in = layer.in_dim();
  const std::size_t out = layer.out_dim();
  Require(d_out.rows() == batch && d_out.cols() == out, ErrorCode::kShapeMismatch,
          "upstream gradient shape does not match layer output");
  Matrix d_in(batch, in);
  for (std::size_t b = 0; b < batch; ++b) {
    auto x = input.row(b);
    auto dy = d_out.row(b);
    auto dx = d_in.row(b);
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dy[o];
      if (g == 0.0) continue;
      grad.bias[o] += g;
      auto w_row = layer.weight.row(o);
      auto gw_row = grad.weight.row(o);
      for (std::size_t i = 0; i < in; ++i) {
        gw_row[i] += g * x[i];
        dx[i] += g * w_row[i];
      }
    }
  }
  return d_in;
}

void ReluBackwardInPlace(Matrix& grad, const Matrix& pre) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(pre.data()[i] > 0.0)) grad.data()[i] = 0.0;
}

const char* GroupName(ParamGroup g) {
  switch (g) {
    case ParamGroup::kEncoder: return "encoder";
    case ParamGroup::kClassifier: return "classifier";
    case ParamGroup::kProjection: return "projection";
  }
  return "?";
}

template <typename Params, typename Ref>
std::vector<Ref> CollectTensors(Params& p) {
  std::vector<Ref> out;
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const std::string prefix = "encoder." + std::to_string(l);
    out.push_back({prefix + ".weight", ParamGroup::kEncoder, p.encoder[l].weight.data()});
    out.push_back({prefix + ".bias", ParamGroup::kEncoder, p.encoder[l].bias});
  }
  out.push_back({"classifier.weight", ParamGroup::kClassifier, p.classifier.weight.data()});
  out.push_back({"classifier.bias", ParamGroup::kClassifier, p.classifier.bias});
  out.push_back({"projection.0.weight", ParamGroup::kProjection, p.projection_in.weight.data()});
  out.push_back({"projection.0.bias", ParamGroup::kProjection, p.projection_in.bias});
  if (p.config.use_projection_batchnorm) {
    out.push_back({"projection.bn.scale", ParamGroup::kProjection, p.bn_scale});
    out.push_back({"projection.bn.shift", ParamGroup::kProjection, p.bn_shift});
  }
  out.push_back({"projection.1.weight", ParamGroup::kProjection, p.projection_out.weight.data()});
  out.push_back({"projection.1.bias", ParamGroup::kProjection, p.projection_out.bias});
  return out;
}

}  // namespace

void NetworkConfig::Validate() const {
  auto positive = [](std::size_t v, const char* name) {
    Require(v >= 1, ErrorCode::kConfigError, std::string(name) + " must be >= 1");
  };
  positive(input_dim, "input_dim");
  positive(representation_dim, "representation_dim");
  positive(num_classes, "num_classes");
  positive(projection_hidden, "projection_hidden");
  positive(embedding_dim, "embedding_dim");
  positive(width_multiplier, "width_multiplier");
  for (std::size_t w : hidden_widths) positive(w, "hidden width");
}

std::vector<std::size_t> NetworkConfig::EncoderWidths() const {
  std::vector<std::size_t> widths;
  for (std::size_t w : hidden_widths) widths.push_back(w * width_multiplier);
  widths.push_back(representation_dim);
  return widths;
}

std::vector<TensorRef> EncoderParams::Tensors() {
  return CollectTensors<EncoderParams, TensorRef>(*this);
}

std::vector<ConstTensorRef> EncoderParams::Tensors() const {
  return CollectTensors<const EncoderParams, ConstTensorRef>(*this);
}

EncoderParams InitParams(const NetworkConfig& config, std::uint64_t seed) {
  config.Validate();
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.config = config;
  std::size_t in = config.input_dim;
  for (std::size_t width : config.EncoderWidths()) {
    p.encoder.push_back(MakeDense(in, width, rng));
    in = width;
  }
  p.classifier = MakeDense(config.representation_dim, config.num_classes, rng);
  p.projection_in = MakeDense(config.representation_dim, config.projection_hidden, rng);
  if (config.use_projection_batchnorm) {
    p.bn_scale.assign(config.projection_hidden, 1.0);
    p.bn_shift.assign(config.projection_hidden, 0.0);
  }
  p.projection_out = MakeDense(config.projection_hidden, config.embedding_dim, rng);
  return p;
}

EncoderParams ZerosLike(const EncoderParams& params) {
  EncoderParams z;
  z.config = params.config;
  for (const auto& layer : params.encoder) z.encoder.push_back(ZeroDense(layer));
  z.classifier = ZeroDense(params.classifier);
  z.projection_in = ZeroDense(params.projection_in);
  z.bn_scale.assign(params.bn_scale.size(), 0.0);
  z.bn_shift.assign(params.bn_shift.size(), 0.0);
  z.projection_out = ZeroDense(params.projection_out);
  return z;
}

void AddInPlace(EncoderParams& target, const EncoderParams& source, double scale) {
  auto dst = target.Tensors();
  auto src = source.Tensors();
  Require(dst.size() == src.size(), ErrorCode::kShapeMismatch, "parameter layouts differ");
  for (std::size_t t = 0; t < dst.size(); ++t) {
    Require(dst[t].values.size() == src[t].values.size(), ErrorCode::kShapeMismatch,
            "tensor " + dst[t].name + " differs in size");
    for (std::size_t i = 0; i < dst[t].values.size(); ++i)
      dst[t].values[i] += scale * src[t].values[i];
  }
}

Matrix LinearForward(const Matrix& x, const Dense& layer) {
  Require(x.cols() == layer.in_dim(), ErrorCode::kShapeMismatch,
          "input width " + std::to_string(x.cols()) + " != layer input " +
              std::to_string(layer.in_dim()));
  Matrix y(x.rows(), layer.out_dim());
  for (std::size_t b = 0; b < x.rows(); ++b) {
    auto xr = x.row(b);
    auto yr = y.row(b);
    for (std::size_t o = 0; o < layer.out_dim(); ++o) {
      auto w = layer.weight.row(o);
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < xr.size(); ++i) acc += w[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

Matrix Encode(const EncoderParams& params, const Matrix& batch, EncoderTrace* trace) {
  Require(batch.cols() == params.config.input_dim, ErrorCode::kShapeMismatch,
          "input dim " + std::to_string(batch.cols()) + " != " +
              std::to_string(params.config.input_dim));
  if (trace) {
    trace->layer_inputs.clear();
    trace->pre_activations.clear();
  }
  Matrix h = batch;
  for (const auto& layer : params.encoder) {
    Matrix pre = LinearForward(h, layer);
    Matrix act = pre;
    ReluInPlace(act);
    if (trace) {
      trace->layer_inputs.push_back(std::move(h));
      trace->pre_activations.push_back(std::move(pre));
    }
    h = std::move(act);
  }
  if (trace) trace->output = h;
  return h;
}

Matrix Classify(const EncoderParams& params, const Matrix& z) {
  return LinearForward(z, params.classifier);
}

Matrix Project(const EncoderParams& params, const Matrix& z, bool training,
               ProjectionTrace* trace) {
  const bool bn = params.config.use_projection_batchnorm;
  const std::size_t batch = z.rows();
  if (bn && training) {
    Require(batch >= 2, ErrorCode::kBatchTooSmall,
            "batch normalization needs at least 2 samples, got " + std::to_string(batch));
  }
  Matrix pre = LinearForward(z, params.projection_in);
  Matrix post = pre;
  Matrix normalized;
  Vector mean, inv_std;
  if (bn && batch > 0) {
    const std::size_t width = pre.cols();
    normalized = Matrix(batch, width);
    mean.assign(width, 0.0);
    inv_std.assign(width, 0.0);
    for (std::size_t c = 0; c < width; ++c) {
      double m = 0.0;
      for (std::size_t b = 0; b < batch; ++b) m += pre(b, c);
      m /= static_cast<double>(batch);
      double var = 0.0;
      for (std::size_t b = 0; b < batch; ++b) var += (pre(b, c) - m) * (pre(b, c) - m);
      var /= static_cast<double>(batch);
      const double inv = 1.0 / std::sqrt(var + kBatchNormEpsilon);
      mean[c] = m;
      inv_std[c] = inv;
      for (std::size_t b = 0; b < batch; ++b) {
        const double xh = (pre(b, c) - m) * inv;
        normalized(b, c) = xh;
        post(b, c) = params.bn_scale[c] * xh + params.bn_shift[c];
      }
    }
  }
  Matrix hidden = post;
  ReluInPlace(hidden);
  Matrix out = LinearForward(hidden, params.projection_out);
  if (trace) {
    trace->input = z;
    trace->hidden_pre = std::move(pre);
    trace->normalized = std::move(normalized);
    trace->batch_mean = std::move(mean);
    trace->batch_inv_std = std::move(inv_std);
    trace->hidden_post = std::move(post);
    trace->hidden = std::move(hidden);
    trace->output = out;
  }
  return out;
}

void Backward(const EncoderParams& params, const ViewTrace& trace, const UpstreamGrads& upstream,
              ParamGrads& grads) {
  const Matrix& z = trace.encoder.output;
  Matrix dz(z.rows(), z.cols());

  if (upstream.logits) {
    Matrix d = LinearBackward(params.classifier, z, *upstream.logits, grads.classifier);
    AccumulateInto(dz, d);
  }

  if (upstream.embeddings) {
    Require(trace.projection.has_value(), ErrorCode::kShapeMismatch,
            "embedding gradient supplied without a projection trace");
    const ProjectionTrace& pt = *trace.projection;
    Matrix d_hidden =
        LinearBackward(params.projection_out, pt.hidden, *upstream.embeddings, grads.projection_out);
    ReluBackwardInPlace(d_hidden, pt.hidden_post);
    Matrix d_pre = d_hidden;
    if (params.config.use_projection_batchnorm) {
      const std::size_t batch = d_hidden.rows();
      const std::size_t width = d_hidden.cols();
      const double n = static_cast<double>(batch);
      for (std::size_t c = 0; c < width; ++c) {
        double sum_dxh = 0.0;
        double sum_dxh_xh = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          const double dy = d_hidden(b, c);
          grads.bn_scale[c] += dy * pt.normalized(b, c);
          grads.bn_shift[c] += dy;
          const double dxh = dy * params.bn_scale[c];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * pt.normalized(b, c);
        }
        const double inv = pt.batch_inv_std[c];
        for (std::size_t b = 0; b < batch; ++b) {
          const double dxh = d_hidden(b, c) * params.bn_scale[c];
          d_pre(b, c) = inv / n * (n * dxh - sum_dxh - pt.normalized(b, c) * sum_dxh_xh);
        }
      }
    }
    Matrix d = LinearBackward(params.projection_in, pt.input, d_pre, grads.projection_in);
    AccumulateInto(dz, d);
  }

  Matrix d_act = std::move(dz);
  for (std::size_t l = params.encoder.size(); l-- > 0;) {
    ReluBackwardInPlace(d_act, trace.encoder.pre_activations[l]);
    d_act = LinearBackward(params.encoder[l], trace.encoder.layer_inputs[l], d_act,
                           grads.encoder[l]);
  }
}

OptimizerState MakeOptimizer(const EncoderParams& params, double momentum, double weight_decay) {
  return {momentum, weight_decay, ZerosLike(params)};
}

void SgdMomentumStep(OptimizerState& state, EncoderParams& params, const ParamGrads& grads,
                     double lr, std::span<const ParamGroup> active) {
  auto p = params.Tensors();
  auto g = grads.Tensors();
  auto buf = state.buffer.Tensors();
  Require(p.size() == g.size() && p.size() == buf.size(), ErrorCode::kShapeMismatch,
          "optimizer layout mismatch");
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (std::find(active.begin(), active.end(), p[t].group) == active.end()) continue;
    Require(p[t].values.size() == g[t].values.size() &&
                p[t].values.size() == buf[t].values.size(),
            ErrorCode::kShapeMismatch, "tensor " + p[t].name + " differs in size");
    for (std::size_t i = 0; i < p[t].values.size(); ++i) {
      double& b = buf[t].values[i];
      b = state.momentum * b + g[t].values[i] + state.weight_decay * p[t].values[i];
      p[t].values[i] -= lr * b;
    }
  }
}

double LearningRate(const Schedule& s, std::size_t step) {
  Require(s.warmup_steps <= s.total_steps, ErrorCode::kDomainError,
          "warmup exceeds total steps");
  Require(step <= s.total_steps, ErrorCode::kDomainError,
          "step " + std::to_string(step) + " beyond schedule end " + std::to_string(s.total_steps));
  if (step < s.warmup_steps) {
    return s.base_lr * static_cast<double>(step + 1) / static_cast<double>(s.warmup_steps);
  }
  const std::size_t decay = s.total_steps - s.warmup_steps;
  if (decay == 0) return s.base_lr;
  const double progress =
      static_cast<double>(step - s.warmup_steps) / static_cast<double>(decay);
  return s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string SerializeParams(const EncoderParams& params) {
  nlohmann::ordered_json doc;
  doc["format"] = "cood.params";
  doc["version"] = kParamsFormatVersion;
  const auto& c = params.config;
  doc["config"] = {{"input_dim", c.input_dim},
                   {"hidden_widths", c.hidden_widths},
                   {"representation_dim", c.representation_dim},
                   {"num_classes", c.num_classes},
                   {"projection_hidden", c.projection_hidden},
                   {"embedding_dim", c.embedding_dim},
                   {"width_multiplier", c.width_multiplier},
                   {"use_projection_batchnorm", c.use_projection_batchnorm}};
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto& t : params.Tensors()) {
    tensors[t.name] = {{"group", GroupName(t.group)},
                       {"values", std::vector<double>(t.values.begin(), t.values.end())}};
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump(1) + "\n";
}

EncoderParams DeserializeParams(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedFile, std::string("params document: ") + e.what());
  }
  try {
    Require(doc.at("format") == "cood.params", ErrorCode::kMalformedFile,
            "not a cood.params document");
    Require(doc.at("version") == kParamsFormatVersion, ErrorCode::kIncompatibleModel,
            "unsupported params version");
    const auto& jc = doc.at("config");
    NetworkConfig c;
    c.input_dim = jc.at("input_dim");
    c.hidden_widths = jc.at("hidden_widths").get<std::vector<std::size_t>>();
    c.representation_dim = jc.at("representation_dim");
    c.num_classes = jc.at("num_classes");
    c.projection_hidden = jc.at("projection_hidden");
    c.embedding_dim = jc.at("embedding_dim");
    c.width_multiplier = jc.at("width_multiplier");
    c.use_projection_batchnorm = jc.at("use_projection_batchnorm");
    EncoderParams p = ZerosLike(InitParams(c, 0));
    const auto& jt = doc.at("tensors");
    for (auto& t : p.Tensors()) {
      const auto values = jt.at(t.name).at("values").get<std::vector<double>>();
      Require(values.size() == t.values.size(), ErrorCode::kMalformedFile,
              "tensor " + t.name + " has wrong length");
      for (double v : values)
        Require(std::isfinite(v), ErrorCode::kMalformedFile, "non-finite value in " + t.name);
      std::copy(values.begin(), values.end(), t.values.begin());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedFile, std::string("params document: ") + e.what());
  }
}

}  // namespace cood
