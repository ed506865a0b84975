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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

namespace cood {
namespace {

NetworkConfig SmallConfig(bool bn = true) {
  NetworkConfig c;
  c.input_dim = 3;
  c.hidden_widths = {5, 4};
  c.representation_dim = 4;
  c.num_classes = 3;
  c.projection_hidden = 6;
  c.embedding_dim = 3;
  c.use_projection_batchnorm = bn;
  return c;
}

// y = relu(x W^T + b), recomputed entry by entry.
Matrix DenseOracle(const Matrix& x, const Dense& l, bool relu) {
  Matrix y(x.rows(), l.out_dim());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t o = 0; o < l.out_dim(); ++o) {
      double acc = l.bias[o];
      for (std::size_t i = 0; i < l.in_dim(); ++i) acc += x(r, i) * l.weight(o, i);
      y(r, o) = relu ? std::max(acc, 0.0) : acc;
    }
  return y;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

TEST(InitTest, DeterministicAndHeScaled) {
  const NetworkConfig c = SmallConfig();
  EXPECT_EQ(InitParams(c, 7), InitParams(c, 7));
  EXPECT_NE(InitParams(c, 7), InitParams(c, 8));
  const EncoderParams init = InitParams(c, 7);
  for (const auto& t : init.Tensors())
    if (t.name.ends_with("bias") || t.name.ends_with("shift"))
      for (double v : t.values) EXPECT_EQ(v, 0.0) << t.name;

  NetworkConfig wide;
  wide.input_dim = 64;
  wide.hidden_widths = {64};
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = InitParams(wide, seed);
    for (double v : p.encoder[1].weight.data()) {
      sum_sq += v * v;
      ++count;
    }
  }
  const double std_dev = std::sqrt(sum_sq / static_cast<double>(count));
  EXPECT_NEAR(std_dev, std::sqrt(2.0 / 64.0), 0.2 * std::sqrt(2.0 / 64.0));
}

TEST(InitTest, WidthMultiplierScalesHiddenLayers) {
  NetworkConfig c = SmallConfig();
  c.width_multiplier = 3;
  EXPECT_EQ(c.EncoderWidths(), (std::vector<std::size_t>{15, 12, 4}));
  const auto p = InitParams(c, 1);
  EXPECT_EQ(p.encoder[0].out_dim(), 15u);
  EXPECT_EQ(p.encoder[2].out_dim(), 4u);
}

TEST(InitTest, ZeroHiddenLayersIsSingleMap) {
  NetworkConfig c = SmallConfig();
  c.hidden_widths = {};
  const auto p = InitParams(c, 1);
  ASSERT_EQ(p.encoder.size(), 1u);
  EXPECT_EQ(p.encoder[0].weight.rows(), 4u);
  EXPECT_EQ(p.encoder[0].weight.cols(), 3u);
  EXPECT_EQ(Encode(p, Matrix(2, 3, 0.5)).cols(), 4u);
}

TEST(ConfigTest, RejectsZeroDims) {
  NetworkConfig c = SmallConfig();
  c.representation_dim = 0;
  ExpectCode(ErrorCode::kConfigError, [&] { c.Validate(); });
  c = SmallConfig();
  c.width_multiplier = 0;
  ExpectCode(ErrorCode::kConfigError, [&] { c.Validate(); });
}

TEST(EncodeTest, IdentityAndZeroWeights) {
  NetworkConfig c = SmallConfig();
  c.hidden_widths = {};
  c.input_dim = 4;
  auto p = InitParams(c, 1);
  p.encoder[0].weight = Matrix::Identity(4);
  const Matrix v = Matrix::FromRows({{0.5, 1.0, 0.0, 2.5}});
  EXPECT_EQ(Encode(p, v), v);

  auto z = InitParams(SmallConfig(), 2);
  for (auto& l : z.encoder) {
    l.weight = Matrix(l.weight.rows(), l.weight.cols());
    for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] = i % 2 == 0 ? 0.3 : -0.2;
  }
  const Matrix out = Encode(z, Matrix(3, 3, 1.0));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c2 = 0; c2 < 4; ++c2) EXPECT_EQ(out(r, c2), c2 % 2 == 0 ? 0.3 : 0.0);
  ExpectCode(ErrorCode::kShapeMismatch, [&] { Encode(z, Matrix(2, 5)); });
}

TEST(EncodeTest, MatchesLayerByLayerOracle) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = InitParams(SmallConfig(), seed);
    const Matrix x = oracle::RandomMatrix(6, 3, rng);
    Matrix h = x;
    for (const auto& l : p.encoder) h = DenseOracle(h, l, true);
    EXPECT_LE(MaxAbsDiff(Encode(p, x), h), 1e-12);
    EXPECT_LE(MaxAbsDiff(Classify(p, h), DenseOracle(h, p.classifier, false)), 1e-12);
  }
}

TEST(ClassifyTest, ZeroAndIdentityWeights) {
  NetworkConfig c = SmallConfig();
  c.num_classes = c.representation_dim;
  auto p = InitParams(c, 1);
  p.classifier.weight = Matrix(4, 4);
  const Matrix z = Matrix::FromRows({{1, 2, 3, 4}, {0, -1, 0.5, 2}});
  EXPECT_EQ(Classify(p, z), Matrix(2, 4));
  p.classifier.weight = Matrix::Identity(4);
  EXPECT_EQ(Classify(p, z), z);
  ExpectCode(ErrorCode::kShapeMismatch, [&] { Classify(p, Matrix(2, 3)); });
}

TEST(ProjectTest, ZeroSecondLayerAndBatchNormZeroVariance) {
  auto p = InitParams(SmallConfig(false), 1);
  p.projection_out.weight = Matrix(3, 6);
  std::mt19937_64 rng(1);
  const Matrix z = oracle::RandomMatrix(4, 4, rng, 0.0, 1.0);
  EXPECT_EQ(Project(p, z, true), Matrix(4, 3));

  auto q = InitParams(SmallConfig(true), 1);
  ProjectionTrace trace;
  const Matrix same = Matrix::FromRows({{0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4}});
  Project(q, same, true, &trace);
  for (double v : trace.normalized.data()) EXPECT_EQ(v, 0.0);
  ExpectCode(ErrorCode::kBatchTooSmall, [&] { Project(q, Matrix(1, 4, 0.5), true); });
  EXPECT_NO_THROW(Project(q, Matrix(1, 4, 0.5), false));
}

TEST(ProjectTest, MatchesLayerByLayerOracle) {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = InitParams(SmallConfig(true), seed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (double& v : p.bn_scale) v = u(rng);
    for (double& v : p.bn_shift) v = u(rng) - 1.0;
    const Matrix z = oracle::RandomMatrix(5, 4, rng, 0.0, 2.0);
    Matrix h = DenseOracle(z, p.projection_in, false);
    for (std::size_t c = 0; c < h.cols(); ++c) {
      double mean = 0.0, var = 0.0;
      for (std::size_t r = 0; r < h.rows(); ++r) mean += h(r, c);
      mean /= 5.0;
      for (std::size_t r = 0; r < h.rows(); ++r) var += (h(r, c) - mean) * (h(r, c) - mean);
      var /= 5.0;
      for (std::size_t r = 0; r < h.rows(); ++r)
        h(r, c) = std::max(
            0.0, p.bn_scale[c] * (h(r, c) - mean) / std::sqrt(var + kBatchNormEpsilon) +
                     p.bn_shift[c]);
    }
    const Matrix expected = DenseOracle(h, p.projection_out, false);
    EXPECT_LE(MaxAbsDiff(Project(p, z, true), expected), 1e-10);
  }
}

TEST(BackwardTest, ZeroUpstreamGivesZeroGradients) {
  const auto p = InitParams(SmallConfig(), 1);
  std::mt19937_64 rng(5);
  const Matrix x = oracle::RandomMatrix(4, 3, rng);
  ViewTrace trace;
  const Matrix z = Encode(p, x, &trace.encoder);
  trace.projection.emplace();
  Project(p, z, true, &*trace.projection);
  UpstreamGrads up;
  up.logits = Matrix(4, 3);
  up.embeddings = Matrix(4, 3);
  ParamGrads g = ZerosLike(p);
  Backward(p, trace, up, g);
  EXPECT_EQ(g, ZerosLike(p));
}

TEST(BackwardTest, SquaredErrorProbeMatchesClosedForm) {
  // One encoder layer with positive pre-activations, identity classifier:
  // L = |W x - y|^2 so dL/dW = 2 (W x - y) x^T.
  NetworkConfig c;
  c.input_dim = 3;
  c.hidden_widths = {};
  c.representation_dim = 2;
  c.num_classes = 2;
  auto p = InitParams(c, 1);
  p.encoder[0].weight = Matrix::FromRows({{0.5, 0.2, 0.1}, {0.3, 0.4, 0.6}});
  p.classifier.weight = Matrix::Identity(2);
  const Matrix x = Matrix::FromRows({{1.0, 2.0, 0.5}});
  const Vector y = {0.2, -0.4};
  ViewTrace trace;
  const Matrix z = Encode(p, x, &trace.encoder);
  UpstreamGrads up;
  up.logits = Matrix(1, 2);
  for (int j = 0; j < 2; ++j) (*up.logits)(0, j) = 2.0 * (z(0, j) - y[j]);
  ParamGrads g = ZerosLike(p);
  Backward(p, trace, up, g);
  for (int o = 0; o < 2; ++o) {
    double wx = 0.0;
    for (int i = 0; i < 3; ++i) wx += p.encoder[0].weight(o, i) * x(0, i);
    for (int i = 0; i < 3; ++i)
      EXPECT_NEAR(g.encoder[0].weight(o, i), 2.0 * (wx - y[o]) * x(0, i), 1e-10);
  }
}

TEST(BackwardTest, FullNetMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (bool bn : {false, true}) {
    const Matrix v0 = oracle::RandomMatrix(5, 3, rng), v1 = oracle::RandomMatrix(5, 3, rng);
    // Skip inits where a dead ReLU leaves some embedding row exactly zero.
    std::uint64_t seed = 11;
    auto alive = [&](const EncoderParams& q) {
      for (const Matrix* v : {&v0, &v1}) {
        const Matrix e = Project(q, Encode(q, *v), true);
        for (std::size_t r = 0; r < e.rows(); ++r) {
          double n = 0.0;
          for (double x : e.row(r)) n += x * x;
          if (n == 0.0) return false;
        }
      }
      return true;
    };
    // Nonzero biases keep pre-activations off the ReLU kink at exactly 0.
    auto init = [&](std::uint64_t s) {
      auto q = InitParams(SmallConfig(bn), s);
      std::mt19937_64 brng(s);
      std::uniform_real_distribution<double> u(0.05, 0.2);
      for (auto& t : q.Tensors())
        if (t.name.ends_with("bias"))
          for (double& x : t.values) x = u(brng);
      return q;
    };
    while (!alive(init(seed))) ++seed;
    const auto p = init(seed);
    const std::vector<std::size_t> labels = {0, 1, 2, 1, 0};
    TrainConfig cfg;
    cfg.tau = 0.5;
    cfg.lambda = 3.0;
    cfg.alpha = 0.1;
    const auto r = oracle::CheckGradients(p, v0, v1, labels, cfg, Stage::kJoint);
    EXPECT_LT(r.max_rel_error, 1e-4) << "bn=" << bn;
    EXPECT_GT(r.checked, 100u);
  }
}

TEST(SgdTest, PlainStepAndNoOp) {
  auto p = InitParams(SmallConfig(), 1);
  const auto before = p;
  ParamGrads g = ZerosLike(p);
  for (auto& t : g.Tensors())
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = 0.01 * static_cast<double>(i);
  auto opt = MakeOptimizer(p, 0.0, 0.0);
  SgdMomentumStep(opt, p, g, 0.5);
  const auto pt = p.Tensors();
  const auto bt = before.Tensors();
  const auto gt = g.Tensors();
  for (std::size_t t = 0; t < pt.size(); ++t)
    for (std::size_t i = 0; i < pt[t].values.size(); ++i)
      EXPECT_EQ(pt[t].values[i], bt[t].values[i] - 0.5 * gt[t].values[i]);

  auto q = before;
  auto opt2 = MakeOptimizer(q, 0.9, 0.0);
  SgdMomentumStep(opt2, q, ZerosLike(q), 0.5);
  EXPECT_EQ(q, before);
}

TEST(SgdTest, TwoMomentumStepsMatchHandRecurrence) {
  auto p = InitParams(SmallConfig(), 2);
  const auto p0 = p;
  ParamGrads g = ZerosLike(p);
  for (auto& t : g.Tensors())
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = 0.1 - 0.003 * static_cast<double>(i);
  const double lr = 0.05, m = 0.9, wd = 1e-3;
  auto opt = MakeOptimizer(p, m, wd);
  SgdMomentumStep(opt, p, g, lr);
  SgdMomentumStep(opt, p, g, lr);
  const auto a = p.Tensors();
  const auto b = p0.Tensors();
  const auto gt = g.Tensors();
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].values.size(); ++i) {
      const double x0 = b[t].values[i], gi = gt[t].values[i];
      const double buf1 = gi + wd * x0;
      const double x1 = x0 - lr * buf1;
      const double buf2 = m * buf1 + gi + wd * x1;
      const double x2 = x1 - lr * buf2;
      EXPECT_NEAR(a[t].values[i], x2, 1e-12);
    }
}

TEST(SgdTest, InactiveGroupsUntouchedAndDecayShrinks) {
  auto p = InitParams(SmallConfig(), 3);
  const auto p0 = p;
  auto opt = MakeOptimizer(p, 0.0, 0.1);
  const ParamGroup enc_only[] = {ParamGroup::kEncoder};
  SgdMomentumStep(opt, p, ZerosLike(p), 0.5, enc_only);
  EXPECT_EQ(p.classifier, p0.classifier);
  EXPECT_EQ(p.projection_in, p0.projection_in);
  double prev = 0.0;
  for (double v : p0.encoder[0].weight.data()) prev += v * v;
  for (int step = 0; step < 5; ++step) {
    double cur = 0.0;
    for (double v : p.encoder[0].weight.data()) cur += v * v;
    EXPECT_LT(cur, prev);
    prev = cur;
    SgdMomentumStep(opt, p, ZerosLike(p), 0.5, enc_only);
  }
}

TEST(ScheduleTest, WarmupApexTerminusAndMidpoint) {
  Schedule s{0.4, 10, 110};
  EXPECT_DOUBLE_EQ(LearningRate(s, 0), 0.04);
  EXPECT_DOUBLE_EQ(LearningRate(s, 10), 0.4);
  EXPECT_NEAR(LearningRate(s, 110), 0.0, 1e-17);
  EXPECT_NEAR(LearningRate(s, 60), 0.2, 1e-15);
  for (std::size_t k = 11; k <= 110; ++k) EXPECT_LE(LearningRate(s, k), LearningRate(s, k - 1));
  ExpectCode(ErrorCode::kDomainError, [&] { LearningRate(s, 111); });
}

TEST(SerializeTest, RoundTripIsExact) {
  auto p = InitParams(SmallConfig(true), 9);
  p.bn_scale[0] = 1.0 / 3.0;
  const std::string text = SerializeParams(p);
  const auto q = DeserializeParams(text);
  EXPECT_EQ(p, q);
  EXPECT_EQ(SerializeParams(q), text);
  ExpectCode(ErrorCode::kMalformedFile, [] { DeserializeParams("{\"format\":\"other\"}"); });
  ExpectCode(ErrorCode::kMalformedFile, [] { DeserializeParams("not json"); });
}

}  // namespace
}  // namespace cood
