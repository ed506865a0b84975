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

#include "cood/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "cood/error.hpp"
#include "cood/text.hpp"
#include "json.hpp"

namespace cood {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const std::map<std::string, std::string>& Defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"data.kind", "toy"},
      {"data.seed", "0"},
      {"data.n_per_class", "200"},
      {"data.x2_spread", "1"},
      {"data.centers", ""},
      {"data.ood_centers", ""},
      {"data.std", "1"},
      {"data.samples_per_class", "100"},
      {"data.test_samples_per_class", "100"},
      {"data.ood_samples_per_class", "100"},
      {"data.train_files", ""},
      {"data.test_files", ""},
      {"data.ood_files", ""},
      {"data.class_filter", ""},
      {"data.num_classes", "4"},
      {"data.image_size", "32"},
      {"data.noise_std", "0.1"},
      {"data.ood_count", "200"},
      {"network.hidden_widths", "32,32"},
      {"network.representation_dim", "16"},
      {"network.projection_hidden", "32"},
      {"network.embedding_dim", "16"},
      {"network.width_multiplier", "1"},
      {"network.projection_batchnorm", "true"},
      {"train.tau", "1"},
      {"train.lambda", "100"},
      {"train.alpha", "0.01"},
      {"train.stage1_epochs", "10"},
      {"train.stage2_epochs", "10"},
      {"train.batch_size", "64"},
      {"train.contrastive", "true"},
      {"train.stage1_lr", "0.1"},
      {"train.stage2_lr", "0.1"},
      {"train.warmup_fraction", "0.1"},
      {"train.momentum", "0.9"},
      {"train.weight_decay", "1e-6"},
      {"augment.transforms", "auto"},
      {"augment.jitter_std", "0.1"},
      {"augment.scale_lo", "0.9"},
      {"augment.scale_hi", "1.1"},
      {"augment.crop_lo", "0.5"},
      {"augment.crop_hi", "1"},
      {"augment.flip_probability", "0.5"},
      {"augment.brightness_delta", "0.2"},
      {"augment.contrast_delta", "0.2"},
      {"density.epsilon_scale", "1e-6"},
      {"run.seeds", "0"},
      {"run.out", "out"},
      {"ablate.modes", "baseline,ls,ct,ls_ct"},
      {"ablate.lambdas", "0,1,10,100,1000"},
      {"ablate.taus", "0.01,0.1,0.5,1,2"},
      {"ablate.widths", "1,2,3,4"},
      {"clp.inlier_classes", ""},
      {"clp.dataset_classes", "auto"},
      {"clp.members", "5"},
      {"clp.epochs", "20"},
      {"clp.lr", "0.1"},
      {"clp.alpha", "0"},
      {"clp.lambda", "1"},
  };
  return kDefaults;
}

std::vector<std::string> NonEmptyItems(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (Trim(s).empty()) return out;
  for (const auto& item : SplitString(s, sep)) {
    const std::string t = Trim(item);
    Require(!t.empty(), ErrorCode::kConfigError, "empty list item in '" + s + "'");
    out.push_back(t);
  }
  return out;
}

std::set<std::size_t> ToIdSet(const std::vector<std::uint64_t>& v) {
  return {v.begin(), v.end()};
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorCode::kIoError, "cannot create directory " + dir + ": " + ec.message());
}

std::string JoinPath(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// JSON has no infinities; non-finite values are written as strings.
ojson JsonNumber(double v) {
  if (std::isfinite(v)) return v;
  return FormatDouble(v);
}

Matrix Softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double lse = LogSumExp(row);
    for (std::size_t c = 0; c < logits.cols(); ++c) p(r, c) = std::exp(row[c] - lse);
  }
  return p;
}

Dataset BlobSet(const ExperimentConfig& config, const std::string& centers_key,
                const std::string& count_key, const std::string& name, Split split,
                std::uint64_t seed) {
  BlobSpec spec;
  spec.centers = config.GetVectorList(centers_key);
  spec.std = config.GetDouble("data.std");
  spec.samples_per_class = config.GetUnsigned(count_key);
  Dataset d = GaussianBlobs(spec, seed);
  d.name = name;
  d.split = split;
  return d;
}

std::vector<std::string> Files(const ExperimentConfig& config, const std::string& key) {
  return config.GetStringList(key);
}

struct CellSpec {
  std::string knob;
  std::string value;
  ExperimentConfig config;
};

ExperimentConfig WithMode(const ExperimentConfig& base, const std::string& mode) {
  ExperimentConfig c = base;
  const std::string alpha = base.Get("train.alpha");
  if (mode == "baseline") {
    c.Set("train.contrastive", "false");
    c.Set("train.alpha", "0");
  } else if (mode == "ls") {
    c.Set("train.contrastive", "false");
  } else if (mode == "ct") {
    c.Set("train.contrastive", "true");
    c.Set("train.alpha", "0");
  } else if (mode == "ls_ct") {
    c.Set("train.contrastive", "true");
  } else {
    Fail(ErrorCode::kConfigError, "unknown ablation mode '" + mode + "'");
  }
  return c;
}

std::vector<CellSpec> AblationCells(const ExperimentConfig& config) {
  std::vector<CellSpec> cells;
  for (const auto& mode : config.GetStringList("ablate.modes"))
    cells.push_back({"mode", mode, WithMode(config, mode)});
  auto sweep = [&](const std::string& knob, const std::string& grid_key,
                   const std::string& target_key) {
    for (const auto& v : config.GetStringList(grid_key)) {
      ExperimentConfig c = config;
      c.Set(target_key, v);
      cells.push_back({knob, v, std::move(c)});
    }
  };
  sweep("lambda", "ablate.lambdas", "train.lambda");
  sweep("tau", "ablate.taus", "train.tau");
  sweep("width", "ablate.widths", "network.width_multiplier");
  Require(!cells.empty(), ErrorCode::kConfigError, "ablation grids are all empty");
  for (const auto& cell : cells) cell.config.Validate();
  return cells;
}

void WriteRun(const ExperimentConfig& config, std::uint64_t seed, const TrainedModel& model,
              const ExperimentData& data, const std::string& dir, std::string* metrics_rows) {
  EnsureDir(dir);
  WriteFileOrThrow(JoinPath(dir, "params.json"), SerializeParams(model.params));
  WriteFileOrThrow(JoinPath(dir, "bank.json"), SerializeBank(model.bank));
  WriteFileOrThrow(JoinPath(dir, "diagnostics.csv"), DiagnosticsCsv(model.epochs));

  ojson run;
  run["format"] = "cood.run";
  run["version"] = 1;
  std::ostringstream hash;
  hash << std::hex << config.Hash();
  run["config_hash"] = hash.str();
  run["seed"] = seed;
  ojson cfg = ojson::object();
  for (const auto& [k, v] : config.values()) cfg[k] = v;
  run["config"] = cfg;
  ojson epochs = ojson::array();
  for (const auto& e : model.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"stage", e.stage == Stage::kContrastive ? "contrastive" : "joint"},
                      {"contrastive_loss", JsonNumber(e.contrastive_loss)},
                      {"class_loss", JsonNumber(e.class_loss)},
                      {"lr", JsonNumber(e.lr)}});
  }
  run["epochs"] = epochs;

  if (data.ood) {
    const EvalResult r = Evaluate(model.params, model.bank, data.test, *data.ood);
    run["metrics"] = {{"dataset_in", data.test.name},
                      {"dataset_out", data.ood->name},
                      {"auroc", r.metrics.auroc},
                      {"aupr", r.metrics.aupr},
                      {"fpr_at_95_tpr", r.metrics.fpr_at_95_tpr},
                      {"dtacc", r.metrics.detection_accuracy}};
    const std::string csv =
        MetricsCsv(data.test.name, data.ood->name, std::to_string(seed), r.metrics);
    WriteFileOrThrow(JoinPath(dir, "metrics.csv"), csv);
    WriteFileOrThrow(JoinPath(dir, "samples.csv"), SamplesCsv(r));
    if (metrics_rows) *metrics_rows += csv.substr(csv.find('\n', csv.find('\n') + 1) + 1);
  }
  WriteFileOrThrow(JoinPath(dir, "run.json"), run.dump(1) + "\n");
}

constexpr char kMetricsHeader[] =
    "# schema: cood.metrics.v1\n"
    "dataset_in,dataset_out,seed,auroc,aupr,fpr_at_95_tpr,dtacc\n";

}  // namespace

ExperimentConfig::ExperimentConfig() : values_(Defaults()) {}

ExperimentConfig ExperimentConfig::Parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = Trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    Require(eq != std::string::npos, ErrorCode::kConfigError,
            "line " + std::to_string(lineno) + ": expected key = value");
    c.Set(Trim(t.substr(0, eq)), Trim(t.substr(eq + 1)));
  }
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::string& path) {
  return Parse(ReadFileOrThrow(path));
}

void ExperimentConfig::Set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  Require(it != values_.end(), ErrorCode::kConfigError, "unknown config key '" + key + "'");
  it->second = value;
}

const std::string& ExperimentConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  Require(it != values_.end(), ErrorCode::kConfigError, "unknown config key '" + key + "'");
  return it->second;
}

bool ExperimentConfig::Has(const std::string& key) const { return values_.contains(key); }

double ExperimentConfig::GetDouble(const std::string& key) const {
  return ParseDouble(Get(key), key);
}

std::uint64_t ExperimentConfig::GetUnsigned(const std::string& key) const {
  return ParseUnsigned(Get(key), key);
}

bool ExperimentConfig::GetBool(const std::string& key) const { return ParseBool(Get(key), key); }

std::vector<double> ExperimentConfig::GetDoubleList(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : NonEmptyItems(Get(key), ',')) out.push_back(ParseDouble(item, key));
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::GetUnsignedList(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : NonEmptyItems(Get(key), ',')) out.push_back(ParseUnsigned(item, key));
  return out;
}

std::vector<std::string> ExperimentConfig::GetStringList(const std::string& key) const {
  return NonEmptyItems(Get(key), ',');
}

std::vector<Vector> ExperimentConfig::GetVectorList(const std::string& key) const {
  std::vector<Vector> out;
  for (const auto& group : NonEmptyItems(Get(key), ';')) {
    Vector v;
    for (const auto& item : NonEmptyItems(group, ',')) v.push_back(ParseDouble(item, key));
    out.push_back(std::move(v));
  }
  return out;
}

std::string ExperimentConfig::Canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t ExperimentConfig::Hash() const { return Fnv1a64(Canonical()); }

void ExperimentConfig::Validate() const {
  const std::string kind = Get("data.kind");
  Require(kind == "toy" || kind == "blobs" || kind == "cifar" || kind == "color-images",
          ErrorCode::kConfigError, "data.kind must be toy, blobs, cifar or color-images");
  for (const auto& [k, v] : values_) {
    (void)v;
    if (k == "data.kind" || k == "run.out" || k == "clp.dataset_classes" ||
        k == "augment.transforms" || k == "ablate.modes" || k.ends_with("_files"))
      continue;
    if (k == "data.centers" || k == "data.ood_centers") {
      GetVectorList(k);
    } else if (k == "network.projection_batchnorm" || k == "train.contrastive") {
      GetBool(k);
    } else if (k == "network.hidden_widths" || k == "run.seeds" || k == "data.class_filter" ||
               k == "clp.inlier_classes" || k == "ablate.widths") {
      GetUnsignedList(k);
    } else if (k == "ablate.lambdas" || k == "ablate.taus") {
      GetDoubleList(k);
    } else if (k.starts_with("data.") && k != "data.x2_spread" && k != "data.std" &&
               k != "data.noise_std") {
      GetUnsigned(k);
    } else {
      GetDouble(k);
    }
  }
  const std::string dc = Get("clp.dataset_classes");
  if (dc != "auto") GetUnsignedList("clp.dataset_classes");
  for (const auto& m : GetStringList("ablate.modes")) WithMode(*this, m);
  const std::string tx = Get("augment.transforms");
  if (tx != "auto" && tx != "none")
    for (const auto& name : GetStringList("augment.transforms")) ParseTransformKind(name);
  Require(!GetUnsignedList("run.seeds").empty(), ErrorCode::kConfigError,
          "run.seeds must list at least one seed");
  if (kind == "blobs")
    Require(!GetVectorList("data.centers").empty(), ErrorCode::kConfigError,
            "blobs need data.centers");
  if (kind == "cifar")
    Require(!Get("data.train_files").empty(), ErrorCode::kConfigError,
            "cifar needs data.train_files");
}

ExperimentData BuildData(const ExperimentConfig& config) {
  config.Validate();
  const std::string kind = config.Get("data.kind");
  const std::uint64_t seed = config.GetUnsigned("data.seed");
  if (kind == "toy") {
    ToySplits s = ToyTwoClass(config.GetUnsigned("data.n_per_class"),
                              config.GetDouble("data.x2_spread"), seed);
    return {std::move(s.train), std::move(s.test), std::move(s.ood)};
  }
  if (kind == "blobs") {
    ExperimentData d{
        BlobSet(config, "data.centers", "data.samples_per_class", "blobs-train", Split::kTrain,
                DeriveSeed(seed, 11)),
        BlobSet(config, "data.centers", "data.test_samples_per_class", "blobs-test",
                Split::kTest, DeriveSeed(seed, 12)),
        std::nullopt};
    if (!config.GetVectorList("data.ood_centers").empty()) {
      d.ood = BlobSet(config, "data.ood_centers", "data.ood_samples_per_class", "blobs-ood",
                      Split::kTest, DeriveSeed(seed, 13));
      Require(d.ood->dim() == d.train.dim(), ErrorCode::kConfigError,
              "data.ood_centers differ in dimension from data.centers");
    }
    return d;
  }
  if (kind == "color-images") {
    const std::size_t k = config.GetUnsigned("data.num_classes");
    const std::size_t side = config.GetUnsigned("data.image_size");
    const double noise = config.GetDouble("data.noise_std");
    ExperimentData d{
        ColorBlobImages(k, config.GetUnsigned("data.samples_per_class"), side, side, noise,
                        DeriveSeed(seed, 11)),
        ColorBlobImages(k, config.GetUnsigned("data.test_samples_per_class"), side, side, noise,
                        DeriveSeed(seed, 12)),
        GaussianNoiseImages(config.GetUnsigned("data.ood_count"), side, side,
                            DeriveSeed(seed, 13))};
    d.train.name = "color-train";
    d.test.name = "color-test";
    d.test.split = Split::kTest;
    d.ood->name = "gaussian-noise";
    d.ood->split = Split::kTest;
    return d;
  }
  // cifar
  std::optional<std::set<std::size_t>> filter;
  if (!config.GetUnsignedList("data.class_filter").empty())
    filter = ToIdSet(config.GetUnsignedList("data.class_filter"));
  ExperimentData d{LoadCifarBinary(Files(config, "data.train_files"), filter), {}, std::nullopt};
  d.train.split = Split::kTrain;
  const auto test_files = Files(config, "data.test_files");
  d.test = test_files.empty() ? d.train : LoadCifarBinary(test_files, filter);
  d.test.split = Split::kTest;
  d.test.num_classes = std::max(d.test.num_classes, d.train.num_classes);
  const auto ood_files = Files(config, "data.ood_files");
  if (!ood_files.empty()) d.ood = LoadCifarBinary(ood_files);
  return d;
}

NetworkConfig NetworkFor(const ExperimentConfig& config, const Dataset& train) {
  NetworkConfig n;
  n.input_dim = train.dim();
  n.num_classes = std::max<std::size_t>(train.num_classes, 1);
  n.hidden_widths.clear();
  for (auto w : config.GetUnsignedList("network.hidden_widths")) n.hidden_widths.push_back(w);
  n.representation_dim = config.GetUnsigned("network.representation_dim");
  n.projection_hidden = config.GetUnsigned("network.projection_hidden");
  n.embedding_dim = config.GetUnsigned("network.embedding_dim");
  n.width_multiplier = config.GetUnsigned("network.width_multiplier");
  n.use_projection_batchnorm = config.GetBool("network.projection_batchnorm");
  n.Validate();
  return n;
}

TrainConfig TrainFor(const ExperimentConfig& config, const Dataset& train) {
  TrainConfig t;
  t.tau = config.GetDouble("train.tau");
  t.lambda = config.GetDouble("train.lambda");
  t.alpha = config.GetDouble("train.alpha");
  t.stage1_epochs = config.GetUnsigned("train.stage1_epochs");
  t.stage2_epochs = config.GetUnsigned("train.stage2_epochs");
  t.batch_size = config.GetUnsigned("train.batch_size");
  t.use_contrastive = config.GetBool("train.contrastive");
  t.stage1_lr = config.GetDouble("train.stage1_lr");
  t.stage2_lr = config.GetDouble("train.stage2_lr");
  t.warmup_fraction = config.GetDouble("train.warmup_fraction");
  t.momentum = config.GetDouble("train.momentum");
  t.weight_decay = config.GetDouble("train.weight_decay");

  std::vector<std::string> names;
  const std::string tx = config.Get("augment.transforms");
  if (tx == "auto") {
    if (train.image_shape)
      names = {"crop_resize", "horizontal_flip", "color_distort"};
    else
      names = {"vector_jitter"};
  } else if (tx != "none") {
    names = config.GetStringList("augment.transforms");
  }
  for (const auto& name : names) {
    TransformSpec s;
    s.kind = ParseTransformKind(name);
    s.jitter_std = config.GetDouble("augment.jitter_std");
    s.scale_lo = config.GetDouble("augment.scale_lo");
    s.scale_hi = config.GetDouble("augment.scale_hi");
    s.crop_lo = config.GetDouble("augment.crop_lo");
    s.crop_hi = config.GetDouble("augment.crop_hi");
    s.flip_probability = config.GetDouble("augment.flip_probability");
    s.brightness_delta = config.GetDouble("augment.brightness_delta");
    s.contrast_delta = config.GetDouble("augment.contrast_delta");
    s.Validate();
    Require(IsImageKind(s.kind) == train.image_shape.has_value(), ErrorCode::kConfigError,
            "transform '" + name + "' does not fit the dataset's input kind");
    t.transforms.push_back(s);
  }
  t.Validate();
  return t;
}

std::vector<std::uint64_t> SeedsFor(const ExperimentConfig& config,
                                    std::optional<std::uint64_t> seed_override) {
  if (seed_override) return {*seed_override};
  return config.GetUnsignedList("run.seeds");
}

TrainedModel TrainModel(const ExperimentConfig& config, const Dataset& train, std::uint64_t seed,
                        const EpochCallback& on_epoch) {
  const NetworkConfig net = NetworkFor(config, train);
  const TrainConfig tc = TrainFor(config, train);
  TrainedModel m;
  m.params = TrainTwoStage(train, net, tc, seed, [&](const EpochRecord& r) {
    m.epochs.push_back(r);
    if (on_epoch) on_epoch(r);
  });
  const Matrix z = Encode(m.params, train.inputs, nullptr);
  m.bank = FitBankFromLabeled(z, train.labels, net.num_classes,
                              config.GetDouble("density.epsilon_scale"));
  return m;
}

EvalResult Evaluate(const EncoderParams& params, const GaussianBank& bank, const Dataset& inliers,
                    const Dataset& outliers) {
  const std::size_t in_dim = params.config.input_dim;
  Require(inliers.size() == 0 || inliers.dim() == in_dim, ErrorCode::kIncompatibleModel,
          "inlier dim " + std::to_string(inliers.dim()) + " does not match model input " +
              std::to_string(in_dim));
  Require(outliers.size() == 0 || outliers.dim() == in_dim, ErrorCode::kIncompatibleModel,
          "outlier dim " + std::to_string(outliers.dim()) + " does not match model input " +
              std::to_string(in_dim));
  Require(bank.dim == params.config.representation_dim, ErrorCode::kIncompatibleModel,
          "bank dimension does not match the encoder");
  Require(inliers.size() > 0 && outliers.size() > 0, ErrorCode::kEmptySide,
          "both inlier and outlier sets must be non-empty");
  EvalResult r;
  r.inlier = ScoreBatch(bank, Encode(params, inliers.inputs, nullptr));
  r.outlier = ScoreBatch(bank, Encode(params, outliers.inputs, nullptr));
  for (const auto& e : r.inlier) r.scores.inlier_scores.push_back(e.score);
  for (const auto& e : r.outlier) r.scores.outlier_scores.push_back(e.score);
  r.metrics = ComputeMetrics(r.scores);
  for (const auto& e : r.inlier) r.inlier_ranks.push_back(OodRank(r.scores.inlier_scores, e.score));
  for (const auto& e : r.outlier)
    r.outlier_ranks.push_back(OodRank(r.scores.inlier_scores, e.score));
  return r;
}

std::string MetricsCsv(const std::string& dataset_in, const std::string& dataset_out,
                       const std::string& seed, const MetricBlock& m) {
  return std::string(kMetricsHeader) + dataset_in + "," + dataset_out + "," + seed + "," +
         FormatDouble(m.auroc) + "," + FormatDouble(m.aupr) + "," +
         FormatDouble(m.fpr_at_95_tpr) + "," + FormatDouble(m.detection_accuracy) + "\n";
}

std::string SamplesCsv(const EvalResult& r) {
  std::string out = "# schema: cood.samples.v1\nset,index,score,ood_rank,best_class\n";
  auto rows = [&](const char* set, const std::vector<ScoreEntry>& e,
                  const std::vector<double>& ranks) {
    for (std::size_t i = 0; i < e.size(); ++i)
      out += std::string(set) + "," + std::to_string(i) + "," + FormatDouble(e[i].score) +
             "," + FormatDouble(ranks[i]) + "," + std::to_string(e[i].best_class) + "\n";
  };
  rows("inlier", r.inlier, r.inlier_ranks);
  rows("outlier", r.outlier, r.outlier_ranks);
  return out;
}

std::string DiagnosticsCsv(const std::vector<EpochRecord>& epochs) {
  std::string out =
      "# schema: cood.diagnostics.v1\nepoch,stage,contrastive_loss,class_loss,lr\n";
  for (const auto& e : epochs)
    out += std::to_string(e.epoch) + "," +
           (e.stage == Stage::kContrastive ? "contrastive" : "joint") + "," +
           FormatDouble(e.contrastive_loss) + "," + FormatDouble(e.class_loss) + "," +
           FormatDouble(e.lr) + "\n";
  return out;
}

void RunTrain(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
              const std::string& out_dir, const ProgressCallback& progress) {
  const ExperimentData data = BuildData(config);
  const auto seeds = SeedsFor(config, seed_override);
  EnsureDir(out_dir);
  std::string metrics_rows;
  for (std::uint64_t seed : seeds) {
    const TrainedModel model = TrainModel(config, data.train, seed, [&](const EpochRecord& r) {
      if (progress) progress(seed, r);
    });
    const std::string dir =
        seeds.size() == 1 ? out_dir : JoinPath(out_dir, "seed-" + std::to_string(seed));
    WriteRun(config, seed, model, data, dir, &metrics_rows);
  }
  if (seeds.size() > 1 && data.ood)
    WriteFileOrThrow(JoinPath(out_dir, "metrics.csv"), kMetricsHeader + metrics_rows);
}

void RunEval(const ExperimentConfig& config, const std::string& model_dir,
             const std::string& inlier_path, const std::string& outlier_path,
             const std::string& out_dir) {
  const EncoderParams params = DeserializeParams(ReadFileOrThrow(JoinPath(model_dir, "params.json")));
  const GaussianBank bank = DeserializeBank(ReadFileOrThrow(JoinPath(model_dir, "bank.json")));
  std::optional<ExperimentData> built;
  auto data = [&]() -> const ExperimentData& {
    if (!built) built = BuildData(config);
    return *built;
  };
  const Dataset inliers = inlier_path.empty() ? data().test : LoadDatasetFile(inlier_path);
  Dataset outliers;
  if (outlier_path.empty()) {
    Require(data().ood.has_value(), ErrorCode::kConfigError,
            "no outlier set: pass --outlier or configure one");
    outliers = *data().ood;
  } else {
    outliers = LoadDatasetFile(outlier_path);
  }
  const EvalResult r = Evaluate(params, bank, inliers, outliers);
  std::string seed = "";
  const std::string run_path = JoinPath(model_dir, "run.json");
  if (fs::exists(run_path)) {
    try {
      seed = std::to_string(nlohmann::json::parse(ReadFileOrThrow(run_path)).at("seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception&) {
      Fail(ErrorCode::kMalformedFile, run_path + ": unreadable run record");
    }
  }
  EnsureDir(out_dir);
  WriteFileOrThrow(JoinPath(out_dir, "metrics.csv"),
                   MetricsCsv(inliers.name, outliers.name, seed, r.metrics));
  WriteFileOrThrow(JoinPath(out_dir, "samples.csv"), SamplesCsv(r));
}

ClpReport ComputeClpReport(const ExperimentConfig& config, std::uint64_t seed,
                           const ProgressCallback& progress) {
  ExperimentData data = BuildData(config);
  const std::size_t k = data.train.num_classes;
  ClpReport rep;
  rep.inlier_classes = ToIdSet(config.GetUnsignedList("clp.inlier_classes"));
  Require(!rep.inlier_classes.empty(), ErrorCode::kConfigError, "clp.inlier_classes is empty");
  for (std::size_t c : rep.inlier_classes)
    Require(c < k, ErrorCode::kConfigError,
            "inlier class " + std::to_string(c) + " outside the joint label set");
  if (config.Get("clp.dataset_classes") == "auto") {
    for (std::size_t c = 0; c < k; ++c)
      if (!rep.inlier_classes.contains(c)) rep.dataset_classes.insert(c);
    if (rep.dataset_classes.empty())
      for (std::size_t c = 0; c < k; ++c) rep.dataset_classes.insert(c);
  } else {
    rep.dataset_classes = ToIdSet(config.GetUnsignedList("clp.dataset_classes"));
    for (std::size_t c : rep.dataset_classes)
      Require(c < k, ErrorCode::kConfigError,
              "dataset class " + std::to_string(c) + " outside the joint label set");
  }
  rep.ensemble_size = config.GetUnsigned("clp.members");
  Require(rep.ensemble_size >= 1, ErrorCode::kConfigError, "clp.members must be >= 1");

  ExperimentConfig member = config;
  member.Set("train.contrastive", "false");
  member.Set("train.alpha", config.Get("clp.alpha"));
  member.Set("train.lambda", config.Get("clp.lambda"));
  member.Set("train.stage2_epochs", config.Get("clp.epochs"));
  member.Set("train.stage2_lr", config.Get("clp.lr"));

  std::vector<std::size_t> subset;
  for (std::size_t i = 0; i < data.test.size(); ++i)
    if (rep.dataset_classes.contains(data.test.labels[i])) subset.push_back(i);
  Require(!subset.empty(), ErrorCode::kEmptyDataset, "no test samples in the CLP dataset classes");
  const Dataset clp_set = data.test.Subset(subset);

  std::vector<Matrix> full_probs, clp_probs;
  for (std::size_t m = 0; m < rep.ensemble_size; ++m) {
    const std::uint64_t member_seed = DeriveSeed(seed, 100 + m);
    const NetworkConfig net = NetworkFor(member, data.train);
    const TrainConfig tc = TrainFor(member, data.train);
    const EncoderParams params =
        TrainTwoStage(data.train, net, tc, member_seed, [&](const EpochRecord& r) {
          if (progress) progress(member_seed, r);
        });
    full_probs.push_back(Softmax(Classify(params, Encode(params, data.test.inputs, nullptr))));
    clp_probs.push_back(Softmax(Classify(params, Encode(params, clp_set.inputs, nullptr))));
  }
  rep.predictions = EnsembleAverage(clp_probs);
  rep.predictions.labels = clp_set.labels;
  rep.clp = Clp(rep.predictions, rep.inlier_classes);
  rep.classwise = ClasswiseClp(rep.predictions, rep.inlier_classes);

  PredictionMatrix full = EnsembleAverage(full_probs);
  full.labels = data.test.labels;
  rep.confusion = PairwiseConfusion(full);
  rep.distance = ConfusionDistance(rep.confusion);
  for (std::size_t i = 0; i < k; ++i) rep.distance.d(i, i) = 0.0;
  rep.tree = AverageLinkage(rep.distance.d);
  return rep;
}

namespace {

std::string MatrixCsv(const char* schema, const Matrix& m) {
  std::string out = std::string("# schema: ") + schema + "\nclass";
  for (std::size_t c = 0; c < m.cols(); ++c) out += "," + std::to_string(c);
  out += "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += std::to_string(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out += "," + FormatDouble(m(r, c));
    out += "\n";
  }
  return out;
}

}  // namespace

void RunClp(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
            const std::string& out_dir, const ProgressCallback& progress) {
  const auto seeds = SeedsFor(config, seed_override);
  const std::uint64_t seed = seeds.front();
  const ClpReport rep = ComputeClpReport(config, seed, progress);
  EnsureDir(out_dir);
  ojson doc;
  doc["format"] = "cood.clp_report";
  doc["version"] = 1;
  doc["seed"] = seed;
  doc["ensemble_size"] = rep.ensemble_size;
  doc["inlier_classes"] = rep.inlier_classes;
  doc["dataset_classes"] = rep.dataset_classes;
  doc["clp"] = JsonNumber(rep.clp);
  ojson cw = ojson::object();
  for (const auto& [c, v] : rep.classwise) cw[std::to_string(c)] = JsonNumber(v);
  doc["classwise_clp"] = cw;
  doc["distance_cap"] = rep.distance.cap;
  ojson capped = ojson::array();
  for (const auto& [i, j] : rep.distance.capped) capped.push_back({i, j});
  doc["capped_pairs"] = capped;
  WriteFileOrThrow(JoinPath(out_dir, "clp_report.json"), doc.dump(1) + "\n");
  WriteFileOrThrow(JoinPath(out_dir, "predictions.csv"), PredictionsToCsv(rep.predictions));
  WriteFileOrThrow(JoinPath(out_dir, "confusion.csv"), MatrixCsv("cood.confusion.v1", rep.confusion));
  WriteFileOrThrow(JoinPath(out_dir, "distance.csv"), MatrixCsv("cood.distance.v1", rep.distance.d));
  WriteFileOrThrow(JoinPath(out_dir, "merge_tree.json"), SerializeMergeTree(rep.tree));
}

std::vector<AblationRow> ComputeAblation(const ExperimentConfig& config,
                                         const std::vector<std::uint64_t>& seeds,
                                         const ProgressCallback& progress) {
  Require(!seeds.empty(), ErrorCode::kConfigError, "ablation needs at least one seed");
  const ExperimentData data = BuildData(config);
  Require(data.ood.has_value(), ErrorCode::kConfigError, "ablation needs an outlier set");
  std::vector<AblationRow> rows;
  for (const auto& cell : AblationCells(config)) {
    std::vector<std::vector<double>> ranks;
    const std::size_t first = rows.size();
    for (std::uint64_t seed : seeds) {
      const TrainedModel model = TrainModel(cell.config, data.train, seed, [&](const EpochRecord& r) {
        if (progress) progress(seed, r);
      });
      const EvalResult r = Evaluate(model.params, model.bank, data.test, *data.ood);
      rows.push_back({cell.knob, cell.value, seed, r.metrics, std::nullopt});
      ranks.push_back(r.outlier_ranks);
    }
    if (ranks.size() >= 2) {
      const double disp = RankDispersion(ranks);
      for (std::size_t i = first; i < rows.size(); ++i) rows[i].rank_dispersion = disp;
    }
  }
  return rows;
}

std::string AblationCsv(const std::vector<AblationRow>& rows) {
  std::string out =
      "# schema: cood.ablation.v1\n"
      "knob,value,seed,auroc,aupr,fpr_at_95_tpr,dtacc,rank_dispersion\n";
  for (const auto& r : rows)
    out += r.knob + "," + r.value + "," + std::to_string(r.seed) + "," +
           FormatDouble(r.metrics.auroc) + "," + FormatDouble(r.metrics.aupr) + "," +
           FormatDouble(r.metrics.fpr_at_95_tpr) + "," +
           FormatDouble(r.metrics.detection_accuracy) + "," +
           (r.rank_dispersion ? FormatDouble(*r.rank_dispersion) : "") + "\n";
  return out;
}

void RunAblate(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
               const std::string& out_dir, const ProgressCallback& progress) {
  const auto rows = ComputeAblation(config, SeedsFor(config, seed_override), progress);
  EnsureDir(out_dir);
  WriteFileOrThrow(JoinPath(out_dir, "ablation.csv"), AblationCsv(rows));
}

void RunGenData(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
                const std::string& out_dir) {
  ExperimentConfig c = config;
  if (seed_override) c.Set("data.seed", std::to_string(*seed_override));
  const ExperimentData data = BuildData(c);
  EnsureDir(out_dir);
  auto write = [&](const Dataset& d, const std::string& stem) {
    const bool cifar = d.image_shape && *d.image_shape == ImageShape{32, 32, 3};
    if (cifar)
      WriteCifarBinary(d, JoinPath(out_dir, stem + ".bin"));
    else
      WriteCsvDataset(d, JoinPath(out_dir, stem + ".csv"));
  };
  write(data.train, "train");
  write(data.test, "test");
  if (data.ood) write(*data.ood, "ood");
}

}  // namespace cood
