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

// Experiment driver behind the `cood` commands: config parsing, dataset
// construction, train / eval / clp / ablate / gen-data. Every output is a
// pure function of (config, seed).

#ifndef COOD_EXPERIMENT_HPP_
#define COOD_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cood/clp.hpp"
#include "cood/data.hpp"
#include "cood/density.hpp"
#include "cood/metrics.hpp"
#include "cood/network.hpp"
#include "cood/objectives.hpp"

namespace cood {

// Flat `section.key = value` document. Every key has a default; unknown keys
// are rejected. Lines starting with '#' are comments.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig Parse(const std::string& text);
  static ExperimentConfig Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  const std::string& Get(const std::string& key) const;
  bool Has(const std::string& key) const;

  double GetDouble(const std::string& key) const;
  std::uint64_t GetUnsigned(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  std::vector<double> GetDoubleList(const std::string& key) const;
  std::vector<std::uint64_t> GetUnsignedList(const std::string& key) const;
  std::vector<std::string> GetStringList(const std::string& key) const;
  // "1,2;3,4" -> {{1,2},{3,4}}
  std::vector<Vector> GetVectorList(const std::string& key) const;

  // Sorted key = value lines of every resolved value.
  std::string Canonical() const;
  std::uint64_t Hash() const;

  // Resolves every typed section so errors surface before any work.
  void Validate() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentData {
  Dataset train;
  Dataset test;
  std::optional<Dataset> ood;
};

ExperimentData BuildData(const ExperimentConfig& config);
NetworkConfig NetworkFor(const ExperimentConfig& config, const Dataset& train);
TrainConfig TrainFor(const ExperimentConfig& config, const Dataset& train);
std::vector<std::uint64_t> SeedsFor(const ExperimentConfig& config,
                                    std::optional<std::uint64_t> seed_override);

struct TrainedModel {
  EncoderParams params;
  GaussianBank bank;
  std::vector<EpochRecord> epochs;
};

TrainedModel TrainModel(const ExperimentConfig& config, const Dataset& train, std::uint64_t seed,
                        const EpochCallback& on_epoch = {});

struct EvalResult {
  MetricBlock metrics;
  std::vector<ScoreEntry> inlier;
  std::vector<ScoreEntry> outlier;
  ScoreSet scores;
  std::vector<double> inlier_ranks;
  std::vector<double> outlier_ranks;
};

EvalResult Evaluate(const EncoderParams& params, const GaussianBank& bank, const Dataset& inliers,
                    const Dataset& outliers);

// Pinned CSV layouts, each preceded by a schema line.
std::string MetricsCsv(const std::string& dataset_in, const std::string& dataset_out,
                       const std::string& seed, const MetricBlock& m);
std::string SamplesCsv(const EvalResult& r);
std::string DiagnosticsCsv(const std::vector<EpochRecord>& epochs);

using ProgressCallback = std::function<void(std::uint64_t seed, const EpochRecord&)>;

// `cood train`: params.json, bank.json, diagnostics.csv, run.json and, when
// the data source defines test/OOD sets, metrics.csv and samples.csv. With
// several seeds each run goes to <out>/seed-<n>.
void RunTrain(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
              const std::string& out_dir, const ProgressCallback& progress = {});

// `cood eval`: metrics.csv and samples.csv. Empty paths fall back to the
// config's test / OOD sets.
void RunEval(const ExperimentConfig& config, const std::string& model_dir,
             const std::string& inlier_path, const std::string& outlier_path,
             const std::string& out_dir);

struct ClpReport {
  std::set<std::size_t> inlier_classes;
  std::set<std::size_t> dataset_classes;
  std::size_t ensemble_size = 0;
  double clp = 0.0;
  std::map<std::size_t, double> classwise;
  PredictionMatrix predictions;
  Matrix confusion;
  DistanceMatrix distance;
  MergeTree tree;
};

ClpReport ComputeClpReport(const ExperimentConfig& config, std::uint64_t seed,
                           const ProgressCallback& progress = {});

// `cood clp`: clp_report.json, predictions.csv, confusion.csv, distance.csv,
// merge_tree.json.
void RunClp(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
            const std::string& out_dir, const ProgressCallback& progress = {});

struct AblationRow {
  std::string knob;
  std::string value;
  std::uint64_t seed = 0;
  MetricBlock metrics;
  std::optional<double> rank_dispersion;
};

std::vector<AblationRow> ComputeAblation(const ExperimentConfig& config,
                                         const std::vector<std::uint64_t>& seeds,
                                         const ProgressCallback& progress = {});
std::string AblationCsv(const std::vector<AblationRow>& rows);

// `cood ablate`: ablation.csv.
void RunAblate(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
               const std::string& out_dir, const ProgressCallback& progress = {});

// `cood gen-data`: train/test/ood files, CIFAR binary for 32x32x3 image sets
// and CSV for vector sets.
void RunGenData(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override,
                const std::string& out_dir);

}  // namespace cood

#endif  // COOD_EXPERIMENT_HPP_
