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

#ifndef COOD_DATA_HPP_
#define COOD_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cood/linalg.hpp"

namespace cood {

// Images are stored channel-major (all of channel 0, then channel 1, ...),
// row-major within a channel. This is the CIFAR binary layout.
struct ImageShape {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;

  std::size_t pixels() const { return height * width * channels; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

enum class Split { kTrain, kTest };

struct Dataset {
  std::string name;
  Split split = Split::kTrain;
  Matrix inputs;  // one sample per row
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;
  std::optional<ImageShape> image_shape;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return inputs.cols(); }
  void Validate() const;
  // Rows whose label equals `label`.
  std::vector<std::size_t> IndicesOf(std::size_t label) const;
  Dataset Subset(const std::vector<std::size_t>& indices) const;
};

struct ToySplits {
  Dataset train;
  Dataset test;
  Dataset ood;
};

// Two classes separable by x1 alone (centers -1 and +1, std 0.15); x2 is
// uniform in [-spread, spread] and carries no label information. The OOD set
// reuses the test x1 values with x2 moved to +-2*spread.
ToySplits ToyTwoClass(std::size_t n_per_class, double x2_spread, std::uint64_t seed);

struct BlobSpec {
  std::vector<Vector> centers;
  double std = 1.0;
  std::size_t samples_per_class = 100;
  std::size_t dim = 0;  // 0 means "take from centers"

  void Validate() const;
};

Dataset GaussianBlobs(const BlobSpec& spec, std::uint64_t seed);

// Pixels iid Normal(0.5, 0.25) clamped to [0, 1]; every label is 0.
Dataset GaussianNoiseImages(std::size_t count, std::size_t height, std::size_t width,
                            std::uint64_t seed);

// Per-class random base colour plus iid pixel noise, clamped to [0, 1]. A
// small labelled image set for exercising the image pipeline.
Dataset ColorBlobImages(std::size_t num_classes, std::size_t per_class, std::size_t height,
                        std::size_t width, double noise_std, std::uint64_t seed);

inline constexpr std::size_t kCifarImageBytes = 3072;
inline constexpr std::size_t kCifarRecordBytes = kCifarImageBytes + 1;

// Reads 3073-byte records (label byte + 3072 channel-major pixel bytes).
// With a class filter, only listed labels are kept and relabelled to
// contiguous ids in ascending order of the original label.
Dataset LoadCifarBinary(const std::vector<std::string>& paths,
                        const std::optional<std::set<std::size_t>>& class_filter = std::nullopt);

// Pixels are quantized as round(v * 255). Requires 32x32x3 images and labels < 256.
void WriteCifarBinary(const Dataset& dataset, const std::string& path);
std::string EncodeCifarBinary(const Dataset& dataset);

// Flat-vector datasets as CSV: a schema line, a header, then label,x0,x1,...
void WriteCsvDataset(const Dataset& dataset, const std::string& path);
Dataset LoadCsvDataset(const std::string& path);

// Dispatches on extension: ".csv" -> CSV, anything else -> CIFAR binary.
Dataset LoadDatasetFile(const std::string& path);

// Independent, reproducible seed for sub-stream `stream` of `seed`
// (splitmix64 finalizer over the pair).
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

// Seeded shuffle of [0, n) cut into batches; the short tail is dropped when
// drop_last is set.
std::vector<std::vector<std::size_t>> Batches(std::size_t n, std::size_t batch_size,
                                              std::uint64_t seed, bool drop_last);

}  // namespace cood

#endif  // COOD_DATA_HPP_
