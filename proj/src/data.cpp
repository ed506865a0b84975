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

#include "cood/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "cood/error.hpp"
#include "cood/text.hpp"

namespace cood {
namespace {

constexpr char kCsvDatasetSchema[] = "# schema: cood.dataset.v1";

Dataset MakeEmpty(std::string name, Split split, std::size_t dim) {
  Dataset d;
  d.name = std::move(name);
  d.split = split;
  d.inputs = Matrix(0, dim);
  return d;
}

}  // namespace

void Dataset::Validate() const {
  Require(inputs.rows() == labels.size(), ErrorCode::kShapeMismatch,
          "dataset " + name + ": inputs and labels differ in length");
  for (std::size_t l : labels)
    Require(l < num_classes, ErrorCode::kLabelOutOfRange,
            "dataset " + name + ": label " + std::to_string(l) + " >= class count");
  if (image_shape)
    Require(image_shape->pixels() == inputs.cols(), ErrorCode::kShapeMismatch,
            "dataset " + name + ": image shape does not match input width");
}

std::vector<std::size_t> Dataset::IndicesOf(std::size_t label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

Dataset Dataset::Subset(const std::vector<std::size_t>& indices) const {
  Dataset d;
  d.name = name;
  d.split = split;
  d.num_classes = num_classes;
  d.class_names = class_names;
  d.image_shape = image_shape;
  d.inputs = Matrix(indices.size(), inputs.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = inputs.row(indices[r]);
    std::copy(src.begin(), src.end(), d.inputs.row(r).begin());
    d.labels.push_back(labels[indices[r]]);
  }
  return d;
}

ToySplits ToyTwoClass(std::size_t n_per_class, double x2_spread, std::uint64_t seed) {
  Require(n_per_class >= 10, ErrorCode::kConfigError, "toy task needs n_per_class >= 10");
  Require(x2_spread > 0.0, ErrorCode::kConfigError, "x2_spread must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> x1_noise(0.0, 0.15);
  std::uniform_real_distribution<double> x2_dist(-x2_spread, x2_spread);
  std::bernoulli_distribution sign(0.5);

  auto make = [&](const char* name, Split split) {
    Dataset d = MakeEmpty(name, split, 2);
    d.num_classes = 2;
    d.class_names = {"left", "right"};
    d.inputs = Matrix(2 * n_per_class, 2);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
      const std::size_t label = i % 2;
      d.inputs(i, 0) = (label == 0 ? -1.0 : 1.0) + x1_noise(rng);
      d.inputs(i, 1) = x2_dist(rng);
      d.labels.push_back(label);
    }
    return d;
  };

  ToySplits s;
  s.train = make("toy-train", Split::kTrain);
  s.test = make("toy-test", Split::kTest);
  s.ood = s.test;
  s.ood.name = "toy-ood";
  for (std::size_t i = 0; i < s.ood.size(); ++i)
    s.ood.inputs(i, 1) = (sign(rng) ? 2.0 : -2.0) * x2_spread;
  return s;
}

void BlobSpec::Validate() const {
  Require(!centers.empty(), ErrorCode::kConfigError, "blob spec needs at least one center");
  const std::size_t d = dim == 0 ? centers.front().size() : dim;
  Require(d >= 1, ErrorCode::kConfigError, "blob dimension must be >= 1");
  for (const auto& c : centers)
    Require(c.size() == d, ErrorCode::kConfigError, "blob centers differ in dimension");
  Require(std > 0.0, ErrorCode::kConfigError, "blob std must be positive");
  Require(samples_per_class >= 1, ErrorCode::kConfigError, "samples_per_class must be >= 1");
}

Dataset GaussianBlobs(const BlobSpec& spec, std::uint64_t seed) {
  spec.Validate();
  const std::size_t dim = spec.centers.front().size();
  const std::size_t k = spec.centers.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spec.std);
  Dataset d = MakeEmpty("blobs", Split::kTrain, dim);
  d.num_classes = k;
  d.inputs = Matrix(k * spec.samples_per_class, dim);
  for (std::size_t i = 0; i < k * spec.samples_per_class; ++i) {
    const std::size_t label = i % k;
    for (std::size_t j = 0; j < dim; ++j) d.inputs(i, j) = spec.centers[label][j] + noise(rng);
    d.labels.push_back(label);
  }
  return d;
}

Dataset GaussianNoiseImages(std::size_t count, std::size_t height, std::size_t width,
                            std::uint64_t seed) {
  Require(count >= 1, ErrorCode::kConfigError, "noise dataset needs count >= 1");
  const ImageShape shape{height, width, 3};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> pixel(0.5, 0.25);
  Dataset d = MakeEmpty("gaussian-noise", Split::kTest, shape.pixels());
  d.num_classes = 1;
  d.image_shape = shape;
  d.inputs = Matrix(count, shape.pixels());
  for (double& v : d.inputs.data()) v = std::clamp(pixel(rng), 0.0, 1.0);
  d.labels.assign(count, 0);
  return d;
}

Dataset ColorBlobImages(std::size_t num_classes, std::size_t per_class, std::size_t height,
                        std::size_t width, double noise_std, std::uint64_t seed) {
  Require(num_classes >= 1 && per_class >= 1, ErrorCode::kConfigError,
          "colour blob images need classes and samples");
  const ImageShape shape{height, width, 3};
  const std::size_t plane = height * width;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(0.2, 0.8);
  std::normal_distribution<double> noise(0.0, noise_std);
  std::vector<std::array<double, 3>> colors(num_classes);
  for (auto& c : colors)
    for (double& v : c) v = base(rng);
  Dataset d = MakeEmpty("color-blobs", Split::kTrain, shape.pixels());
  d.num_classes = num_classes;
  d.image_shape = shape;
  d.inputs = Matrix(num_classes * per_class, shape.pixels());
  for (std::size_t i = 0; i < num_classes * per_class; ++i) {
    const std::size_t label = i % num_classes;
    auto row = d.inputs.row(i);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < plane; ++p)
        row[c * plane + p] = std::clamp(colors[label][c] + noise(rng), 0.0, 1.0);
    d.labels.push_back(label);
  }
  return d;
}

Dataset LoadCifarBinary(const std::vector<std::string>& paths,
                        const std::optional<std::set<std::size_t>>& class_filter) {
  std::vector<std::size_t> raw_labels;
  std::vector<double> pixels;
  for (const auto& path : paths) {
    const std::string bytes = ReadFileOrThrow(path);
    const std::size_t whole = bytes.size() / kCifarRecordBytes;
    if (bytes.size() % kCifarRecordBytes != 0) {
      Fail(ErrorCode::kMalformedFile, path + ": truncated record at offset " +
                                          std::to_string(whole * kCifarRecordBytes));
    }
    for (std::size_t r = 0; r < whole; ++r) {
      const auto* rec = reinterpret_cast<const unsigned char*>(bytes.data()) + r * kCifarRecordBytes;
      const std::size_t label = rec[0];
      if (class_filter && !class_filter->contains(label)) continue;
      raw_labels.push_back(label);
      for (std::size_t p = 0; p < kCifarImageBytes; ++p) pixels.push_back(rec[1 + p] / 255.0);
    }
  }
  Dataset d;
  d.name = paths.size() == 1 ? paths.front() : "cifar";
  d.split = Split::kTest;
  d.image_shape = ImageShape{32, 32, 3};
  d.inputs = Matrix(raw_labels.size(), kCifarImageBytes, std::move(pixels));
  if (class_filter) {
    Require(!raw_labels.empty(), ErrorCode::kEmptyAfterFilter,
            "no records left after class filter");
    std::map<std::size_t, std::size_t> remap;
    for (std::size_t id : *class_filter) remap.emplace(id, remap.size());
    for (std::size_t l : raw_labels) d.labels.push_back(remap.at(l));
    d.num_classes = remap.size();
    for (const auto& [orig, _] : remap) d.class_names.push_back(std::to_string(orig));
  } else {
    d.labels = std::move(raw_labels);
    std::size_t max_label = 0;
    for (std::size_t l : d.labels) max_label = std::max(max_label, l);
    d.num_classes = d.labels.empty() ? 0 : max_label + 1;
  }
  return d;
}

std::string EncodeCifarBinary(const Dataset& dataset) {
  Require(dataset.image_shape && *dataset.image_shape == ImageShape{32, 32, 3},
          ErrorCode::kIncompatibleInput, "CIFAR binary export needs 32x32x3 images");
  std::string out;
  out.reserve(dataset.size() * kCifarRecordBytes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    Require(dataset.labels[i] < 256, ErrorCode::kLabelOutOfRange,
            "CIFAR labels must fit in one byte");
    out.push_back(static_cast<char>(dataset.labels[i]));
    for (double v : dataset.inputs.row(i)) {
      const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
    }
  }
  return out;
}

void WriteCifarBinary(const Dataset& dataset, const std::string& path) {
  WriteFileOrThrow(path, EncodeCifarBinary(dataset));
}

void WriteCsvDataset(const Dataset& dataset, const std::string& path) {
  Require(!dataset.image_shape, ErrorCode::kIncompatibleInput,
          "CSV export is for flat-vector datasets");
  std::string out = std::string(kCsvDatasetSchema) + "\n";
  out += "label";
  for (std::size_t j = 0; j < dataset.dim(); ++j) out += ",x" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out += std::to_string(dataset.labels[i]);
    for (double v : dataset.inputs.row(i)) out += "," + FormatDouble(v);
    out += "\n";
  }
  WriteFileOrThrow(path, out);
}

Dataset LoadCsvDataset(const std::string& path) {
  std::istringstream in(ReadFileOrThrow(path));
  std::string line;
  Dataset d;
  d.name = path;
  d.split = Split::kTest;
  std::size_t dim = 0;
  bool header_seen = false;
  std::vector<double> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = SplitString(line, ',');
    if (!header_seen) {
      Require(!fields.empty() && fields.front() == "label", ErrorCode::kMalformedFile,
              path + ": missing header row");
      dim = fields.size() - 1;
      header_seen = true;
      continue;
    }
    Require(fields.size() == dim + 1, ErrorCode::kMalformedFile,
            path + ": wrong field count on line " + std::to_string(line_no));
    d.labels.push_back(static_cast<std::size_t>(ParseUnsigned(fields[0], path)));
    for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(ParseDouble(fields[j], path));
  }
  Require(header_seen, ErrorCode::kMalformedFile, path + ": empty dataset file");
  d.inputs = Matrix(d.labels.size(), dim, std::move(values));
  std::size_t max_label = 0;
  for (std::size_t l : d.labels) max_label = std::max(max_label, l);
  d.num_classes = d.labels.empty() ? 0 : max_label + 1;
  return d;
}

Dataset LoadDatasetFile(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return LoadCsvDataset(path);
  return LoadCifarBinary({path});
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<std::vector<std::size_t>> Batches(std::size_t n, std::size_t batch_size,
                                              std::uint64_t seed, bool drop_last) {
  Require(batch_size >= 1, ErrorCode::kConfigError, "batch size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    if (drop_last && end - start < batch_size) break;
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace cood
