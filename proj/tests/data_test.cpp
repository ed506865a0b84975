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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "test_util.hpp"

namespace cood {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cood_data_test";
  fs::create_directories(dir);
  return dir / name;
}

void WriteBytes(const fs::path& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

std::string Record(unsigned char label, unsigned char fill) {
  std::string r(kCifarRecordBytes, static_cast<char>(fill));
  r[0] = static_cast<char>(label);
  return r;
}

TEST(ToyTwoClassTest, ConstructionAndDeterminism) {
  const ToySplits s = ToyTwoClass(50, 1.0, 3);
  EXPECT_EQ(s.train.size(), 100u);
  EXPECT_EQ(s.train.num_classes, 2u);
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    EXPECT_LE(std::abs(s.train.inputs(i, 1)), 1.0);
    EXPECT_EQ(std::abs(s.ood.inputs(i, 1)), 2.0);
    EXPECT_EQ(s.ood.inputs(i, 0), s.test.inputs(i, 0));
  }
  const ToySplits again = ToyTwoClass(50, 1.0, 3);
  EXPECT_EQ(again.train.inputs, s.train.inputs);
  EXPECT_EQ(again.ood.inputs, s.ood.inputs);
  EXPECT_NE(ToyTwoClass(50, 1.0, 4).train.inputs, s.train.inputs);
  ExpectCode(ErrorCode::kConfigError, [] { ToyTwoClass(5, 1.0, 0); });
}

TEST(GaussianBlobsTest, TinyStdSingleClassAndSeparation) {
  BlobSpec tight;
  tight.centers = {{1, 2}, {-3, 4}};
  tight.std = 1e-6;
  const Dataset t = GaussianBlobs(tight, 0);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_NEAR(t.inputs(i, j), tight.centers[t.labels[i]][j], 1e-4);

  BlobSpec one;
  one.centers = {{0, 0, 0}};
  for (std::size_t l : GaussianBlobs(one, 1).labels) EXPECT_EQ(l, 0u);

  BlobSpec four;
  four.centers = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  four.samples_per_class = 2500;
  const Dataset d = GaussianBlobs(four, 2);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < 4; ++c) {
      const double dx = d.inputs(i, 0) - four.centers[c][0], dy = d.inputs(i, 1) - four.centers[c][1];
      if (dx * dx + dy * dy < best_d) best_d = dx * dx + dy * dy, best = c;
    }
    correct += best == d.labels[i];
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(d.size()), 0.999);
  BlobSpec bad;
  bad.centers = {{0, 0}, {1}};
  ExpectCode(ErrorCode::kConfigError, [&] { GaussianBlobs(bad, 0); });
}

TEST(GaussianNoiseImagesTest, StatisticsRangeAndDeterminism) {
  const Dataset d = GaussianNoiseImages(11, 32, 32, 5);
  ASSERT_EQ(d.inputs.size(), 11u * 3072u);
  double mean = 0.0;
  for (double v : d.inputs.data()) {
    EXPECT_TRUE(v >= 0.0 && v <= 1.0);
    mean += v;
  }
  EXPECT_NEAR(mean / static_cast<double>(d.inputs.size()), 0.5, 0.01);
  EXPECT_EQ(GaussianNoiseImages(11, 32, 32, 5).inputs, d.inputs);
  for (std::size_t l : d.labels) EXPECT_EQ(l, 0u);
}

TEST(CifarBinaryTest, RoundTripsSyntheticRecords) {
  std::string bytes = Record(7, 0) + Record(2, 255);
  bytes[1 + 100] = static_cast<char>(128);
  WriteBytes(TempPath("two.bin"), bytes);
  const Dataset d = LoadCifarBinary({TempPath("two.bin").string()});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{7, 2}));
  EXPECT_EQ(d.inputs(0, 100), 128.0 / 255.0);
  EXPECT_EQ(d.inputs(0, 0), 0.0);
  EXPECT_EQ(d.inputs(1, 3071), 1.0);
  EXPECT_EQ(EncodeCifarBinary(d), bytes);
}

TEST(CifarBinaryTest, TruncatedFileReportsOffsetZero) {
  WriteBytes(TempPath("short.bin"), std::string(3072, '\0'));
  try {
    LoadCifarBinary({TempPath("short.bin").string()});
    ADD_FAILURE() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedFile);
    EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos) << e.what();
  }
  ExpectCode(ErrorCode::kIoError, [] { LoadCifarBinary({TempPath("missing.bin").string()}); });
}

TEST(CifarBinaryTest, FilterRelabelsAndCounts) {
  std::string bytes;
  const unsigned char labels[] = {3, 5, 1, 3, 3, 9, 5, 0};
  for (unsigned char l : labels) bytes += Record(l, l);
  WriteBytes(TempPath("mixed.bin"), bytes);
  const std::set<std::size_t> keep = {3, 5};
  const Dataset d = LoadCifarBinary({TempPath("mixed.bin").string()}, keep);
  ASSERT_EQ(d.size(), 5u);
  EXPECT_EQ(d.num_classes, 2u);
  EXPECT_EQ(d.IndicesOf(0).size(), 3u);
  EXPECT_EQ(d.IndicesOf(1).size(), 2u);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_EQ(d.inputs(i, 5), (d.labels[i] == 0 ? 3.0 : 5.0) / 255.0);
  const std::set<std::size_t> none = {4};
  ExpectCode(ErrorCode::kEmptyAfterFilter,
             [&] { LoadCifarBinary({TempPath("mixed.bin").string()}, none); });
}

TEST(CsvDatasetTest, RoundTripIsExact) {
  BlobSpec spec;
  spec.centers = {{0.1, -2}, {3, 1e-7}};
  spec.samples_per_class = 5;
  const Dataset d = GaussianBlobs(spec, 6);
  WriteCsvDataset(d, TempPath("blobs.csv").string());
  const Dataset back = LoadDatasetFile(TempPath("blobs.csv").string());
  EXPECT_EQ(back.inputs, d.inputs);
  EXPECT_EQ(back.labels, d.labels);
  WriteBytes(TempPath("bad.csv"), "label,x0\n1,2,3\n");
  ExpectCode(ErrorCode::kMalformedFile, [] { LoadCsvDataset(TempPath("bad.csv").string()); });
}

TEST(BatchesTest, DropLastDeterminismAndCoverage) {
  const auto b = Batches(10, 4, 1, true);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].size(), 4u);
  EXPECT_EQ(b[1].size(), 4u);
  EXPECT_EQ(Batches(10, 4, 1, true), b);
  EXPECT_EQ(Batches(10, 4, 1, false).size(), 3u);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& batch : Batches(37, 5, seed, true)) {
      total += batch.size();
      for (std::size_t i : batch) {
        EXPECT_LT(i, 37u);
        seen.insert(i);
      }
    }
    EXPECT_EQ(total, 35u);
    EXPECT_EQ(seen.size(), 35u);
  }
}

TEST(DeriveSeedTest, StreamsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 10; ++s)
    for (std::uint64_t k = 0; k < 10; ++k) seeds.insert(DeriveSeed(s, k));
  EXPECT_EQ(seeds.size(), 100u);
  EXPECT_EQ(DeriveSeed(3, 4), DeriveSeed(3, 4));
}

}  // namespace
}  // namespace cood
