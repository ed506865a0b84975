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

// Label-preserving random transformations that produce the two views of a
// sample for contrastive training.

#ifndef COOD_AUGMENT_HPP_
#define COOD_AUGMENT_HPP_

#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cood/data.hpp"
#include "cood/linalg.hpp"

namespace cood {

enum class TransformKind { kVectorJitter, kVectorScale, kCropResize, kHorizontalFlip, kColorDistort };

std::string TransformKindName(TransformKind kind);
TransformKind ParseTransformKind(const std::string& name);

struct TransformSpec {
  TransformKind kind = TransformKind::kVectorJitter;
  double jitter_std = 0.1;
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double crop_lo = 0.5;  // fraction of the side length
  double crop_hi = 1.0;
  double flip_probability = 0.5;
  double brightness_delta = 0.2;  // uniform in [-delta, delta]
  double contrast_delta = 0.2;    // factor uniform in [1 - delta, 1 + delta]

  void Validate() const;
};

bool IsImageKind(TransformKind kind);

// One random chain from `specs` applied to `x`. Vector kinds need a flat
// input (no shape); image kinds need an image shape.
Vector ApplyTransforms(std::span<const double> x, std::span<const TransformSpec> specs,
                       const std::optional<ImageShape>& shape, std::mt19937_64& rng);

// Two independent chains over the same input.
std::pair<Vector, Vector> TransformPair(std::span<const double> x,
                                        std::span<const TransformSpec> specs,
                                        const std::optional<ImageShape>& shape,
                                        std::mt19937_64& rng);

struct PixelOffset {
  std::size_t row = 0;
  std::size_t col = 0;
};

// Crops a window of round(fraction * side) pixels starting at `offset`, then
// resizes bilinearly (half-pixel centres, edge clamped) to `out_shape`.
Vector CropResize(std::span<const double> image, const ImageShape& shape, double fraction,
                  PixelOffset offset, const ImageShape& out_shape);

Vector HorizontalFlip(std::span<const double> image, const ImageShape& shape);

// v -> clamp(contrast * (v - channel_mean) + channel_mean + brightness, 0, 1).
Vector ColorDistort(std::span<const double> image, const ImageShape& shape,
                    double brightness_delta, double contrast_factor);

}  // namespace cood

#endif  // COOD_AUGMENT_HPP_
