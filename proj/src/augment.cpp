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

#include "cood/augment.hpp"

#include <algorithm>
#include <cmath>

#include "cood/error.hpp"

namespace cood {
namespace {

double Sample(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t CropSide(std::size_t side, double fraction) {
  const auto n = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(side)));
  return std::clamp<std::size_t>(n, 1, side);
}

}  // namespace

std::string TransformKindName(TransformKind kind) {
  switch (kind) {
    case TransformKind::kVectorJitter: return "vector_jitter";
    case TransformKind::kVectorScale: return "vector_scale";
    case TransformKind::kCropResize: return "crop_resize";
    case TransformKind::kHorizontalFlip: return "horizontal_flip";
    case TransformKind::kColorDistort: return "color_distort";
  }
  return "?";
}

TransformKind ParseTransformKind(const std::string& name) {
  for (auto k : {TransformKind::kVectorJitter, TransformKind::kVectorScale,
                 TransformKind::kCropResize, TransformKind::kHorizontalFlip,
                 TransformKind::kColorDistort}) {
    if (TransformKindName(k) == name) return k;
  }
  Fail(ErrorCode::kConfigError, "unknown transform kind '" + name + "'");
}

bool IsImageKind(TransformKind kind) {
  return kind == TransformKind::kCropResize || kind == TransformKind::kHorizontalFlip ||
         kind == TransformKind::kColorDistort;
}

void TransformSpec::Validate() const {
  Require(jitter_std >= 0.0, ErrorCode::kConfigError, "jitter std must be >= 0");
  Require(scale_lo > 0.0 && scale_lo <= scale_hi, ErrorCode::kConfigError,
          "scale range must satisfy 0 < lo <= hi");
  Require(crop_lo > 0.0 && crop_lo <= crop_hi && crop_hi <= 1.0, ErrorCode::kConfigError,
          "crop range must lie in (0, 1]");
  Require(flip_probability >= 0.0 && flip_probability <= 1.0, ErrorCode::kConfigError,
          "flip probability must lie in [0, 1]");
  Require(brightness_delta >= 0.0 && contrast_delta >= 0.0 && contrast_delta <= 1.0,
          ErrorCode::kConfigError, "colour deltas out of range");
}

Vector CropResize(std::span<const double> image, const ImageShape& shape, double fraction,
                  PixelOffset offset, const ImageShape& out_shape) {
  Require(image.size() == shape.pixels(), ErrorCode::kIncompatibleInput,
          "image size does not match shape");
  Require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kWindowOutOfBounds,
          "crop fraction must lie in (0, 1]");
  Require(out_shape.channels == shape.channels, ErrorCode::kIncompatibleInput,
          "crop cannot change channel count");
  const std::size_t crop_h = CropSide(shape.height, fraction);
  const std::size_t crop_w = CropSide(shape.width, fraction);
  Require(offset.row + crop_h <= shape.height && offset.col + crop_w <= shape.width,
          ErrorCode::kWindowOutOfBounds, "crop window leaves the image");

  const std::size_t in_plane = shape.height * shape.width;
  const std::size_t out_plane = out_shape.height * out_shape.width;
  const double sy = static_cast<double>(crop_h) / static_cast<double>(out_shape.height);
  const double sx = static_cast<double>(crop_w) / static_cast<double>(out_shape.width);
  Vector out(out_shape.pixels());
  for (std::size_t oy = 0; oy < out_shape.height; ++oy) {
    const double fy = std::clamp((static_cast<double>(oy) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(crop_h - 1));
    const auto y0 = static_cast<std::size_t>(std::floor(fy));
    const std::size_t y1 = std::min(y0 + 1, crop_h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_shape.width; ++ox) {
      const double fx = std::clamp((static_cast<double>(ox) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(crop_w - 1));
      const auto x0 = static_cast<std::size_t>(std::floor(fx));
      const std::size_t x1 = std::min(x0 + 1, crop_w - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < shape.channels; ++c) {
        auto at = [&](std::size_t y, std::size_t x) {
          return image[c * in_plane + (offset.row + y) * shape.width + offset.col + x];
        };
        const double top = (1.0 - wx) * at(y0, x0) + wx * at(y0, x1);
        const double bottom = (1.0 - wx) * at(y1, x0) + wx * at(y1, x1);
        out[c * out_plane + oy * out_shape.width + ox] =
            std::clamp((1.0 - wy) * top + wy * bottom, 0.0, 1.0);
      }
    }
  }
  return out;
}

Vector HorizontalFlip(std::span<const double> image, const ImageShape& shape) {
  Require(image.size() == shape.pixels(), ErrorCode::kIncompatibleInput,
          "image size does not match shape");
  Vector out(image.size());
  for (std::size_t c = 0; c < shape.channels; ++c)
    for (std::size_t y = 0; y < shape.height; ++y)
      for (std::size_t x = 0; x < shape.width; ++x) {
        const std::size_t base = c * shape.height * shape.width + y * shape.width;
        out[base + x] = image[base + shape.width - 1 - x];
      }
  return out;
}

Vector ColorDistort(std::span<const double> image, const ImageShape& shape,
                    double brightness_delta, double contrast_factor) {
  Require(image.size() == shape.pixels(), ErrorCode::kIncompatibleInput,
          "image size does not match shape");
  const std::size_t plane = shape.height * shape.width;
  Vector out(image.size());
  for (std::size_t c = 0; c < shape.channels; ++c) {
    double mean = 0.0;
    for (std::size_t p = 0; p < plane; ++p) mean += image[c * plane + p];
    mean /= static_cast<double>(plane);
    for (std::size_t p = 0; p < plane; ++p) {
      const double v = image[c * plane + p];
      out[c * plane + p] =
          std::clamp(v + (contrast_factor - 1.0) * (v - mean) + brightness_delta, 0.0, 1.0);
    }
  }
  return out;
}

Vector ApplyTransforms(std::span<const double> x, std::span<const TransformSpec> specs,
                       const std::optional<ImageShape>& shape, std::mt19937_64& rng) {
  Vector v(x.begin(), x.end());
  for (const auto& spec : specs) {
    if (IsImageKind(spec.kind)) {
      Require(shape.has_value() && shape->pixels() == v.size(), ErrorCode::kIncompatibleInput,
              TransformKindName(spec.kind) + " needs an image input");
    } else {
      Require(!shape.has_value(), ErrorCode::kIncompatibleInput,
              TransformKindName(spec.kind) + " needs a flat vector input");
    }
    switch (spec.kind) {
      case TransformKind::kVectorJitter: {
        std::normal_distribution<double> noise(0.0, spec.jitter_std);
        if (spec.jitter_std > 0.0)
          for (double& e : v) e += noise(rng);
        break;
      }
      case TransformKind::kVectorScale: {
        const double s = Sample(rng, spec.scale_lo, spec.scale_hi);
        for (double& e : v) e *= s;
        break;
      }
      case TransformKind::kCropResize: {
        const double fraction = Sample(rng, spec.crop_lo, spec.crop_hi);
        const std::size_t ch = CropSide(shape->height, fraction);
        const std::size_t cw = CropSide(shape->width, fraction);
        std::uniform_int_distribution<std::size_t> oy(0, shape->height - ch);
        std::uniform_int_distribution<std::size_t> ox(0, shape->width - cw);
        const PixelOffset offset{oy(rng), ox(rng)};
        v = CropResize(v, *shape, fraction, offset, *shape);
        break;
      }
      case TransformKind::kHorizontalFlip: {
        if (std::bernoulli_distribution(spec.flip_probability)(rng)) v = HorizontalFlip(v, *shape);
        break;
      }
      case TransformKind::kColorDistort: {
        const double b = Sample(rng, -spec.brightness_delta, spec.brightness_delta);
        const double c = Sample(rng, 1.0 - spec.contrast_delta, 1.0 + spec.contrast_delta);
        v = ColorDistort(v, *shape, b, c);
        break;
      }
    }
  }
  return v;
}

std::pair<Vector, Vector> TransformPair(std::span<const double> x,
                                        std::span<const TransformSpec> specs,
                                        const std::optional<ImageShape>& shape,
                                        std::mt19937_64& rng) {
  Vector first = ApplyTransforms(x, specs, shape, rng);
  Vector second = ApplyTransforms(x, specs, shape, rng);
  return {std::move(first), std::move(second)};
}

}  // namespace cood
