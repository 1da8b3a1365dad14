// Copyright 2026 The wsibench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "wsibench/raster.hpp"
#include "wsibench/slide_io.hpp"

namespace wsibench {

/// Level-local pixel window, inclusive-exclusive.
struct BoundingBox {
  std::ptrdiff_t x0 = 0;
  std::ptrdiff_t y0 = 0;
  std::ptrdiff_t x1 = 0;
  std::ptrdiff_t y1 = 0;

  std::ptrdiff_t width() const { return x1 - x0; }
  std::ptrdiff_t height() const { return y1 - y0; }
  bool operator==(const BoundingBox&) const = default;
};

/// Fills polygons scaled by 1/2^level. A pixel is set iff its center lies
/// inside at least one polygon under the even-odd rule. Geometry outside the
/// raster is discarded. An empty `group` selects every annotation.
BinaryMask rasterize(const AnnotationSet& a, int level, std::ptrdiff_t width,
                     std::ptrdiff_t height, const std::string& group = "", int workers = 1);

/// Polygons whose area is zero after scaling to `level`; they fill nothing.
int count_degenerate_polygons(const AnnotationSet& a, int level);

using GrayHistogram = std::array<std::uint64_t, 256>;

GrayHistogram gray_histogram(const RgbImage& img, int workers = 1);

/// Otsu split: returns t maximizing the between-class variance of
/// [0..t] vs [t+1..255]; the smallest t wins ties. Comparisons are exact.
/// Throws kDegenerateHistogram when fewer than two bins are populated.
int otsu_threshold(const GrayHistogram& hist);

enum class TissueMethod { kOtsu, kGray200 };

TissueMethod tissue_method_from_string(const std::string& s);
std::string to_string(TissueMethod m);

/// Gray level at or below which a pixel counts as tissue.
int tissue_threshold(const SlidePyramid& p, int level, TissueMethod method, int workers = 1);

BinaryMask tissue_mask(const SlidePyramid& p, int level, TissueMethod method, int workers = 1);
BinaryMask threshold_gray(const RgbImage& img, int max_gray, int workers = 1);

/// gt AND tissue.
BinaryMask refine_labels(const BinaryMask& gt, const BinaryMask& tissue);

BinaryMask crop(const BinaryMask& mask, const BoundingBox& box);

/// Tight box around the set pixels, or nullopt for an empty mask.
std::optional<BoundingBox> bounding_box_of(const BinaryMask& mask);

/// Nearest-neighbor upsampling of a coarser-level mask to `target_level`
/// with the given target dimensions.
BinaryMask upsample_nearest(const BinaryMask& mask, int target_level, std::ptrdiff_t width,
                            std::ptrdiff_t height);

struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
};

ChannelStats channel_stats(const RgbImage& img);

/// Per-channel mean/std matching to `reference`.
RgbImage normalize_colors(const RgbImage& img, const ChannelStats& reference, int workers = 1);

/// PGM (0 / 255) plus `<path>.json` sidecar with slide_id, level, role.
void write_mask(const BinaryMask& mask, const fs::path& path);

/// Without a sidecar the slide id is the file stem, level 0, role `fallback_role`.
BinaryMask read_mask(const fs::path& path, MaskRole fallback_role = MaskRole::kGroundTruth);

}  // namespace wsibench
