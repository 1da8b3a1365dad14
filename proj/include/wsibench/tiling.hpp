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
#include <optional>
#include <string>
#include <vector>

#include "wsibench/mask_ops.hpp"
#include "wsibench/raster.hpp"
#include "wsibench/slide_io.hpp"

namespace wsibench {

enum class TileLabel { kPositive, kNegative, kUnused, kTumor, kNormal, kMix };

std::string to_string(TileLabel label);
TileLabel tile_label_from_string(const std::string& s);

enum class TileRule { kThreshold75, kThreeClass, kBigPatchNine };

TileRule tile_rule_from_string(const std::string& s);

struct TileOrigin {
  std::ptrdiff_t x = 0;
  std::ptrdiff_t y = 0;
  bool operator==(const TileOrigin&) const = default;
};

struct TileRecord {
  std::string slide_id;
  int level = 0;
  std::ptrdiff_t x = 0;
  std::ptrdiff_t y = 0;
  std::ptrdiff_t size = 0;
  std::int64_t tumor_pixels = 0;
  std::int64_t total_pixels = 0;
  TileLabel label = TileLabel::kUnused;
  bool operator==(const TileRecord&) const = default;
};

struct TilingConfig {
  std::ptrdiff_t tile_size = 512;
  std::ptrdiff_t stride = 512;
  int level = 0;
  TileRule rule = TileRule::kThreshold75;
  std::optional<TissueMethod> tissue_filter;
  /// Big-patch edge for kBigPatchNine; the grid then steps by `stride` over
  /// big patches and each one yields nine big_size/3 sub-tiles.
  std::ptrdiff_t big_size = 768;
};

/// Origins (i*stride, j*stride) of every tile fully inside a width x height
/// level, row-major. Partial edge tiles are dropped.
std::vector<TileOrigin> grid_tiles(std::ptrdiff_t width, std::ptrdiff_t height,
                                   std::ptrdiff_t tile_size, std::ptrdiff_t stride);
std::vector<TileOrigin> grid_tiles(const SlidePyramid& p, const TilingConfig& cfg);

/// Set pixels of `mask` in the size x size window at `origin`.
std::int64_t count_window(const BinaryMask& mask, TileOrigin origin, std::ptrdiff_t size);

/// Positive iff tumor/total > 3/4, Negative iff tumor == 0, Unused otherwise.
TileLabel threshold75_label(std::int64_t tumor_pixels, std::int64_t total_pixels);

/// Tumor iff all pixels tumor, Normal iff none, Mix otherwise.
TileLabel threeclass_label(std::int64_t tumor_pixels, std::int64_t total_pixels);

/// Counts the tile's tumor pixels in `gt` and applies the threshold rule.
/// The tile's level and extent must match `gt`.
TileLabel label_tile_threshold75(const TileRecord& tile, const BinaryMask& gt);
TileLabel label_tile_threeclass(const TileRecord& tile, const BinaryMask& gt);

/// Nine uniform big_size/3 sub-tile origins of the big patch at `origin`,
/// row-major.
std::array<TileOrigin, 9> big_patch_nine(std::ptrdiff_t width, std::ptrdiff_t height,
                                         TileOrigin origin, std::ptrdiff_t big_size = 768);

/// Reassigns Mix records (Tumor iff tumor fraction >= 1/2, else Normal) and
/// subsamples the majority class to the minority count with `seed`.
/// Kept records retain their input order; other labels pass through.
std::vector<TileRecord> rebalance_mix(const std::vector<TileRecord>& records, std::uint64_t seed);

/// Full tiling pass: grid, optional tissue filter, tumor counting and
/// labeling. Output is identical for any worker count.
std::vector<TileRecord> tile_slide(const SlidePyramid& p, const BinaryMask& gt,
                                   const TilingConfig& cfg, int workers = 1);

/// JSONL, one record per line, sorted by (slide_id, y, x).
std::string manifest_text(std::vector<TileRecord> records);
void emit_manifest(const std::vector<TileRecord>& records, const fs::path& path);
std::vector<TileRecord> read_manifest(const fs::path& path);

}  // namespace wsibench
