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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsibench/raster.hpp"

namespace wsibench {

namespace fs = std::filesystem;

struct PyramidLevel {
  int index = 0;
  RgbImage pixels;

  std::ptrdiff_t width() const { return pixels.width(); }
  std::ptrdiff_t height() const { return pixels.height(); }
  bool operator==(const PyramidLevel&) const = default;
};

/// Multi-resolution slide. Level k is downsampled by 2^k with ceil-halved
/// dimensions.
struct SlidePyramid {
  std::string slide_id;
  std::optional<double> mpp_level0;
  std::vector<PyramidLevel> levels;

  const PyramidLevel& level(int k) const;
  int level_count() const { return static_cast<int>(levels.size()); }
  bool operator==(const SlidePyramid&) const = default;
};

/// ceil(extent / 2^level)
inline std::ptrdiff_t level_extent(std::ptrdiff_t level0_extent, int level) {
  const std::ptrdiff_t div = std::ptrdiff_t{1} << level;
  return (level0_extent + div - 1) / div;
}

/// Throws kSchema if levels are missing, misnumbered or break the halving rule.
void validate_pyramid(const SlidePyramid& p);

/// Builds levels 1..level_count-1 from `level0` by 2x2 box averaging
/// (edge blocks average only the pixels that exist).
SlidePyramid build_pyramid(std::string slide_id, RgbImage level0, int level_count,
                           std::optional<double> mpp_level0 = std::nullopt,
                           int workers = 1);

RgbImage downsample2(const RgbImage& src, int workers = 1);

/// Creates the parent directory of `path` if needed; kIo on failure.
void ensure_parent_dir(const fs::path& path);

/// Reads the JSON manifest and its P6 level rasters.
SlidePyramid read_pyramid(const fs::path& manifest_path);

/// Writes `dir/manifest.json` and `dir/level<k>.ppm`; returns the manifest path.
fs::path write_pyramid(const SlidePyramid& p, const fs::path& dir);

RgbImage read_ppm(const fs::path& path);
void write_ppm(const RgbImage& img, const fs::path& path);

/// Grayscale P5 helpers; values are raw bytes.
Raster<std::uint8_t> read_pgm(const fs::path& path);
void write_pgm(const Raster<std::uint8_t>& img, const fs::path& path);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Annotation {
  std::string name;
  std::string group;
  std::vector<Point> vertices;  // implicitly closed
  bool operator==(const Annotation&) const = default;
};

struct AnnotationSet {
  std::string slide_id;
  std::vector<Annotation> annotations;
  bool operator==(const AnnotationSet&) const = default;
};

/// Throws kSchema on <3 vertices, non-finite coordinates or duplicate names.
void validate_annotations(const AnnotationSet& a);

/// Parses ASAP-style polygon XML. The slide id is taken from the file stem.
AnnotationSet parse_annotations(const fs::path& xml_path);
AnnotationSet parse_annotations_string(const std::string& xml, const std::string& slide_id,
                                       const std::string& source = "<string>");

/// Coordinates are printed with 6 decimals.
void serialize_annotations(const AnnotationSet& a, const fs::path& path);
std::string serialize_annotations_string(const AnnotationSet& a);

/// Round-trip helper: every coordinate rounded the way serialization prints it.
AnnotationSet round_to_printed_precision(AnnotationSet a);

}  // namespace wsibench
