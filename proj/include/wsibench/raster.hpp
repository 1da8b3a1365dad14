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

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace wsibench {

/// Row-major dense raster: rows = image height, cols = image width.
template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved RGB8 image. Stored as a height x (3*width) byte raster so a
/// pixel row is one contiguous Eigen row.
struct RgbImage {
  Raster<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(std::ptrdiff_t width, std::ptrdiff_t height)
      : data(Raster<std::uint8_t>::Zero(height, 3 * width)) {}

  std::ptrdiff_t width() const { return data.cols() / 3; }
  std::ptrdiff_t height() const { return data.rows(); }

  std::uint8_t* pixel(std::ptrdiff_t x, std::ptrdiff_t y) {
    return data.data() + y * data.cols() + 3 * x;
  }
  const std::uint8_t* pixel(std::ptrdiff_t x, std::ptrdiff_t y) const {
    return data.data() + y * data.cols() + 3 * x;
  }

  bool operator==(const RgbImage& o) const {
    return data.rows() == o.data.rows() && data.cols() == o.data.cols() &&
           (data == o.data).all();
  }
};

/// Rec.601 luma rounded half-up, in exact integer arithmetic.
inline std::uint8_t gray_level(const std::uint8_t* rgb) {
  return static_cast<std::uint8_t>(
      (299u * rgb[0] + 587u * rgb[1] + 114u * rgb[2] + 500u) / 1000u);
}

enum class MaskRole { kGroundTruth, kPrediction, kTissue, kRefined };

std::string to_string(MaskRole role);
MaskRole mask_role_from_string(const std::string& s);

/// One byte per pixel holding 0 or 1. Logically a bit raster.
struct BinaryMask {
  std::string slide_id;
  int level = 0;
  MaskRole role = MaskRole::kGroundTruth;
  Raster<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(std::string id, int lvl, MaskRole r, std::ptrdiff_t width,
             std::ptrdiff_t height)
      : slide_id(std::move(id)),
        level(lvl),
        role(r),
        bits(Raster<std::uint8_t>::Zero(height, width)) {}

  std::ptrdiff_t width() const { return bits.cols(); }
  std::ptrdiff_t height() const { return bits.rows(); }
  bool at(std::ptrdiff_t x, std::ptrdiff_t y) const { return bits(y, x) != 0; }
  void set(std::ptrdiff_t x, std::ptrdiff_t y, bool v) { bits(y, x) = v ? 1 : 0; }

  std::int64_t count() const {
    std::int64_t n = 0;
    const std::uint8_t* p = bits.data();
    const std::ptrdiff_t size = bits.size();
    for (std::ptrdiff_t i = 0; i < size; ++i) n += p[i];
    return n;
  }

  bool same_geometry(const BinaryMask& o) const {
    return level == o.level && width() == o.width() && height() == o.height();
  }
  bool same_pixels(const BinaryMask& o) const {
    return width() == o.width() && height() == o.height() && (bits == o.bits).all();
  }
};

}  // namespace wsibench
