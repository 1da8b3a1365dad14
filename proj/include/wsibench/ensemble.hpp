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

#include <string>
#include <vector>

#include "wsibench/error.hpp"
#include "wsibench/parallel.hpp"
#include "wsibench/raster.hpp"
#include "wsibench/slide_io.hpp"

namespace wsibench {

/// Per-pixel foreground probabilities in [0,1].
template <typename Scalar = double>
struct ProbabilityMap {
  std::string slide_id;
  int level = 0;
  Raster<Scalar> values;

  ProbabilityMap() = default;
  ProbabilityMap(std::string id, int lvl, Raster<Scalar> v)
      : slide_id(std::move(id)), level(lvl), values(std::move(v)) {}

  std::ptrdiff_t width() const { return values.cols(); }
  std::ptrdiff_t height() const { return values.rows(); }

  bool same_geometry(const ProbabilityMap& o) const {
    return level == o.level && width() == o.width() && height() == o.height();
  }
};

template <typename Scalar>
void validate_probability_map(const ProbabilityMap<Scalar>& m) {
  if (!((m.values >= Scalar(0)) && (m.values <= Scalar(1))).all())
    throw Error(ErrorCode::kSchema, m.slide_id + ": probability outside [0,1]");
}

/// Pixelwise arithmetic mean. Maps are accumulated in input order, so the
/// result is bit-identical for a given order and any worker count.
template <typename Scalar>
ProbabilityMap<Scalar> fuse_mean(const std::vector<ProbabilityMap<Scalar>>& maps, int workers = 1) {
  if (maps.empty()) throw Error(ErrorCode::kInvalidArgument, "fuse_mean: no maps");
  for (const auto& m : maps)
    if (!m.same_geometry(maps.front()))
      throw Error(ErrorCode::kDimensionMismatch,
                  "fuse_mean: map for " + m.slide_id + " differs in geometry");
  ProbabilityMap<Scalar> out(maps.front().slide_id, maps.front().level,
                             Raster<Scalar>(maps.front().height(), maps.front().width()));
  const Scalar k = static_cast<Scalar>(maps.size());
  parallel_bands(out.height(), workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    auto band = out.values.middleRows(y0, y1 - y0);
    band = maps.front().values.middleRows(y0, y1 - y0);
    for (std::size_t i = 1; i < maps.size(); ++i) band += maps[i].values.middleRows(y0, y1 - y0);
    band /= k;
  });
  return out;
}

/// Pixel set iff value > threshold (strict).
template <typename Scalar>
BinaryMask binarize(const ProbabilityMap<Scalar>& map, Scalar threshold = Scalar(0.5)) {
  if (!(threshold >= Scalar(0) && threshold <= Scalar(1)))
    throw Error(ErrorCode::kInvalidArgument, "binarize: threshold outside [0,1]");
  BinaryMask mask(map.slide_id, map.level, MaskRole::kPrediction, map.width(), map.height());
  mask.bits = (map.values > threshold).template cast<std::uint8_t>();
  return mask;
}

/// Majority vote over an odd number of masks: set iff set in more than half.
BinaryMask fuse_vote(const std::vector<BinaryMask>& masks, int workers = 1);

/// PGM with value round(255 p) plus a `<path>.json` sidecar recording the
/// quantization.
void write_probability_map(const ProbabilityMap<double>& map, const fs::path& path);
ProbabilityMap<double> read_probability_map(const fs::path& path);

}  // namespace wsibench
