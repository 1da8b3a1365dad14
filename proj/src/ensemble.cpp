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

#include "wsibench/ensemble.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace wsibench {

BinaryMask fuse_vote(const std::vector<BinaryMask>& masks, int workers) {
  if (masks.empty() || masks.size() % 2 == 0)
    throw Error(ErrorCode::kInvalidArgument,
                "fuse_vote: need an odd number of masks, got " + std::to_string(masks.size()));
  for (const auto& m : masks)
    if (!m.same_geometry(masks.front()))
      throw Error(ErrorCode::kDimensionMismatch,
                  "fuse_vote: mask for " + m.slide_id + " differs in geometry");
  BinaryMask out = masks.front();
  out.role = MaskRole::kPrediction;
  const int needed = static_cast<int>(masks.size() / 2) + 1;
  parallel_bands(out.height(), workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    Raster<int> votes = masks.front().bits.middleRows(y0, y1 - y0).cast<int>();
    for (std::size_t i = 1; i < masks.size(); ++i)
      votes += masks[i].bits.middleRows(y0, y1 - y0).cast<int>();
    out.bits.middleRows(y0, y1 - y0) = (votes >= needed).cast<std::uint8_t>();
  });
  return out;
}

void write_probability_map(const ProbabilityMap<double>& map, const fs::path& path) {
  validate_probability_map(map);
  const Raster<std::uint8_t> q =
      (map.values * 255.0).round().cast<std::uint8_t>();
  write_pgm(q, path);
  nlohmann::ordered_json side;
  side["slide_id"] = map.slide_id;
  side["level"] = map.level;
  side["kind"] = "probability";
  side["quantization"] = "value = round(255 * p)";
  const fs::path sidecar = path.string() + ".json";
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, sidecar.string() + ": cannot open for writing");
  out << side.dump(2) << "\n";
}

ProbabilityMap<double> read_probability_map(const fs::path& path) {
  const Raster<std::uint8_t> q = read_pgm(path);
  ProbabilityMap<double> map(path.stem().string(), 0, q.cast<double>() / 255.0);
  const fs::path sidecar = path.string() + ".json";
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    try {
      const auto side = nlohmann::json::parse(in);
      map.slide_id = side.at("slide_id").get<std::string>();
      map.level = side.at("level").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema, sidecar.string() + ": " + e.what());
    }
  }
  return map;
}

}  // namespace wsibench
