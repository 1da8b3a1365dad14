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

#include "wsibench/tiling.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "wsibench/error.hpp"
#include "wsibench/parallel.hpp"
#include "wsibench/random.hpp"

namespace wsibench {

namespace {

bool window_has_tissue(const RgbImage& img, TileOrigin o, std::ptrdiff_t size, int max_gray) {
  for (std::ptrdiff_t y = o.y; y < o.y + size; ++y) {
    const std::uint8_t* px = img.pixel(o.x, y);
    for (std::ptrdiff_t i = 0; i < size; ++i, px += 3)
      if (gray_level(px) <= max_gray) return true;
  }
  return false;
}

void check_tile_against_mask(const TileRecord& tile, const BinaryMask& gt) {
  if (tile.level != gt.level)
    throw Error(ErrorCode::kDimensionMismatch,
                "tile at level " + std::to_string(tile.level) + " but mask at level " +
                    std::to_string(gt.level));
  if (tile.size < 1 || tile.x < 0 || tile.y < 0 || tile.x + tile.size > gt.width() ||
      tile.y + tile.size > gt.height())
    throw Error(ErrorCode::kDimensionMismatch,
                "tile (" + std::to_string(tile.x) + "," + std::to_string(tile.y) + ") size " +
                    std::to_string(tile.size) + " exceeds mask " + std::to_string(gt.width()) +
                    "x" + std::to_string(gt.height()));
}

auto sort_key(const TileRecord& r) {
  return std::tie(r.slide_id, r.y, r.x, r.level, r.size, r.tumor_pixels, r.total_pixels, r.label);
}

}  // namespace

std::string to_string(TileLabel label) {
  switch (label) {
    case TileLabel::kPositive: return "Positive";
    case TileLabel::kNegative: return "Negative";
    case TileLabel::kUnused: return "Unused";
    case TileLabel::kTumor: return "Tumor";
    case TileLabel::kNormal: return "Normal";
    case TileLabel::kMix: return "Mix";
  }
  return "Unused";
}

TileLabel tile_label_from_string(const std::string& s) {
  for (auto l : {TileLabel::kPositive, TileLabel::kNegative, TileLabel::kUnused, TileLabel::kTumor,
                 TileLabel::kNormal, TileLabel::kMix})
    if (to_string(l) == s) return l;
  throw Error(ErrorCode::kSchema, "unknown tile label '" + s + "'");
}

TileRule tile_rule_from_string(const std::string& s) {
  if (s == "threshold75") return TileRule::kThreshold75;
  if (s == "threeclass") return TileRule::kThreeClass;
  if (s == "bigpatch9") return TileRule::kBigPatchNine;
  throw Error(ErrorCode::kInvalidArgument, "unknown tiling rule '" + s + "'");
}

std::vector<TileOrigin> grid_tiles(std::ptrdiff_t width, std::ptrdiff_t height,
                                   std::ptrdiff_t tile_size, std::ptrdiff_t stride) {
  if (tile_size < 1 || stride < 1)
    throw Error(ErrorCode::kInvalidArgument, "grid_tiles: tile size and stride must be >= 1");
  if (tile_size > width || tile_size > height)
    throw Error(ErrorCode::kInvalidArgument,
                "grid_tiles: tile size " + std::to_string(tile_size) + " exceeds level " +
                    std::to_string(width) + "x" + std::to_string(height));
  std::vector<TileOrigin> origins;
  const std::ptrdiff_t nx = (width - tile_size) / stride + 1;
  const std::ptrdiff_t ny = (height - tile_size) / stride + 1;
  origins.reserve(static_cast<std::size_t>(nx * ny));
  for (std::ptrdiff_t j = 0; j < ny; ++j)
    for (std::ptrdiff_t i = 0; i < nx; ++i) origins.push_back({i * stride, j * stride});
  return origins;
}

std::vector<TileOrigin> grid_tiles(const SlidePyramid& p, const TilingConfig& cfg) {
  const auto& lv = p.level(cfg.level);
  const std::ptrdiff_t size = cfg.rule == TileRule::kBigPatchNine ? cfg.big_size : cfg.tile_size;
  return grid_tiles(lv.width(), lv.height(), size, cfg.stride);
}

std::int64_t count_window(const BinaryMask& mask, TileOrigin origin, std::ptrdiff_t size) {
  return mask.bits.block(origin.y, origin.x, size, size).cast<std::int64_t>().sum();
}

TileLabel threshold75_label(std::int64_t tumor_pixels, std::int64_t total_pixels) {
  if (4 * tumor_pixels > 3 * total_pixels) return TileLabel::kPositive;
  if (tumor_pixels == 0) return TileLabel::kNegative;
  return TileLabel::kUnused;
}

TileLabel threeclass_label(std::int64_t tumor_pixels, std::int64_t total_pixels) {
  if (tumor_pixels == total_pixels) return TileLabel::kTumor;
  if (tumor_pixels == 0) return TileLabel::kNormal;
  return TileLabel::kMix;
}

TileLabel label_tile_threshold75(const TileRecord& tile, const BinaryMask& gt) {
  check_tile_against_mask(tile, gt);
  return threshold75_label(count_window(gt, {tile.x, tile.y}, tile.size), tile.size * tile.size);
}

TileLabel label_tile_threeclass(const TileRecord& tile, const BinaryMask& gt) {
  check_tile_against_mask(tile, gt);
  return threeclass_label(count_window(gt, {tile.x, tile.y}, tile.size), tile.size * tile.size);
}

std::array<TileOrigin, 9> big_patch_nine(std::ptrdiff_t width, std::ptrdiff_t height,
                                         TileOrigin origin, std::ptrdiff_t big_size) {
  if (big_size < 3 || big_size % 3 != 0)
    throw Error(ErrorCode::kInvalidArgument,
                "big_patch_nine: big size " + std::to_string(big_size) + " is not divisible by 3");
  if (origin.x < 0 || origin.y < 0 || origin.x + big_size > width ||
      origin.y + big_size > height)
    throw Error(ErrorCode::kInvalidArgument, "big_patch_nine: big patch at (" +
                                                 std::to_string(origin.x) + "," +
                                                 std::to_string(origin.y) + ") leaves the level");
  const std::ptrdiff_t sub = big_size / 3;
  std::array<TileOrigin, 9> out;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(3 * j + i)] = {origin.x + i * sub, origin.y + j * sub};
  return out;
}

std::vector<TileRecord> rebalance_mix(const std::vector<TileRecord>& records, std::uint64_t seed) {
  std::vector<TileRecord> relabeled = records;
  std::vector<std::size_t> tumor;
  std::vector<std::size_t> normal;
  for (std::size_t i = 0; i < relabeled.size(); ++i) {
    auto& r = relabeled[i];
    if (r.label == TileLabel::kMix)
      r.label = 2 * r.tumor_pixels >= r.total_pixels ? TileLabel::kTumor : TileLabel::kNormal;
    if (r.label == TileLabel::kTumor) tumor.push_back(i);
    if (r.label == TileLabel::kNormal) normal.push_back(i);
  }
  std::vector<bool> keep(relabeled.size(), true);
  auto& majority = tumor.size() > normal.size() ? tumor : normal;
  const std::size_t target = std::min(tumor.size(), normal.size());
  if (majority.size() > target) {
    Rng rng(seed);
    std::vector<std::size_t> order = majority;
    rng.shuffle(order);
    for (std::size_t k = target; k < order.size(); ++k) keep[order[k]] = false;
  }
  std::vector<TileRecord> out;
  for (std::size_t i = 0; i < relabeled.size(); ++i)
    if (keep[i]) out.push_back(std::move(relabeled[i]));
  return out;
}

std::vector<TileRecord> tile_slide(const SlidePyramid& p, const BinaryMask& gt,
                                   const TilingConfig& cfg, int workers) {
  const auto& lv = p.level(cfg.level);
  if (gt.level != cfg.level || gt.width() != lv.width() || gt.height() != lv.height())
    throw Error(ErrorCode::kDimensionMismatch,
                p.slide_id + ": label mask does not match level " + std::to_string(cfg.level));
  const auto origins = grid_tiles(p, cfg);
  const int max_gray =
      cfg.tissue_filter ? tissue_threshold(p, cfg.level, *cfg.tissue_filter, workers) : 255;

  // Each grid cell yields one record (or nine for big patches); cells are
  // processed independently and compacted in grid order.
  const bool nine = cfg.rule == TileRule::kBigPatchNine;
  std::vector<std::vector<TileRecord>> slots(origins.size());
  parallel_items(static_cast<std::ptrdiff_t>(origins.size()), workers, [&](std::ptrdiff_t i) {
    const TileOrigin o = origins[static_cast<std::size_t>(i)];
    auto make = [&](TileOrigin at, std::ptrdiff_t size) {
      TileRecord r;
      r.slide_id = p.slide_id;
      r.level = cfg.level;
      r.x = at.x;
      r.y = at.y;
      r.size = size;
      r.total_pixels = size * size;
      r.tumor_pixels = count_window(gt, at, size);
      return r;
    };
    auto& out = slots[static_cast<std::size_t>(i)];
    if (!nine) {
      if (cfg.tissue_filter && !window_has_tissue(lv.pixels, o, cfg.tile_size, max_gray)) return;
      TileRecord r = make(o, cfg.tile_size);
      r.label = cfg.rule == TileRule::kThreshold75 ? threshold75_label(r.tumor_pixels, r.total_pixels)
                                                   : threeclass_label(r.tumor_pixels, r.total_pixels);
      out.push_back(std::move(r));
      return;
    }
    const std::int64_t big_tumor = count_window(gt, o, cfg.big_size);
    const TileLabel big_label = threeclass_label(big_tumor, cfg.big_size * cfg.big_size);
    const std::ptrdiff_t sub = cfg.big_size / 3;
    for (const TileOrigin s : big_patch_nine(lv.width(), lv.height(), o, cfg.big_size)) {
      if (cfg.tissue_filter && !window_has_tissue(lv.pixels, s, sub, max_gray)) continue;
      TileRecord r = make(s, sub);
      r.label = big_label;
      out.push_back(std::move(r));
    }
  });
  std::vector<TileRecord> records;
  for (auto& s : slots)
    for (auto& r : s) records.push_back(std::move(r));
  return records;
}

std::string manifest_text(std::vector<TileRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const TileRecord& a, const TileRecord& b) { return sort_key(a) < sort_key(b); });
  std::string text;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["slide_id"] = r.slide_id;
    j["level"] = r.level;
    j["x"] = r.x;
    j["y"] = r.y;
    j["size"] = r.size;
    j["tumor_pixels"] = r.tumor_pixels;
    j["total_pixels"] = r.total_pixels;
    j["label"] = to_string(r.label);
    text += j.dump();
    text += '\n';
  }
  return text;
}

void emit_manifest(const std::vector<TileRecord>& records, const fs::path& path) {
  const std::string text = manifest_text(records);
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

std::vector<TileRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  std::vector<TileRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TileRecord r;
      r.slide_id = j.at("slide_id").get<std::string>();
      r.level = j.at("level").get<int>();
      r.x = j.at("x").get<std::ptrdiff_t>();
      r.y = j.at("y").get<std::ptrdiff_t>();
      r.size = j.at("size").get<std::ptrdiff_t>();
      r.tumor_pixels = j.at("tumor_pixels").get<std::int64_t>();
      r.total_pixels = j.at("total_pixels").get<std::int64_t>();
      r.label = tile_label_from_string(j.at("label").get<std::string>());
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kSchema,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace wsibench
