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

#include "wsibench/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "wsibench/error.hpp"
#include "wsibench/parallel.hpp"

namespace wsibench {

namespace {

void require_same_geometry(const BinaryMask& a, const BinaryMask& b, const char* op) {
  if (!a.same_geometry(b))
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": mask geometry differs (level " + std::to_string(a.level) +
                    " " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs level " + std::to_string(b.level) + " " + std::to_string(b.width()) +
                    "x" + std::to_string(b.height()) + ")");
}

}  // namespace

GrayHistogram gray_histogram(const RgbImage& img, int workers) {
  const auto height = img.height();
  const auto width = img.width();
  std::vector<GrayHistogram> partial(static_cast<std::size_t>(band_count(height, workers)));
  parallel_bands(height, workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t band) {
    GrayHistogram h{};
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
      const std::uint8_t* px = img.pixel(0, y);
      for (std::ptrdiff_t x = 0; x < width; ++x, px += 3) ++h[gray_level(px)];
    }
    partial[static_cast<std::size_t>(band)] = h;
  });
  GrayHistogram total{};
  for (const auto& h : partial)
    for (std::size_t i = 0; i < 256; ++i) total[i] += h[i];
  return total;
}

int otsu_threshold(const GrayHistogram& hist) {
  using boost::multiprecision::cpp_int;
  std::uint64_t n = 0;
  cpp_int sum = 0;
  int populated = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    n += hist[i];
    sum += cpp_int(hist[i]) * i;
    if (hist[i] > 0) ++populated;
  }
  if (n == 0) throw Error(ErrorCode::kDegenerateHistogram, "otsu_threshold: empty histogram");
  if (populated < 2)
    throw Error(ErrorCode::kDegenerateHistogram,
                "otsu_threshold: all mass in one gray level, no split exists");

  // Between-class variance times n^2 equals D^2 / (w0 * w1) with
  // D = s0 * n - sum * w0; fractions are compared by cross-multiplication.
  int best_t = -1;
  cpp_int best_num = 0;
  cpp_int best_den = 1;
  std::uint64_t w0 = 0;
  cpp_int s0 = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[static_cast<std::size_t>(t)];
    s0 += cpp_int(hist[static_cast<std::size_t>(t)]) * t;
    const std::uint64_t w1 = n - w0;
    if (w0 == 0 || w1 == 0) continue;
    const cpp_int d = s0 * n - sum * w0;
    const cpp_int num = d * d;
    const cpp_int den = cpp_int(w0) * w1;
    if (best_t < 0 || num * best_den > best_num * den) {
      best_t = t;
      best_num = num;
      best_den = den;
    }
  }
  return best_t;
}

TissueMethod tissue_method_from_string(const std::string& s) {
  if (s == "otsu" || s == "Otsu") return TissueMethod::kOtsu;
  if (s == "gray200" || s == "Gray200") return TissueMethod::kGray200;
  throw Error(ErrorCode::kInvalidArgument, "unknown tissue method '" + s + "'");
}

std::string to_string(TissueMethod m) {
  return m == TissueMethod::kOtsu ? "otsu" : "gray200";
}

int tissue_threshold(const SlidePyramid& p, int level, TissueMethod method, int workers) {
  if (method == TissueMethod::kGray200) return 200;
  return otsu_threshold(gray_histogram(p.level(level).pixels, workers));
}

BinaryMask threshold_gray(const RgbImage& img, int max_gray, int workers) {
  BinaryMask mask("", 0, MaskRole::kTissue, img.width(), img.height());
  const auto width = img.width();
  parallel_bands(img.height(), workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
      const std::uint8_t* px = img.pixel(0, y);
      std::uint8_t* row = mask.bits.data() + y * width;
      for (std::ptrdiff_t x = 0; x < width; ++x, px += 3) row[x] = gray_level(px) <= max_gray;
    }
  });
  return mask;
}

BinaryMask tissue_mask(const SlidePyramid& p, int level, TissueMethod method, int workers) {
  const int t = tissue_threshold(p, level, method, workers);
  BinaryMask mask = threshold_gray(p.level(level).pixels, t, workers);
  mask.slide_id = p.slide_id;
  mask.level = level;
  return mask;
}

BinaryMask refine_labels(const BinaryMask& gt, const BinaryMask& tissue) {
  require_same_geometry(gt, tissue, "refine_labels");
  BinaryMask out = gt;
  out.role = MaskRole::kRefined;
  out.bits = gt.bits * tissue.bits;
  return out;
}

BinaryMask crop(const BinaryMask& mask, const BoundingBox& box) {
  if (box.x0 < 0 || box.y0 < 0 || box.x0 >= box.x1 || box.y0 >= box.y1 ||
      box.x1 > mask.width() || box.y1 > mask.height())
    throw Error(ErrorCode::kInvalidArgument,
                "crop: box [" + std::to_string(box.x0) + "," + std::to_string(box.x1) + ")x[" +
                    std::to_string(box.y0) + "," + std::to_string(box.y1) +
                    ") outside mask " + std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()));
  BinaryMask out = mask;
  out.bits = mask.bits.block(box.y0, box.x0, box.height(), box.width());
  return out;
}

std::optional<BoundingBox> bounding_box_of(const BinaryMask& mask) {
  BoundingBox box{mask.width(), mask.height(), 0, 0};
  bool any = false;
  for (std::ptrdiff_t y = 0; y < mask.height(); ++y)
    for (std::ptrdiff_t x = 0; x < mask.width(); ++x) {
      if (!mask.bits(y, x)) continue;
      any = true;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x + 1);
      box.y1 = std::max(box.y1, y + 1);
    }
  if (!any) return std::nullopt;
  return box;
}

BinaryMask upsample_nearest(const BinaryMask& mask, int target_level, std::ptrdiff_t width,
                            std::ptrdiff_t height) {
  const int shift = mask.level - target_level;
  if (shift < 0)
    throw Error(ErrorCode::kDimensionMismatch,
                "upsample_nearest: mask level " + std::to_string(mask.level) +
                    " is finer than target level " + std::to_string(target_level));
  if (mask.width() != level_extent(width, shift) || mask.height() != level_extent(height, shift))
    throw Error(ErrorCode::kDimensionMismatch,
                "upsample_nearest: " + std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()) + " mask does not match target " +
                    std::to_string(width) + "x" + std::to_string(height) + " at shift " +
                    std::to_string(shift));
  BinaryMask out(mask.slide_id, target_level, mask.role, width, height);
  for (std::ptrdiff_t y = 0; y < height; ++y)
    for (std::ptrdiff_t x = 0; x < width; ++x) out.bits(y, x) = mask.bits(y >> shift, x >> shift);
  return out;
}

ChannelStats channel_stats(const RgbImage& img) {
  ChannelStats s;
  const double n = static_cast<double>(img.width() * img.height());
  for (int c = 0; c < 3; ++c) {
    // Channel c is every third column of the interleaved raster.
    Eigen::Map<const Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>, 0, Eigen::InnerStride<3>>
        channel(img.data.data() + c, img.data.size() / 3);
    const auto values = channel.cast<double>();
    s.mean[c] = values.sum() / n;
    s.stddev[c] = std::sqrt((values - s.mean[c]).square().sum() / n);
  }
  return s;
}

RgbImage normalize_colors(const RgbImage& img, const ChannelStats& reference, int workers) {
  const ChannelStats src = channel_stats(img);
  RgbImage out = img;
  std::array<double, 3> gain{};
  for (int c = 0; c < 3; ++c)
    gain[c] = src.stddev[c] > 0.0 ? reference.stddev[c] / src.stddev[c] : 0.0;
  const auto width = img.width();
  parallel_bands(img.height(), workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    for (std::ptrdiff_t y = y0; y < y1; ++y)
      for (std::ptrdiff_t x = 0; x < width; ++x) {
        std::uint8_t* px = out.pixel(x, y);
        for (int c = 0; c < 3; ++c) {
          const double v = (px[c] - src.mean[c]) * gain[c] + reference.mean[c];
          px[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
        }
      }
  });
  return out;
}

void write_mask(const BinaryMask& mask, const fs::path& path) {
  Raster<std::uint8_t> img = mask.bits * std::uint8_t{255};
  write_pgm(img, path);
  nlohmann::ordered_json side;
  side["slide_id"] = mask.slide_id;
  side["level"] = mask.level;
  side["role"] = to_string(mask.role);
  const fs::path sidecar = path.string() + ".json";
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, sidecar.string() + ": cannot open for writing");
  out << side.dump(2) << "\n";
}

BinaryMask read_mask(const fs::path& path, MaskRole fallback_role) {
  Raster<std::uint8_t> img = read_pgm(path);
  if (((img != 0) && (img != 255)).any())
    throw Error(ErrorCode::kSchema, path.string() + ": mask pixels must be 0 or 255");
  BinaryMask mask(path.stem().string(), 0, fallback_role, img.cols(), img.rows());
  mask.bits = (img == 255).cast<std::uint8_t>();
  const fs::path sidecar = path.string() + ".json";
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    try {
      const auto side = nlohmann::json::parse(in);
      mask.slide_id = side.at("slide_id").get<std::string>();
      mask.level = side.at("level").get<int>();
      if (side.contains("role")) mask.role = mask_role_from_string(side["role"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema, sidecar.string() + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, sidecar.string() + ": " + e.what());
    }
  }
  return mask;
}

}  // namespace wsibench
