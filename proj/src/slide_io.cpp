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

#include "wsibench/slide_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wsibench/error.hpp"
#include "wsibench/parallel.hpp"

namespace wsibench {

namespace {

using ordered_json = nlohmann::ordered_json;

// Reads the whitespace/comment separated header fields of a PNM file.
class PnmHeaderReader {
 public:
  PnmHeaderReader(std::istream& in, const fs::path& path) : in_(in), path_(path) {}

  long next_int(const char* field) {
    skip_space_and_comments();
    std::string digits;
    while (std::isdigit(in_.peek())) digits.push_back(static_cast<char>(in_.get()));
    if (digits.empty() || digits.size() > 9)
      throw Error(ErrorCode::kSchema, path_.string() + ": bad PNM header field '" + field + "'");
    return std::stol(digits);
  }

 private:
  void skip_space_and_comments() {
    for (;;) {
      const int c = in_.peek();
      if (c == '#') {
        std::string ignored;
        std::getline(in_, ignored);
      } else if (std::isspace(c)) {
        in_.get();
      } else {
        return;
      }
    }
  }

  std::istream& in_;
  const fs::path& path_;
};

struct PnmData {
  long width = 0;
  long height = 0;
  std::vector<char> bytes;
};

PnmData read_pnm(const fs::path& path, const char* magic, int channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  char m[2] = {0, 0};
  in.read(m, 2);
  if (!in || m[0] != magic[0] || m[1] != magic[1])
    throw Error(ErrorCode::kSchema,
                path.string() + ": expected magic " + std::string(magic, 2));
  PnmHeaderReader header(in, path);
  PnmData out;
  out.width = header.next_int("width");
  out.height = header.next_int("height");
  const long maxval = header.next_int("maxval");
  if (out.width < 1 || out.height < 1)
    throw Error(ErrorCode::kSchema, path.string() + ": width/height must be >= 1");
  if (maxval != 255)
    throw Error(ErrorCode::kSchema, path.string() + ": maxval must be 255");
  if (!std::isspace(in.get()))
    throw Error(ErrorCode::kSchema, path.string() + ": missing whitespace after maxval");
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * channels;
  out.bytes.resize(n);
  in.read(out.bytes.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw Error(ErrorCode::kSchema, path.string() + ": truncated raster payload");
  return out;
}

void write_pnm(const fs::path& path, const char* magic, std::ptrdiff_t width,
               std::ptrdiff_t height, const std::uint8_t* data, std::size_t n) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << magic << "\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

}  // namespace

const PyramidLevel& SlidePyramid::level(int k) const {
  if (k < 0 || k >= level_count())
    throw Error(ErrorCode::kInvalidArgument,
                slide_id + ": level " + std::to_string(k) + " does not exist");
  return levels[static_cast<std::size_t>(k)];
}

void validate_pyramid(const SlidePyramid& p) {
  if (p.levels.empty()) throw Error(ErrorCode::kSchema, p.slide_id + ": pyramid has no levels");
  if (p.mpp_level0 && !(*p.mpp_level0 > 0.0))
    throw Error(ErrorCode::kSchema, p.slide_id + ": mpp_level0 must be positive");
  const auto w0 = p.levels[0].width();
  const auto h0 = p.levels[0].height();
  if (w0 < 1 || h0 < 1) throw Error(ErrorCode::kSchema, p.slide_id + ": level 0 is empty");
  for (std::size_t k = 0; k < p.levels.size(); ++k) {
    const auto& lv = p.levels[k];
    if (lv.index != static_cast<int>(k))
      throw Error(ErrorCode::kSchema, p.slide_id + ": level " + std::to_string(k) +
                                          " has index " + std::to_string(lv.index));
    if (lv.width() != level_extent(w0, static_cast<int>(k)) ||
        lv.height() != level_extent(h0, static_cast<int>(k)))
      throw Error(ErrorCode::kDimensionMismatch,
                  p.slide_id + ": level " + std::to_string(k) + " is " +
                      std::to_string(lv.width()) + "x" + std::to_string(lv.height()) +
                      ", halving rule requires " +
                      std::to_string(level_extent(w0, static_cast<int>(k))) + "x" +
                      std::to_string(level_extent(h0, static_cast<int>(k))));
  }
}

RgbImage downsample2(const RgbImage& src, int workers) {
  const auto sw = src.width();
  const auto sh = src.height();
  RgbImage dst(level_extent(sw, 1), level_extent(sh, 1));
  const auto dw = dst.width();
  parallel_bands(dst.height(), workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
      const std::ptrdiff_t sy = 2 * y;
      const std::ptrdiff_t ny = (sy + 1 < sh) ? 2 : 1;
      for (std::ptrdiff_t x = 0; x < dw; ++x) {
        const std::ptrdiff_t sx = 2 * x;
        const std::ptrdiff_t nx = (sx + 1 < sw) ? 2 : 1;
        unsigned sum[3] = {0, 0, 0};
        for (std::ptrdiff_t j = 0; j < ny; ++j)
          for (std::ptrdiff_t i = 0; i < nx; ++i) {
            const std::uint8_t* px = src.pixel(sx + i, sy + j);
            sum[0] += px[0];
            sum[1] += px[1];
            sum[2] += px[2];
          }
        const unsigned n = static_cast<unsigned>(nx * ny);
        std::uint8_t* out = dst.pixel(x, y);
        for (int c = 0; c < 3; ++c) out[c] = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
      }
    }
  });
  return dst;
}

SlidePyramid build_pyramid(std::string slide_id, RgbImage level0, int level_count,
                           std::optional<double> mpp_level0, int workers) {
  if (level_count < 1)
    throw Error(ErrorCode::kInvalidArgument, "build_pyramid: level_count must be >= 1");
  SlidePyramid p;
  p.slide_id = std::move(slide_id);
  p.mpp_level0 = mpp_level0;
  p.levels.push_back({0, std::move(level0)});
  for (int k = 1; k < level_count; ++k)
    p.levels.push_back({k, downsample2(p.levels.back().pixels, workers)});
  validate_pyramid(p);
  return p;
}

RgbImage read_ppm(const fs::path& path) {
  PnmData raw = read_pnm(path, "P6", 3);
  RgbImage img(raw.width, raw.height);
  std::copy(raw.bytes.begin(), raw.bytes.end(), reinterpret_cast<char*>(img.data.data()));
  return img;
}

void write_ppm(const RgbImage& img, const fs::path& path) {
  write_pnm(path, "P6", img.width(), img.height(), img.data.data(),
            static_cast<std::size_t>(img.data.size()));
}

Raster<std::uint8_t> read_pgm(const fs::path& path) {
  PnmData raw = read_pnm(path, "P5", 1);
  Raster<std::uint8_t> img(raw.height, raw.width);
  std::copy(raw.bytes.begin(), raw.bytes.end(), reinterpret_cast<char*>(img.data()));
  return img;
}

void write_pgm(const Raster<std::uint8_t>& img, const fs::path& path) {
  write_pnm(path, "P5", img.cols(), img.rows(), img.data(), static_cast<std::size_t>(img.size()));
}

void ensure_parent_dir(const fs::path& path) {
  if (!path.has_parent_path()) return;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::kIo, path.parent_path().string() + ": " + ec.message());
}

SlidePyramid read_pyramid(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kIo, manifest_path.string() + ": cannot open manifest");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, manifest_path.string() + ": " + e.what());
  }
  const std::string where = manifest_path.string();
  SlidePyramid p;
  try {
    p.slide_id = doc.at("slide_id").get<std::string>();
    if (doc.contains("mpp_level0") && !doc["mpp_level0"].is_null())
      p.mpp_level0 = doc["mpp_level0"].get<double>();
    const auto& levels = doc.at("levels");
    if (!levels.is_array() || levels.empty())
      throw Error(ErrorCode::kSchema, where + ": field 'levels' must be a non-empty array");
    const auto w0 = levels[0].at("width").get<std::ptrdiff_t>();
    const auto h0 = levels[0].at("height").get<std::ptrdiff_t>();
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const auto& lv = levels[k];
      const int index = lv.at("index").get<int>();
      const auto w = lv.at("width").get<std::ptrdiff_t>();
      const auto h = lv.at("height").get<std::ptrdiff_t>();
      const std::string field = "levels[" + std::to_string(k) + "]";
      if (index != static_cast<int>(k))
        throw Error(ErrorCode::kSchema, where + ": " + field + ".index must be " + std::to_string(k));
      if (w != level_extent(w0, index) || h != level_extent(h0, index))
        throw Error(ErrorCode::kDimensionMismatch,
                    where + ": " + field + " declares " + std::to_string(w) + "x" +
                        std::to_string(h) + " but halving rule requires " +
                        std::to_string(level_extent(w0, index)) + "x" +
                        std::to_string(level_extent(h0, index)));
      const fs::path file = manifest_path.parent_path() / lv.at("file").get<std::string>();
      if (!fs::exists(file))
        throw Error(ErrorCode::kIo, where + ": " + field + ".file missing: " + file.string());
      RgbImage img = read_ppm(file);
      if (img.width() != w || img.height() != h)
        throw Error(ErrorCode::kDimensionMismatch,
                    file.string() + ": raster is " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " but manifest declares " +
                        std::to_string(w) + "x" + std::to_string(h));
      p.levels.push_back({index, std::move(img)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, where + ": " + e.what());
  }
  validate_pyramid(p);
  return p;
}

fs::path write_pyramid(const SlidePyramid& p, const fs::path& dir) {
  validate_pyramid(p);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, dir.string() + ": " + ec.message());
  ordered_json doc;
  doc["slide_id"] = p.slide_id;
  doc["mpp_level0"] = p.mpp_level0 ? ordered_json(*p.mpp_level0) : ordered_json(nullptr);
  doc["levels"] = ordered_json::array();
  for (const auto& lv : p.levels) {
    const std::string file = "level" + std::to_string(lv.index) + ".ppm";
    write_ppm(lv.pixels, dir / file);
    doc["levels"].push_back(
        {{"index", lv.index}, {"width", lv.width()}, {"height", lv.height()}, {"file", file}});
  }
  const fs::path manifest = dir / "manifest.json";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, manifest.string() + ": cannot open for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, manifest.string() + ": write failed");
  return manifest;
}

std::string to_string(MaskRole role) {
  switch (role) {
    case MaskRole::kGroundTruth: return "GroundTruth";
    case MaskRole::kPrediction: return "Prediction";
    case MaskRole::kTissue: return "Tissue";
    case MaskRole::kRefined: return "Refined";
  }
  return "GroundTruth";
}

MaskRole mask_role_from_string(const std::string& s) {
  if (s == "GroundTruth") return MaskRole::kGroundTruth;
  if (s == "Prediction") return MaskRole::kPrediction;
  if (s == "Tissue") return MaskRole::kTissue;
  if (s == "Refined") return MaskRole::kRefined;
  throw Error(ErrorCode::kSchema, "unknown mask role '" + s + "'");
}

}  // namespace wsibench
