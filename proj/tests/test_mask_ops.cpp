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

#include "doctest.h"
#include "oracles.hpp"
#include "wsibench/error.hpp"
#include "wsibench/mask_ops.hpp"
#include "wsibench/random.hpp"
#include "wsibench/synth.hpp"

using namespace wsibench;

namespace {

// Mixes integer, half-integer (pixel centre) and arbitrary coordinates so
// ties with pixel centres and horizontal edges occur often.
double coord(Rng& rng, double lo, double hi) {
  const double v = rng.uniform(lo, hi);
  switch (rng.uniform_int(0, 2)) {
    case 0: return std::floor(v);
    case 1: return std::floor(v) + 0.5;
    default: return v;
  }
}

AnnotationSet random_polygons(Rng& rng, int width, int height, int count) {
  AnnotationSet a;
  a.slide_id = "r";
  for (int i = 0; i < count; ++i) {
    Annotation ann{"p" + std::to_string(i), i % 2 ? "Tumor" : "Other", {}};
    const int n = static_cast<int>(rng.uniform_int(3, 10));
    for (int k = 0; k < n; ++k)
      ann.vertices.push_back({coord(rng, -8, width + 8), coord(rng, -8, height + 8)});
    a.annotations.push_back(ann);
  }
  return a;
}

std::vector<std::vector<oracle::Vertex>> to_oracle(const AnnotationSet& a, const std::string& group = "") {
  std::vector<std::vector<oracle::Vertex>> polys;
  for (const auto& ann : a.annotations) {
    if (!group.empty() && ann.group != group) continue;
    std::vector<oracle::Vertex> p;
    for (const auto& v : ann.vertices) p.push_back({v.x, v.y});
    polys.push_back(p);
  }
  return polys;
}

std::vector<std::uint8_t> flat(const BinaryMask& m) {
  return std::vector<std::uint8_t>(m.bits.data(), m.bits.data() + m.bits.size());
}

BinaryMask random_mask(Rng& rng, std::ptrdiff_t w, std::ptrdiff_t h, double p) {
  BinaryMask m("m", 0, MaskRole::kGroundTruth, w, h);
  for (std::ptrdiff_t i = 0; i < m.bits.size(); ++i) m.bits.data()[i] = rng.uniform() < p;
  return m;
}

AnnotationSet square(double side) {
  return {"s", {{"sq", "Tumor", {{0, 0}, {side, 0}, {side, side}, {0, side}}}}};
}

}  // namespace

TEST_CASE("square covers exactly its pixel centres") {
  const BinaryMask m0 = rasterize(square(4), 0, 8, 8);
  CHECK(m0.count() == 16);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(m0.at(x, y));
  const BinaryMask m1 = rasterize(square(4), 1, 4, 4);
  CHECK(m1.count() == 4);
  CHECK(m1.at(1, 1));
  CHECK(rasterize(AnnotationSet{"s", {}}, 0, 5, 5).count() == 0);
}

TEST_CASE("rasterization equals the point-in-polygon oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = static_cast<int>(rng.uniform_int(1, 128));
    const int h = static_cast<int>(rng.uniform_int(1, 128));
    const int level = static_cast<int>(rng.uniform_int(0, 2));
    const AnnotationSet a = random_polygons(rng, w << level, h << level, static_cast<int>(rng.uniform_int(1, 3)));
    CAPTURE(trial);
    CHECK(flat(rasterize(a, level, w, h)) == oracle::rasterize(to_oracle(a), level, w, h));
    CHECK(flat(rasterize(a, level, w, h, "Tumor")) == oracle::rasterize(to_oracle(a, "Tumor"), level, w, h));
    CHECK(flat(rasterize(a, level, w, h, "", 4)) == flat(rasterize(a, level, w, h, "", 1)));
  }
}

TEST_CASE("level k+1 equals level k of the halved polygon") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const AnnotationSet a = random_polygons(rng, 200, 200, 2);
    AnnotationSet half = a;
    for (auto& ann : half.annotations)
      for (auto& v : ann.vertices) v = {v.x / 2, v.y / 2};
    CHECK(flat(rasterize(a, 1, 100, 100)) == flat(rasterize(half, 0, 100, 100)));
    CHECK(flat(rasterize(a, 2, 50, 50)) == flat(rasterize(half, 1, 50, 50)));
  }
}

TEST_CASE("degenerate polygon contributes nothing") {
  AnnotationSet a{"s", {{"line", "Tumor", {{0, 0}, {10, 10}, {20, 20}}}}};
  CHECK(rasterize(a, 0, 32, 32).count() == 0);
  CHECK(count_degenerate_polygons(a, 0) == 1);
  // a tiny square keeps a positive area at any level, a repeated point does not
  CHECK(count_degenerate_polygons(square(1), 3) == 0);
  AnnotationSet dot{"s", {{"dot", "Tumor", {{5, 5}, {5, 5}, {5, 5}}}}};
  CHECK(count_degenerate_polygons(dot, 2) == 1);
  CHECK(rasterize(dot, 0, 16, 16).count() == 0);
}

TEST_CASE("otsu on the two-spike histogram picks the smallest split") {
  GrayHistogram h{};
  h[0] = 50;
  h[255] = 50;
  CHECK(otsu_threshold(h) == 0);
}

TEST_CASE("otsu rejects single-bin histograms") {
  GrayHistogram h{};
  h[77] = 1000;
  try {
    otsu_threshold(h);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateHistogram);
  }
  CHECK_THROWS_AS(otsu_threshold(GrayHistogram{}), Error);
}

TEST_CASE("otsu equals exhaustive rational search") {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    GrayHistogram h{};
    std::vector<std::uint64_t> v(256, 0);
    const int mode = trial % 3;
    for (int g = 0; g < 256; ++g) {
      if (mode == 0) h[g] = static_cast<std::uint64_t>(rng.uniform_int(0, 1000));
      if (mode == 1 && rng.uniform() < 0.05) h[g] = static_cast<std::uint64_t>(rng.uniform_int(1, 4));
      if (mode == 2) h[g] = g < 128 ? static_cast<std::uint64_t>(rng.uniform_int(0, 3000)) : 0;
    }
    if (mode == 1 && trial % 2) {  // symmetric spikes make ties likely
      for (int g = 0; g < 128; ++g) h[255 - g] = h[g];
    }
    h[static_cast<std::size_t>(rng.uniform_int(0, 127))] += 1;
    h[static_cast<std::size_t>(rng.uniform_int(128, 255))] += 1;
    std::copy(h.begin(), h.end(), v.begin());
    CAPTURE(trial);
    CHECK(otsu_threshold(h) == *oracle::otsu(v));
  }
}

TEST_CASE("gray200 tissue rule") {
  RgbImage white(4, 2);
  white.data.setConstant(255);
  CHECK(tissue_mask(build_pyramid("w", white, 1), 0, TissueMethod::kGray200).count() == 0);

  RgbImage img(4, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x)
      std::fill(img.pixel(x, y), img.pixel(x, y) + 3, x < 2 ? 50 : 240);
  const BinaryMask t = tissue_mask(build_pyramid("h", img, 1), 0, TissueMethod::kGray200);
  CHECK(t.count() == 4);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) CHECK(t.at(x, y) == (x < 2));
  CHECK(tissue_threshold(build_pyramid("w", white, 1), 0, TissueMethod::kGray200) == 200);
  CHECK_THROWS_AS(tissue_mask(build_pyramid("w", white, 1), 0, TissueMethod::kOtsu), Error);
}

TEST_CASE("grayscale uses rounded Rec.601 weights") {
  const std::uint8_t px[3] = {255, 0, 0};
  CHECK(gray_level(px) == 76);  // 76.245
  const std::uint8_t px2[3] = {10, 20, 30};
  CHECK(gray_level(px2) == 18);  // 18.15
  const std::uint8_t px3[3] = {1, 1, 255};
  CHECK(gray_level(px3) == 30);  // 29.956
}

TEST_CASE("otsu tissue mask on a synthetic slide matches the oracle threshold") {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.level0_size = 256;
  cfg.levels = 2;
  cfg.min_lesion_radius = 10;
  cfg.max_lesion_radius = 20;
  const SyntheticSlide s = generate_slide(cfg, 0);
  for (int level = 0; level < 2; ++level) {
    const RgbImage& img = s.pyramid.level(level).pixels;
    std::vector<std::uint64_t> hist(256, 0);
    for (std::ptrdiff_t y = 0; y < img.height(); ++y)
      for (std::ptrdiff_t x = 0; x < img.width(); ++x) {
        const std::uint8_t* p = img.pixel(x, y);
        ++hist[static_cast<std::size_t>(std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]))];
      }
    const int t = *oracle::otsu(hist);
    CHECK(tissue_threshold(s.pyramid, level, TissueMethod::kOtsu) == t);
    const BinaryMask m = tissue_mask(s.pyramid, level, TissueMethod::kOtsu, 3);
    std::int64_t mismatches = 0;
    for (std::ptrdiff_t y = 0; y < img.height(); ++y)
      for (std::ptrdiff_t x = 0; x < img.width(); ++x)
        mismatches += m.at(x, y) != (gray_level(img.pixel(x, y)) <= t);
    CHECK(mismatches == 0);
  }
}

TEST_CASE("refine is a pixelwise AND, idempotent and monotone") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const BinaryMask gt = random_mask(rng, 33, 17, 0.4);
    const BinaryMask tissue = random_mask(rng, 33, 17, 0.6);
    const BinaryMask r = refine_labels(gt, tissue);
    CHECK(r.role == MaskRole::kRefined);
    std::int64_t both = 0;
    for (std::ptrdiff_t i = 0; i < gt.bits.size(); ++i) both += gt.bits.data()[i] && tissue.bits.data()[i];
    CHECK(r.count() == both);
    CHECK(r.count() <= gt.count());
    CHECK(refine_labels(r, tissue).same_pixels(r));
  }
  const BinaryMask gt = random_mask(rng, 8, 8, 0.5);
  BinaryMask ones("m", 0, MaskRole::kTissue, 8, 8);
  ones.bits.setOnes();
  CHECK(refine_labels(gt, ones).same_pixels(gt));
  CHECK(refine_labels(gt, BinaryMask("m", 0, MaskRole::kTissue, 8, 8)).count() == 0);
  CHECK_THROWS_AS(refine_labels(gt, BinaryMask("m", 0, MaskRole::kTissue, 8, 9)), Error);
}

TEST_CASE("annotation covering background is trimmed by refine") {
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.level0_size = 256;
  cfg.levels = 1;
  cfg.min_lesion_radius = 15;
  cfg.max_lesion_radius = 25;
  cfg.noise.label_background_inclusion = true;
  const SyntheticSlide s = generate_slide(cfg, 1);
  const BinaryMask ann = rasterize(s.annotations, 0, 256, 256);
  const BinaryMask tissue = tissue_mask(s.pyramid, 0, TissueMethod::kGray200);
  const BinaryMask r = refine_labels(ann, tissue);
  std::int64_t both = 0;
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x) both += ann.at(x, y) && tissue.at(x, y);
  CHECK(r.count() == both);
  CHECK(r.count() < ann.count());  // the blank holes are removed
}

TEST_CASE("crop and bounding box") {
  Rng rng(15);
  const BinaryMask m = random_mask(rng, 20, 10, 0.3);
  CHECK(crop(m, {0, 0, 20, 10}).same_pixels(m));
  const BinaryMask one = crop(m, {7, 3, 8, 4});
  CHECK(one.width() == 1);
  CHECK(one.at(0, 0) == m.at(7, 3));
  const BinaryMask w = crop(m, {2, 1, 15, 9});
  std::int64_t inside = 0;
  for (int y = 1; y < 9; ++y)
    for (int x = 2; x < 15; ++x) inside += m.at(x, y);
  CHECK(w.count() == inside);
  CHECK_THROWS_AS(crop(m, {0, 0, 21, 10}), Error);
  CHECK_THROWS_AS(crop(m, {5, 5, 5, 6}), Error);

  BinaryMask blank("b", 0, MaskRole::kGroundTruth, 6, 6);
  CHECK_FALSE(bounding_box_of(blank).has_value());
  blank.set(1, 2, true);
  blank.set(4, 3, true);
  CHECK(*bounding_box_of(blank) == BoundingBox{1, 2, 5, 4});
}

TEST_CASE("nearest upsampling replicates pixels") {
  BinaryMask m("m", 1, MaskRole::kPrediction, 3, 2);
  m.set(2, 1, true);
  const BinaryMask up = upsample_nearest(m, 0, 5, 4);
  CHECK(up.level == 0);
  CHECK(up.count() == 2);  // column 4 of rows 2..3; the odd edge is cropped
  CHECK(up.at(4, 2));
  CHECK(up.at(4, 3));
  CHECK_THROWS_AS(upsample_nearest(m, 0, 8, 4), Error);
}

TEST_CASE("mask files round trip with their sidecar") {
  oracle::TempDir tmp("mask");
  Rng rng(16);
  BinaryMask m = random_mask(rng, 13, 7, 0.5);
  m.slide_id = "slide_x";
  m.level = 2;
  m.role = MaskRole::kTissue;
  write_mask(m, tmp / "m.pgm");
  const BinaryMask r = read_mask(tmp / "m.pgm");
  CHECK(r.same_pixels(m));
  CHECK(r.slide_id == "slide_x");
  CHECK(r.level == 2);
  CHECK(r.role == MaskRole::kTissue);

  Raster<std::uint8_t> bad = Raster<std::uint8_t>::Constant(2, 2, 7);
  write_pgm(bad, tmp / "bad.pgm");
  CHECK_THROWS_AS(read_mask(tmp / "bad.pgm"), Error);
}

TEST_CASE("colour normalization matches reference moments") {
  Rng rng(17);
  RgbImage img(64, 64), ref(64, 64);
  for (std::ptrdiff_t i = 0; i < img.data.size(); ++i) {
    img.data.data()[i] = static_cast<std::uint8_t>(rng.uniform_int(60, 120));
    ref.data.data()[i] = static_cast<std::uint8_t>(rng.uniform_int(100, 220));
  }
  const ChannelStats target = channel_stats(ref);
  const ChannelStats got = channel_stats(normalize_colors(img, target));
  for (int c = 0; c < 3; ++c) {
    CHECK(got.mean[c] == doctest::Approx(target.mean[c]).epsilon(0.01));
    CHECK(got.stddev[c] == doctest::Approx(target.stddev[c]).epsilon(0.03));
  }
  CHECK(normalize_colors(img, target, 1) == normalize_colors(img, target, 4));
}
