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
#include <map>
#include <string>
#include <vector>

#include "wsibench/coteach.hpp"
#include "wsibench/metrics.hpp"
#include "wsibench/raster.hpp"
#include "wsibench/slide_io.hpp"

namespace wsibench {

struct SynthNoise {
  int annotation_dilation = 0;             // annotation polygons pushed outward, pixels
  bool label_background_inclusion = false;  // blank holes inside lesions stay annotated
};

struct SynthConfig {
  std::uint64_t seed = 0;
  int slides = 5;        // test slides, evaluated against team predictions
  int train_slides = 15;  // annotated only
  std::ptrdiff_t level0_size = 2048;
  int levels = 3;
  int min_lesions = 1;
  int max_lesions = 3;
  double min_lesion_radius = 40.0;
  double max_lesion_radius = 120.0;
  std::array<double, 3> subtype_ratio{6.0, 3.0, 1.0};  // SCC : SCLC : ADC
  SynthNoise noise;
  double lesion_contrast = 1.0;  // 0 paints lesions in the stroma colour
  double mpp_level0 = 0.5;

  void validate() const;
};

struct SyntheticSlide {
  SlidePyramid pyramid;
  AnnotationSet annotations;
  BinaryMask true_mask;  // level 0
  Subtype subtype = Subtype::kUnknown;
};

std::string synthetic_slide_id(int index);

/// Subtype of slide `index`, drawn from the weighted ratio.
Subtype draw_subtype(const SynthConfig& cfg, int index);

/// Pure function of (cfg, index): near-white background, a textured tissue
/// blob and lesion polygons inside it. Without noise flags the annotations
/// rasterize exactly to the true mask.
SyntheticSlide generate_slide(const SynthConfig& cfg, int index, int workers = 1);

struct CorruptionSpec {
  int radius = 0;  // > 0 dilates, < 0 erodes, square window clipped to the image
  double flip_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Morphology then independent per-pixel flips; flip decisions are a pure
/// function of (seed, pixel index), so equal seeds give nested flip sets.
BinaryMask corrupt_prediction(const BinaryMask& truth, const CorruptionSpec& spec, int workers = 1);

struct TeamSpec {
  std::string name;
  std::string group = "SingleModel";
  CorruptionSpec corruption;
};

/// "name:group:radius:flip_rate:seed"
TeamSpec parse_team_spec(const std::string& text);

/// Plain per-pixel tally, kept separate from the metrics module.
ConfusionCounts tally_confusion(const BinaryMask& gt, const BinaryMask& pred);

/// Writes slides/, annotations/, gt/, predictions/<team>/, subtypes.csv,
/// teams.csv, truth_table.csv and challenge.json under `out`.
void generate_challenge(const SynthConfig& cfg, const std::vector<TeamSpec>& teams,
                        const fs::path& out, int workers = 1);

/// Truth table rows in file order.
struct TruthRow {
  std::string slide_id;
  std::string team;
  ConfusionCounts counts;
};
std::vector<TruthRow> read_truth_table(const fs::path& path);

/// slide_id -> subtype from a slide_id,subtype CSV.
std::map<std::string, Subtype> read_subtypes(const fs::path& path);

/// team -> group from a team,group CSV.
std::map<std::string, std::string> read_team_groups(const fs::path& path);

/// Small pixel-classification task on synthetic slides: training tiles with
/// symmetric label noise at `noise_rate`, test tiles with clean labels.
struct PixelBenchmark {
  std::vector<PixelBatch<double>> train;
  std::vector<PixelBatch<double>> test;
};

PixelBenchmark make_pixel_benchmark(std::uint64_t seed, double noise_rate,
                                    std::ptrdiff_t slide_size = 256, std::ptrdiff_t tile = 32,
                                    double lesion_contrast = 0.4);

}  // namespace wsibench
