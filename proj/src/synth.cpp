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

#include "wsibench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wsibench/error.hpp"
#include "wsibench/mask_ops.hpp"
#include "wsibench/parallel.hpp"
#include "wsibench/random.hpp"
#include "wsibench/tiling.hpp"

namespace wsibench {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kTissueVertices = 48;
constexpr int kLesionVertices = 24;
constexpr int kHoleVertices = 16;
constexpr double kTissueWobble = 0.15;
constexpr double kLesionWobble = 0.2;
constexpr std::ptrdiff_t kNoiseCell = 16;

struct Blob {
  Point center;
  std::vector<double> radii;  // one per vertex, evenly spaced angles

  double min_radius() const { return *std::min_element(radii.begin(), radii.end()); }
  double max_radius() const { return *std::max_element(radii.begin(), radii.end()); }

  /// Radius of a disk around the center that lies inside the polygon.
  double inscribed() const { return min_radius() * std::cos(kPi / static_cast<double>(radii.size())); }

  std::vector<Point> polygon(double extra = 0.0) const {
    std::vector<Point> pts;
    const auto n = radii.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
      pts.push_back({center.x + (radii[i] + extra) * std::cos(a),
                     center.y + (radii[i] + extra) * std::sin(a)});
    }
    return pts;
  }
};

// Smooth star-shaped outline: three low harmonics modulate the radius.
Blob make_blob(Point center, double radius, int vertices, double wobble, Rng& rng) {
  double amp[3], phase[3];
  const int harmonic[3] = {2, 3, 5};
  for (int k = 0; k < 3; ++k) {
    amp[k] = rng.uniform(-1.0, 1.0) / 3.0;
    phase[k] = rng.uniform(0.0, 2.0 * kPi);
  }
  Blob b{center, {}};
  for (int i = 0; i < vertices; ++i) {
    const double a = 2.0 * kPi * i / vertices;
    double m = 0.0;
    for (int k = 0; k < 3; ++k) m += amp[k] * std::sin(harmonic[k] * a + phase[k]);
    b.radii.push_back(radius * (1.0 + wobble * m));
  }
  return b;
}

Point point_in_disk(Point c, double max_dist, Rng& rng) {
  const double a = rng.uniform(0.0, 2.0 * kPi);
  const double d = max_dist * std::sqrt(rng.uniform());
  return {c.x + d * std::cos(a), c.y + d * std::sin(a)};
}

struct Palette {
  int base[3];
  int amplitude;
};

// Row-wise prefix-sum box filter; `dilate` keeps a pixel if any neighbor in
// the window is set, otherwise only if all are.
Raster<std::uint8_t> box_morphology(const Raster<std::uint8_t>& in, int r, bool dilate,
                                    bool horizontal, int workers) {
  Raster<std::uint8_t> out(in.rows(), in.cols());
  const std::ptrdiff_t lines = horizontal ? in.rows() : in.cols();
  const std::ptrdiff_t len = horizontal ? in.cols() : in.rows();
  parallel_bands(lines, workers, [&](std::ptrdiff_t l0, std::ptrdiff_t l1, std::ptrdiff_t) {
    std::vector<std::int64_t> prefix(static_cast<std::size_t>(len + 1));
    for (std::ptrdiff_t l = l0; l < l1; ++l) {
      auto get = [&](std::ptrdiff_t i) { return horizontal ? in(l, i) : in(i, l); };
      prefix[0] = 0;
      for (std::ptrdiff_t i = 0; i < len; ++i)
        prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + get(i);
      for (std::ptrdiff_t i = 0; i < len; ++i) {
        const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, i - r);
        const std::ptrdiff_t b = std::min<std::ptrdiff_t>(len, i + r + 1);
        const std::int64_t set = prefix[static_cast<std::size_t>(b)] - prefix[static_cast<std::size_t>(a)];
        const std::uint8_t v = dilate ? set > 0 : set == b - a;
        if (horizontal)
          out(l, i) = v;
        else
          out(i, l) = v;
      }
    }
  });
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  return cells;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != expected_header)
    throw Error(ErrorCode::kSchema, path.string() + ": header must be '" + expected_header + "'");
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != columns)
      throw Error(ErrorCode::kSchema, path.string() + ":" + std::to_string(line_no) +
                                          ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

}  // namespace

void SynthConfig::validate() const {
  if (slides < 0 || train_slides < 0 || slides + train_slides < 1)
    throw Error(ErrorCode::kInvalidArgument, "synth: need at least one slide");
  if (level0_size < 16) throw Error(ErrorCode::kInvalidArgument, "synth: level0_size must be >= 16");
  if (levels < 1) throw Error(ErrorCode::kInvalidArgument, "synth: levels must be >= 1");
  if (min_lesions < 0 || max_lesions < min_lesions)
    throw Error(ErrorCode::kInvalidArgument, "synth: bad lesion count range");
  if (!(min_lesion_radius > 0.0) || max_lesion_radius < min_lesion_radius)
    throw Error(ErrorCode::kInvalidArgument, "synth: bad lesion radius range");
  if (subtype_ratio[0] < 0 || subtype_ratio[1] < 0 || subtype_ratio[2] < 0 ||
      subtype_ratio[0] + subtype_ratio[1] + subtype_ratio[2] <= 0)
    throw Error(ErrorCode::kInvalidArgument, "synth: subtype weights must be non-negative, not all zero");
  if (noise.annotation_dilation < 0)
    throw Error(ErrorCode::kInvalidArgument, "synth: annotation dilation must be >= 0");
  if (!(lesion_contrast >= 0.0 && lesion_contrast <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "synth: lesion contrast must be in [0,1]");
  if (!(mpp_level0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "synth: mpp must be positive");
}

void CorruptionSpec::validate() const {
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "corruption: flip_rate must be in [0,1]");
}

std::string synthetic_slide_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slide_%03d", index);
  return buf;
}

Subtype draw_subtype(const SynthConfig& cfg, int index) {
  const auto& w = cfg.subtype_ratio;
  const double u = hash_uniform(cfg.seed ^ 0x5B7E0000ull, static_cast<std::uint64_t>(index)) *
                   (w[0] + w[1] + w[2]);
  if (u < w[0]) return Subtype::kSCC;
  if (u < w[0] + w[1]) return Subtype::kSCLC;
  return Subtype::kADC;
}

SyntheticSlide generate_slide(const SynthConfig& cfg, int index, int workers) {
  cfg.validate();
  const std::uint64_t slide_seed = splitmix64(cfg.seed) ^ splitmix64(0xA11CE000ull + index);
  Rng rng(slide_seed);
  const std::ptrdiff_t size = cfg.level0_size;
  const double s = static_cast<double>(size);
  const std::string id = synthetic_slide_id(index);

  const Point center{s / 2 + rng.uniform(-0.05, 0.05) * s, s / 2 + rng.uniform(-0.05, 0.05) * s};
  const Blob tissue = make_blob(center, 0.38 * s, kTissueVertices, kTissueWobble, rng);

  const double margin = cfg.max_lesion_radius * (1.0 + kLesionWobble) + cfg.noise.annotation_dilation + 2.0;
  const double reach = tissue.inscribed() - margin;
  if (reach < 0.0)
    throw Error(ErrorCode::kInvalidArgument,
                "synth: lesion radius " + std::to_string(cfg.max_lesion_radius) +
                    " does not fit inside the tissue of a " + std::to_string(size) + " pixel slide");

  const int n_lesions = static_cast<int>(rng.uniform_int(cfg.min_lesions, cfg.max_lesions));
  std::vector<Blob> lesions;
  std::vector<Blob> holes;
  for (int i = 0; i < n_lesions; ++i) {
    const double radius = rng.uniform(cfg.min_lesion_radius, cfg.max_lesion_radius);
    lesions.push_back(make_blob(point_in_disk(center, reach, rng), radius, kLesionVertices,
                                kLesionWobble, rng));
    if (cfg.noise.label_background_inclusion)
      for (int h = 0; h < 2; ++h)
        holes.push_back(make_blob(point_in_disk(lesions.back().center, 0.4 * radius, rng),
                                  0.25 * radius, kHoleVertices, 0.0, rng));
  }

  auto to_set = [&](const std::vector<Blob>& blobs, const std::string& prefix,
                    const std::string& group, double extra) {
    AnnotationSet set;
    set.slide_id = id;
    for (std::size_t i = 0; i < blobs.size(); ++i)
      set.annotations.push_back({prefix + std::to_string(i), group, blobs[i].polygon(extra)});
    return round_to_printed_precision(std::move(set));
  };
  const AnnotationSet lesion_set = to_set(lesions, "Lesion ", "Tumor", 0.0);
  const AnnotationSet hole_set = to_set(holes, "Hole ", "Background", 0.0);
  const AnnotationSet tissue_set = to_set({tissue}, "Tissue ", "Tissue", 0.0);

  SyntheticSlide out;
  out.subtype = draw_subtype(cfg, index);
  out.annotations = cfg.noise.annotation_dilation > 0
                        ? to_set(lesions, "Annotation ", "Tumor", cfg.noise.annotation_dilation)
                        : to_set(lesions, "Annotation ", "Tumor", 0.0);

  const BinaryMask tissue_mask = rasterize(tissue_set, 0, size, size, "", workers);
  BinaryMask lesion_mask = rasterize(lesion_set, 0, size, size, "", workers);
  const BinaryMask hole_mask = rasterize(hole_set, 0, size, size, "", workers);

  int jitter[3];
  for (int& j : jitter) j = static_cast<int>(rng.uniform_int(-8, 8));
  const Palette background{{238, 236, 240}, 4};
  const Palette stroma{{215, 150, 190}, 12};
  Palette tumor{{150, 82, 160}, 14};
  for (int c = 0; c < 3; ++c)
    tumor.base[c] = stroma.base[c] +
                    static_cast<int>(std::lround(cfg.lesion_contrast * (tumor.base[c] - stroma.base[c])));

  const std::ptrdiff_t cells = size / kNoiseCell + 2;
  Raster<float> lattice(cells, cells);
  const std::uint64_t lattice_seed = rng.next();
  for (std::ptrdiff_t j = 0; j < cells; ++j)
    for (std::ptrdiff_t i = 0; i < cells; ++i)
      lattice(j, i) = static_cast<float>(hash_uniform(lattice_seed, static_cast<std::uint64_t>(j * cells + i)));
  const std::uint64_t grain_seed = rng.next();

  RgbImage level0(size, size);
  parallel_bands(size, workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
      const std::ptrdiff_t cy = y / kNoiseCell;
      const float fy = static_cast<float>(y % kNoiseCell) / kNoiseCell;
      std::uint8_t* px = level0.pixel(0, y);
      for (std::ptrdiff_t x = 0; x < size; ++x, px += 3) {
        const std::ptrdiff_t cx = x / kNoiseCell;
        const float fx = static_cast<float>(x % kNoiseCell) / kNoiseCell;
        const float top = lattice(cy, cx) + fx * (lattice(cy, cx + 1) - lattice(cy, cx));
        const float bottom = lattice(cy + 1, cx) + fx * (lattice(cy + 1, cx + 1) - lattice(cy + 1, cx));
        const float v = top + fy * (bottom - top);

        const bool in_hole = hole_mask.bits(y, x) != 0;
        const Palette* pal = &background;
        if (tissue_mask.bits(y, x) && !in_hole) pal = lesion_mask.bits(y, x) ? &tumor : &stroma;
        const int texture = static_cast<int>(std::lround((2.0f * v - 1.0f) * pal->amplitude));
        const std::uint64_t grain = splitmix64(grain_seed ^ static_cast<std::uint64_t>(y * size + x));
        for (int c = 0; c < 3; ++c) {
          const int fine = static_cast<int>((grain >> (8 * c)) & 7u) - 3;
          px[c] = static_cast<std::uint8_t>(std::clamp(pal->base[c] + jitter[c] + texture + fine, 0, 255));
        }
      }
    }
  });

  if (cfg.noise.label_background_inclusion)
    lesion_mask.bits = lesion_mask.bits * (1 - hole_mask.bits);
  lesion_mask.role = MaskRole::kGroundTruth;
  out.true_mask = std::move(lesion_mask);
  out.pyramid = build_pyramid(id, std::move(level0), cfg.levels, cfg.mpp_level0, workers);
  return out;
}

BinaryMask corrupt_prediction(const BinaryMask& truth, const CorruptionSpec& spec, int workers) {
  spec.validate();
  BinaryMask out = truth;
  out.role = MaskRole::kPrediction;
  if (spec.radius != 0) {
    const int r = std::abs(spec.radius);
    const bool dilate = spec.radius > 0;
    out.bits = box_morphology(box_morphology(truth.bits, r, dilate, true, workers), r, dilate, false,
                              workers);
  }
  if (spec.flip_rate > 0.0) {
    const auto width = out.width();
    parallel_bands(out.height(), workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
      for (std::ptrdiff_t y = y0; y < y1; ++y)
        for (std::ptrdiff_t x = 0; x < width; ++x)
          if (hash_uniform(spec.seed, static_cast<std::uint64_t>(y * width + x)) < spec.flip_rate)
            out.bits(y, x) ^= 1;
    });
  }
  return out;
}

TeamSpec parse_team_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.size() != 5)
    throw Error(ErrorCode::kInvalidArgument,
                "team spec '" + text + "' must be name:group:radius:flip_rate:seed");
  TeamSpec t;
  t.name = parts[0];
  t.group = parts[1];
  if (t.name.empty() ||
      t.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
          std::string::npos)
    throw Error(ErrorCode::kInvalidArgument, "team spec '" + text + "': bad team name");
  try {
    std::size_t used = 0;
    t.corruption.radius = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("radius");
    t.corruption.flip_rate = std::stod(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument("flip_rate");
    t.corruption.seed = std::stoull(parts[4], &used);
    if (used != parts[4].size()) throw std::invalid_argument("seed");
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "team spec '" + text + "': bad numeric field");
  }
  t.corruption.validate();
  return t;
}

ConfusionCounts tally_confusion(const BinaryMask& gt, const BinaryMask& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height())
    throw Error(ErrorCode::kDimensionMismatch, "tally_confusion: geometry differs");
  ConfusionCounts c;
  for (std::ptrdiff_t y = 0; y < gt.height(); ++y)
    for (std::ptrdiff_t x = 0; x < gt.width(); ++x) {
      const bool g = gt.at(x, y);
      const bool p = pred.at(x, y);
      if (g && p) ++c.tp;
      else if (!g && p) ++c.fp;
      else if (g && !p) ++c.fn;
      else ++c.tn;
    }
  return c;
}

void generate_challenge(const SynthConfig& cfg, const std::vector<TeamSpec>& teams,
                        const fs::path& out, int workers) {
  cfg.validate();
  std::set<std::string> names;
  for (const auto& t : teams) {
    if (!names.insert(t.name).second)
      throw Error(ErrorCode::kInvalidArgument, "generate_challenge: duplicate team '" + t.name + "'");
    t.corruption.validate();
  }
  for (const char* sub : {"slides", "annotations", "gt", "gt_train", "predictions"})
    fs::create_directories(out / sub);
  for (const auto& t : teams) fs::create_directories(out / "predictions" / t.name);

  std::string subtypes = "slide_id,subtype\n";
  std::string truth = "slide_id,team,tp,fp,fn,tn\n";
  nlohmann::ordered_json manifest;
  manifest["seed"] = cfg.seed;
  manifest["level0_size"] = cfg.level0_size;
  manifest["levels"] = cfg.levels;
  manifest["annotation_dilation"] = cfg.noise.annotation_dilation;
  manifest["label_background_inclusion"] = cfg.noise.label_background_inclusion;
  manifest["test_slides"] = nlohmann::ordered_json::array();
  manifest["train_slides"] = nlohmann::ordered_json::array();

  const int total = cfg.slides + cfg.train_slides;
  for (int index = 0; index < total; ++index) {
    const bool is_test = index < cfg.slides;
    SyntheticSlide slide = generate_slide(cfg, index, workers);
    const std::string& id = slide.pyramid.slide_id;
    write_pyramid(slide.pyramid, out / "slides" / id);
    serialize_annotations(slide.annotations, out / "annotations" / (id + ".xml"));
    write_mask(slide.true_mask, out / (is_test ? "gt" : "gt_train") / (id + ".pgm"));
    subtypes += id + "," + to_string(slide.subtype) + "\n";
    manifest[is_test ? "test_slides" : "train_slides"].push_back(id);
    if (!is_test) continue;
    for (const auto& t : teams) {
      BinaryMask pred = corrupt_prediction(slide.true_mask, t.corruption, workers);
      write_mask(pred, out / "predictions" / t.name / (id + ".pgm"));
      const ConfusionCounts c = tally_confusion(slide.true_mask, pred);
      truth += id + "," + t.name + "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," +
               std::to_string(c.fn) + "," + std::to_string(c.tn) + "\n";
    }
  }

  std::string groups = "team,group\n";
  manifest["teams"] = nlohmann::ordered_json::array();
  for (const auto& t : teams) {
    groups += t.name + "," + t.group + "\n";
    manifest["teams"].push_back({{"name", t.name},
                                 {"group", t.group},
                                 {"radius", t.corruption.radius},
                                 {"flip_rate", t.corruption.flip_rate},
                                 {"seed", t.corruption.seed}});
  }
  write_text(out / "subtypes.csv", subtypes);
  write_text(out / "truth_table.csv", truth);
  write_text(out / "teams.csv", groups);
  write_text(out / "challenge.json", manifest.dump(2) + "\n");
}

std::vector<TruthRow> read_truth_table(const fs::path& path) {
  std::vector<TruthRow> rows;
  for (const auto& cells : read_csv(path, 6, "slide_id,team,tp,fp,fn,tn")) {
    TruthRow r{cells[0], cells[1], {}};
    try {
      r.counts = {std::stoll(cells[2]), std::stoll(cells[3]), std::stoll(cells[4]), std::stoll(cells[5])};
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kSchema, path.string() + ": non-integer count for " + r.slide_id);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::map<std::string, Subtype> read_subtypes(const fs::path& path) {
  std::map<std::string, Subtype> out;
  for (const auto& cells : read_csv(path, 2, "slide_id,subtype")) {
    try {
      out[cells[0]] = subtype_from_string(cells[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::string> read_team_groups(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& cells : read_csv(path, 2, "team,group")) out[cells[0]] = cells[1];
  return out;
}

PixelBenchmark make_pixel_benchmark(std::uint64_t seed, double noise_rate,
                                    std::ptrdiff_t slide_size, std::ptrdiff_t tile,
                                    double lesion_contrast) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.slides = 2;
  cfg.level0_size = slide_size;
  cfg.levels = 1;
  cfg.min_lesions = 2;
  cfg.max_lesions = 3;
  cfg.min_lesion_radius = 0.10 * static_cast<double>(slide_size);
  cfg.max_lesion_radius = 0.18 * static_cast<double>(slide_size);
  cfg.lesion_contrast = lesion_contrast;
  PixelBenchmark bench;
  for (int index = 0; index < 2; ++index) {
    const SyntheticSlide slide = generate_slide(cfg, index);
    const auto& img = slide.pyramid.levels[0].pixels;
    std::uint64_t tile_index = 0;
    for (const TileOrigin o : grid_tiles(img.width(), img.height(), tile, tile)) {
      PixelBatch<double> b = make_pixel_batch(img, slide.true_mask, o, tile);
      if (index == 0) {
        flip_labels(b, noise_rate, splitmix64(seed ^ 0xF11Full) + tile_index++);
        bench.train.push_back(std::move(b));
      } else {
        bench.test.push_back(std::move(b));
      }
    }
  }
  return bench;
}

}  // namespace wsibench
