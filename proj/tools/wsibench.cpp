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

// wsibench command line: synthesize, preprocess, tile, evaluate and rank.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsibench/coteach.hpp"
#include "wsibench/ensemble.hpp"
#include "wsibench/error.hpp"
#include "wsibench/leaderboard.hpp"
#include "wsibench/mask_ops.hpp"
#include "wsibench/metrics.hpp"
#include "wsibench/signed_rank.hpp"
#include "wsibench/slide_io.hpp"
#include "wsibench/synth.hpp"
#include "wsibench/tiling.hpp"

namespace {

using namespace wsibench;

struct Globals {
  std::uint64_t seed = 0;
  int workers = 1;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

// Writes to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text << std::flush;
  else
    write_file(path, text);
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path manifest_of(const fs::path& slide) {
  return fs::is_directory(slide) ? slide / "manifest.json" : slide;
}

std::vector<TeamReport> load_reports(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (auto& f : files_with_extension(in, ".json")) files.push_back(f);
    } else {
      files.emplace_back(in);
    }
  }
  if (files.empty()) throw Error(ErrorCode::kIo, "no report files found");
  std::vector<TeamReport> reports;
  for (const auto& f : files) reports.push_back(read_report(f));
  return reports;
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SynthConfig cfg;
  std::vector<double> ratio{6.0, 3.0, 1.0};
  std::vector<std::string> teams;
};

void add_synth(CLI::App& app, SynthArgs& a, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds,
               const Globals& g) {
  auto* sub = app.add_subcommand("synth", "Generate a synthetic challenge tree with known ground truth");
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--slides", a.cfg.slides, "Number of test slides")->capture_default_str();
  sub->add_option("--train-slides", a.cfg.train_slides, "Number of annotated training slides")
      ->capture_default_str();
  sub->add_option("--size", a.cfg.level0_size, "Level-0 width and height in pixels")->capture_default_str();
  sub->add_option("--levels", a.cfg.levels, "Pyramid levels")->capture_default_str();
  sub->add_option("--min-lesions", a.cfg.min_lesions, "Fewest lesions per slide")->capture_default_str();
  sub->add_option("--max-lesions", a.cfg.max_lesions, "Most lesions per slide")->capture_default_str();
  sub->add_option("--min-radius", a.cfg.min_lesion_radius, "Smallest lesion radius, pixels")
      ->capture_default_str();
  sub->add_option("--max-radius", a.cfg.max_lesion_radius, "Largest lesion radius, pixels")
      ->capture_default_str();
  sub->add_option("--ratio", a.ratio, "Subtype weights SCC SCLC ADC")->expected(3)->capture_default_str();
  sub->add_option("--annotation-dilation", a.cfg.noise.annotation_dilation,
                  "Push annotation outlines outward by this many pixels")
      ->capture_default_str();
  sub->add_flag("--background-inclusion", a.cfg.noise.label_background_inclusion,
                "Leave blank holes inside lesions annotated as tumor");
  sub->add_option("--mpp", a.cfg.mpp_level0, "Microns per pixel at level 0")->capture_default_str();
  sub->add_option("--team", a.teams, "Prediction team as name:group:radius:flip_rate:seed (repeatable)");
  cmds.emplace_back(sub, [&a, &g] {
    a.cfg.seed = g.seed;
    std::copy(a.ratio.begin(), a.ratio.end(), a.cfg.subtype_ratio.begin());
    std::vector<TeamSpec> teams;
    for (const auto& t : a.teams) teams.push_back(parse_team_spec(t));
    generate_challenge(a.cfg, teams, a.out, g.workers);
  });
}

// --- tissue ------------------------------------------------------------------

struct TissueArgs {
  std::string slide;
  std::string out;
  int level = 0;
  std::string method = "otsu";
};

void add_tissue(CLI::App& app, TissueArgs& a, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds,
                const Globals& g) {
  auto* sub = app.add_subcommand("tissue", "Segment tissue from background; prints the gray threshold");
  sub->add_option("--slide", a.slide, "Slide directory or manifest.json")->required();
  sub->add_option("--out", a.out, "Output mask (PGM)")->required();
  sub->add_option("--level", a.level, "Pyramid level")->capture_default_str();
  sub->add_option("--method", a.method, "otsu or gray200")->capture_default_str();
  cmds.emplace_back(sub, [&a, &g] {
    const SlidePyramid p = read_pyramid(manifest_of(a.slide));
    const TissueMethod m = tissue_method_from_string(a.method);
    const int t = tissue_threshold(p, a.level, m, g.workers);
    write_mask(tissue_mask(p, a.level, m, g.workers), a.out);
    std::cout << "threshold=" << t << "\n";
  });
}

// --- rasterize ---------------------------------------------------------------

struct RasterizeArgs {
  std::string annotations;
  std::string slide;
  std::string out;
  int level = 0;
  std::string group;
};

void add_rasterize(CLI::App& app, RasterizeArgs& a,
                   std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds, const Globals& g) {
  auto* sub = app.add_subcommand("rasterize", "Rasterize annotation polygons into a mask");
  sub->add_option("--annotations", a.annotations, "Annotation XML")->required();
  sub->add_option("--slide", a.slide, "Slide directory or manifest.json, for the raster size")->required();
  sub->add_option("--out", a.out, "Output mask (PGM)")->required();
  sub->add_option("--level", a.level, "Pyramid level")->capture_default_str();
  sub->add_option("--group", a.group, "Only polygons of this group (default: all)");
  cmds.emplace_back(sub, [&a, &g] {
    const SlidePyramid p = read_pyramid(manifest_of(a.slide));
    const AnnotationSet ann = parse_annotations(a.annotations);
    const auto& lv = p.level(a.level);
    BinaryMask m = rasterize(ann, a.level, lv.width(), lv.height(), a.group, g.workers);
    m.slide_id = p.slide_id;
    if (const int bad = count_degenerate_polygons(ann, a.level))
      std::cerr << "warning: " << bad << " polygon(s) cover no pixel centre at level " << a.level << "\n";
    write_mask(m, a.out);
  });
}

// --- refine ------------------------------------------------------------------

struct RefineArgs {
  std::string gt;
  std::string tissue;
  std::string out;
};

void add_refine(CLI::App& app, RefineArgs& a, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  auto* sub = app.add_subcommand("refine", "Intersect a label mask with a tissue mask");
  sub->add_option("--gt", a.gt, "Label mask (PGM)")->required();
  sub->add_option("--tissue", a.tissue, "Tissue mask (PGM)")->required();
  sub->add_option("--out", a.out, "Output mask (PGM)")->required();
  cmds.emplace_back(sub, [&a] {
    write_mask(refine_labels(read_mask(a.gt, MaskRole::kGroundTruth), read_mask(a.tissue, MaskRole::kTissue)),
               a.out);
  });
}

// --- tile --------------------------------------------------------------------

struct TileArgs {
  std::string slide;
  std::string gt;
  std::string annotations;
  std::string out;
  TilingConfig cfg{.stride = 0};
  std::string rule = "threshold75";
  std::string tissue_filter = "none";
  bool rebalance = false;
};

void add_tile(CLI::App& app, TileArgs& a, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds,
              const Globals& g) {
  auto* sub = app.add_subcommand("tile", "Cut a slide into labelled tiles and write a JSONL manifest");
  sub->add_option("--slide", a.slide, "Slide directory or manifest.json")->required();
  auto* gt = sub->add_option("--gt", a.gt, "Label mask at the tiling level (PGM)");
  auto* ann = sub->add_option("--annotations", a.annotations, "Annotation XML, rasterized at the tiling level");
  gt->excludes(ann);
  sub->add_option("--out", a.out, "Output manifest (JSONL)")->required();
  sub->add_option("--level", a.cfg.level, "Pyramid level")->capture_default_str();
  sub->add_option("--tile-size", a.cfg.tile_size, "Tile edge in pixels")->capture_default_str();
  sub->add_option("--stride", a.cfg.stride, "Grid stride in pixels (default: tile size, or big size for bigpatch9)");
  sub->add_option("--rule", a.rule, "threshold75, threeclass or bigpatch9")->capture_default_str();
  sub->add_option("--big-size", a.cfg.big_size, "Parent patch edge for bigpatch9")->capture_default_str();
  sub->add_option("--tissue-filter", a.tissue_filter, "none, otsu or gray200")->capture_default_str();
  sub->add_flag("--rebalance", a.rebalance, "Resolve Mix tiles and subsample classes to equal size");
  cmds.emplace_back(sub, [&a, &g] {
    const SlidePyramid p = read_pyramid(manifest_of(a.slide));
    a.cfg.rule = tile_rule_from_string(a.rule);
    if (a.cfg.stride == 0)
      a.cfg.stride = a.cfg.rule == TileRule::kBigPatchNine ? a.cfg.big_size : a.cfg.tile_size;
    if (a.tissue_filter != "none") a.cfg.tissue_filter = tissue_method_from_string(a.tissue_filter);
    const auto& lv = p.level(a.cfg.level);
    BinaryMask labels;
    if (!a.gt.empty()) {
      labels = read_mask(a.gt, MaskRole::kGroundTruth);
    } else if (!a.annotations.empty()) {
      labels = rasterize(parse_annotations(a.annotations), a.cfg.level, lv.width(), lv.height(), "", g.workers);
    } else {
      labels = BinaryMask(p.slide_id, a.cfg.level, MaskRole::kGroundTruth, lv.width(), lv.height());
    }
    auto records = tile_slide(p, labels, a.cfg, g.workers);
    if (a.rebalance) records = rebalance_mix(records, g.seed);
    emit_manifest(records, a.out);
  });
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string pred;
  std::string region;
  std::string subtypes;
  std::string team;
  std::string group;
  std::string out;
  std::string csv;
};

void add_eval(CLI::App& app, EvalArgs& a, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds,
              const Globals& g) {
  auto* sub = app.add_subcommand("eval", "Score one team's prediction masks against ground truth");
  sub->add_option("--gt", a.gt, "Directory of ground-truth masks <slide_id>.pgm")->required();
  sub->add_option("--pred", a.pred, "Directory of prediction masks <slide_id>.pgm")->required();
  sub->add_option("--out", a.out, "Report JSON")->required();
  sub->add_option("--region", a.region, "Directory of evaluation-region masks (default: whole slide)");
  sub->add_option("--subtypes", a.subtypes, "CSV slide_id,subtype");
  sub->add_option("--team", a.team, "Team name (default: name of the prediction directory)");
  sub->add_option("--group", a.group, "Team group, e.g. MultiModel or SingleModel");
  sub->add_option("--csv", a.csv, "Also write per-slide scores as CSV");
  cmds.emplace_back(sub, [&a, &g] {
    TeamReport rep;
    rep.team = a.team.empty() ? fs::path(a.pred).lexically_normal().filename().string() : a.team;
    if (rep.team.empty()) rep.team = fs::path(a.pred).lexically_normal().parent_path().filename().string();
    rep.group = a.group;
    rep.region = a.region.empty() ? "full" : "mask";
    std::map<std::string, Subtype> subtypes;
    if (!a.subtypes.empty()) subtypes = read_subtypes(a.subtypes);
    const auto gts = files_with_extension(a.gt, ".pgm");
    if (gts.empty()) throw Error(ErrorCode::kIo, a.gt + ": no ground-truth masks");
    bool first = true;
    for (const auto& gt_path : gts) {
      const std::string id = gt_path.stem().string();
      const BinaryMask gt = read_mask(gt_path, MaskRole::kGroundTruth);
      const fs::path pred_path = fs::path(a.pred) / (id + ".pgm");
      if (!fs::exists(pred_path))
        throw Error(ErrorCode::kIo, pred_path.string() + ": missing prediction for slide " + id);
      BinaryMask pred = read_mask(pred_path, MaskRole::kPrediction);
      if (pred.level != gt.level) pred = upsample_nearest(pred, gt.level, gt.width(), gt.height());
      std::optional<BinaryMask> region;
      if (!a.region.empty()) {
        const fs::path rp = fs::path(a.region) / (id + ".pgm");
        if (!fs::exists(rp)) throw Error(ErrorCode::kIo, rp.string() + ": missing region mask for slide " + id);
        region = read_mask(rp, MaskRole::kTissue);
      }
      const ConfusionCounts c = confusion(gt, pred, region ? &*region : nullptr, g.workers);
      const auto st = subtypes.find(id);
      rep.scores.push_back(score_slide(id, rep.team, st == subtypes.end() ? Subtype::kUnknown : st->second, c));
      if (first) rep.evaluation_level = gt.level;
      first = false;
    }
    finalize_report(rep);
    write_report(rep, a.out);
    if (!a.csv.empty()) write_file(a.csv, scores_csv(rep.scores));
  });
}

// --- ensemble ----------------------------------------------------------------

struct EnsembleArgs {
  std::vector<std::string> inputs;
  std::string mode = "mean";
  double threshold = 0.5;
  std::string out;
  std::string out_prob;
};

void add_ensemble(CLI::App& app, EnsembleArgs& a,
                  std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds, const Globals& g) {
  auto* sub = app.add_subcommand("ensemble", "Fuse several models' outputs for one slide");
  sub->add_option("--inputs", a.inputs, "Probability maps (mean) or binary masks (vote)")->required();
  sub->add_option("--mode", a.mode, "mean or vote")->capture_default_str();
  sub->add_option("--threshold", a.threshold, "Binarization threshold for mean fusion, strict >")
      ->capture_default_str();
  sub->add_option("--out", a.out, "Fused binary mask (PGM)")->required();
  sub->add_option("--out-prob", a.out_prob, "Fused probability map (PGM), mean mode only");
  cmds.emplace_back(sub, [&a, &g] {
    if (a.mode == "mean") {
      std::vector<ProbabilityMap<double>> maps;
      for (const auto& p : a.inputs) maps.push_back(read_probability_map(p));
      const auto fused = fuse_mean(maps, g.workers);
      if (!a.out_prob.empty()) write_probability_map(fused, a.out_prob);
      write_mask(binarize(fused, a.threshold), a.out);
    } else if (a.mode == "vote") {
      if (!a.out_prob.empty()) throw Error(ErrorCode::kInvalidArgument, "--out-prob needs --mode mean");
      std::vector<BinaryMask> masks;
      for (const auto& p : a.inputs) masks.push_back(read_mask(p, MaskRole::kPrediction));
      write_mask(fuse_vote(masks, g.workers), a.out);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "--mode must be mean or vote, got '" + a.mode + "'");
    }
  });
}

// --- coteach -----------------------------------------------------------------

struct CoteachArgs {
  std::string config;
  std::string out;
  double noise = 0.3;
  std::ptrdiff_t size = 256;
  std::ptrdiff_t tile = 32;
  double contrast = 0.4;
};

void add_coteach(CLI::App& app, CoteachArgs& a,
                 std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds, const Globals& g) {
  auto* sub = app.add_subcommand(
      "coteach", "Train two pixel learners by co-teaching on the synthetic tile benchmark");
  sub->add_option("--config", a.config, "key=value training config");
  sub->add_option("--out", a.out, "Output directory (history.csv, result.json)")->required();
  sub->add_option("--noise", a.noise, "Symmetric label-flip rate on training tiles")->capture_default_str();
  sub->add_option("--size", a.size, "Synthetic slide edge in pixels")->capture_default_str();
  sub->add_option("--tile", a.tile, "Tile edge in pixels")->capture_default_str();
  sub->add_option("--contrast", a.contrast, "Lesion colour contrast against stroma, 0..1")->capture_default_str();
  cmds.emplace_back(sub, [&a, &g] {
    std::map<std::string, std::string> kv;
    const std::string source = a.config.empty() ? "<defaults>" : a.config;
    if (!a.config.empty()) kv = parse_key_value_file(a.config);
    const bool seed_in_file = kv.count("seed") != 0;
    CoteachConfig cfg = coteach_config_from(kv, source);
    if (!kv.empty()) throw Error(ErrorCode::kSchema, source + ": unknown key '" + kv.begin()->first + "'");
    if (!seed_in_file) cfg.seed = g.seed;
    if (!(a.noise >= 0.0 && a.noise <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "--noise must be in [0,1]");
    const PixelBenchmark bench = make_pixel_benchmark(cfg.seed, a.noise, a.size, a.tile, a.contrast);
    const TrainResult<double> co = train<double>(bench.train, cfg);
    const LearnerState<double> base = train_baseline<double>(bench.train, cfg);

    fs::create_directories(a.out);
    write_file(fs::path(a.out) / "history.csv", history_csv(co.history));
    nlohmann::ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["noise"] = a.noise;
    doc["coteach_accuracy"] = pixel_accuracy<double>(co.f.w, bench.test);
    doc["baseline_accuracy"] = pixel_accuracy<double>(base.w, bench.test);
    doc["weights_f"] = std::vector<double>(co.f.w.data(), co.f.w.data() + co.f.w.size());
    doc["weights_g"] = std::vector<double>(co.g.w.data(), co.g.w.data() + co.g.w.size());
    doc["weights_baseline"] = std::vector<double>(base.w.data(), base.w.data() + base.w.size());
    write_file(fs::path(a.out) / "result.json", doc.dump(2) + "\n");
  });
}

// --- compare -----------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> reports;
  std::string groups;
  std::string mode = "auto";
  std::string out;
};

void add_compare(CLI::App& app, CompareArgs& a, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  auto* sub = app.add_subcommand("compare", "Wilcoxon signed-rank comparison of two team groups");
  sub->add_option("--reports", a.reports, "Report JSON files or directories")->required();
  sub->add_option("--groups", a.groups, "CSV team,group (default: the group stored in each report)");
  sub->add_option("--mode", a.mode, "auto, exact or normal")->capture_default_str();
  sub->add_option("--out", a.out, "Comparison JSON (default: stdout)");
  cmds.emplace_back(sub, [&a] {
    const auto reports = load_reports(a.reports);
    std::map<std::string, std::string> grouping;
    if (!a.groups.empty()) {
      grouping = read_team_groups(a.groups);
    } else {
      for (const auto& r : reports) grouping[r.team] = r.group;
    }
    const auto c = group_compare(reports, grouping, signed_rank_mode_from_string(a.mode));
    emit(a.out, comparison_json(c));
  });
}

// --- leaderboard -------------------------------------------------------------

struct LeaderboardArgs {
  std::vector<std::string> reports;
  std::string format = "text";
  std::string out;
};

void add_leaderboard(CLI::App& app, LeaderboardArgs& a,
                     std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  auto* sub = app.add_subcommand("leaderboard", "Rank teams by mean Dice");
  sub->add_option("--reports", a.reports, "Report JSON files or directories")->required();
  sub->add_option("--format", a.format, "csv, json or text")->capture_default_str();
  sub->add_option("--out", a.out, "Output file (default: stdout)");
  cmds.emplace_back(sub, [&a] {
    const auto entries = rank_teams(load_reports(a.reports));
    emit(a.out, render_leaderboard(entries, leaderboard_format_from_string(a.format)));
  });
}

// --- docs --------------------------------------------------------------------

std::string flag_reference(const CLI::App& app) {
  std::ostringstream md;
  md << "# wsibench command reference\n\n"
     << "Generated by `wsibench docs`. Exit codes: 0 success, 1 data error, 2 usage error.\n\n"
     << "## Global flags\n\n";
  auto table = [&md](const CLI::App& a) {
    md << "| flag | default | description |\n|---|---|---|\n";
    for (const CLI::Option* o : a.get_options()) {
      if (o->get_name() == "--help" || o->get_name() == "-h,--help") continue;
      std::string def = o->get_default_str();
      if (o->get_required()) def = "(required)";
      if (def.empty()) def = "-";
      md << "| `" << o->get_name() << "` | " << def << " | " << o->get_description() << " |\n";
    }
    md << "\n";
  };
  table(app);
  for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    md << "## " << sub->get_name() << "\n\n" << sub->get_description() << "\n\n";
    table(*sub);
  }
  return md.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wsibench: whole-slide segmentation benchmark toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads; outputs do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::pair<CLI::App*, std::function<void()>>> cmds;
  SynthArgs synth;
  TissueArgs tissue;
  RasterizeArgs rast;
  RefineArgs refine;
  TileArgs tile;
  EvalArgs eval;
  EnsembleArgs ens;
  CoteachArgs co;
  CompareArgs cmp;
  LeaderboardArgs lb;
  add_synth(app, synth, cmds, g);
  add_tissue(app, tissue, cmds, g);
  add_rasterize(app, rast, cmds, g);
  add_refine(app, refine, cmds);
  add_tile(app, tile, cmds, g);
  add_eval(app, eval, cmds, g);
  add_ensemble(app, ens, cmds, g);
  add_coteach(app, co, cmds, g);
  add_compare(app, cmp, cmds);
  add_leaderboard(app, lb, cmds);
  std::string docs_out;
  auto* docs = app.add_subcommand("docs", "Write this flag reference as Markdown");
  docs->add_option("--out", docs_out, "Output file (default: stdout)");
  cmds.emplace_back(docs, [&] { emit(docs_out, flag_reference(app)); });

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e, std::cerr, std::cerr);
    return 2;
  }
  try {
    for (auto& [sub, run] : cmds)
      if (sub->parsed()) run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
