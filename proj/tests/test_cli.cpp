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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "doctest.h"
#include "oracles.hpp"
#include "wsibench/mask_ops.hpp"
#include "wsibench/metrics.hpp"
#include "wsibench/synth.hpp"

using namespace wsibench;

namespace {

int run(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string(WSIBENCH_CLI) + " " + args + " > " + stdout_file.string() +
                          " 2> " + (stdout_file.string() == "/dev/null" ? "/dev/null" : stdout_file.string() + ".err");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const char* kSynthArgs =
    " synth --slides 3 --train-slides 1 --size 256 --levels 2 --min-radius 10 --max-radius 25"
    " --team perfect:MultiModel:0:0:1 --team noisy:SingleModel:2:0.03:5";

// Every regular file under `root`, relative path -> contents.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("") == 2);
  CHECK(run("--no-such-flag") == 2);
  CHECK(run("eval --gt") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("eval --gt /nonexistent/gt --pred /nonexistent/pred --out /tmp/x.json") == 1);
  CHECK(run("tissue --slide /nonexistent --out /tmp/x.pgm") == 1);
}

TEST_CASE("synth, eval, compare and leaderboard") {
  oracle::TempDir dir("cli_flow");
  const fs::path ch = dir / "challenge";
  REQUIRE(run("--seed 4" + std::string(kSynthArgs) + " --out " + q(ch)) == 0);

  const auto truth = read_truth_table(ch / "truth_table.csv");
  REQUIRE(truth.size() == 6);
  for (const std::string team : {"perfect", "noisy"}) {
    const fs::path rep = dir / (team + ".json");
    REQUIRE(run("eval --gt " + q(ch / "gt") + " --pred " + q(ch / "predictions" / team) +
                " --subtypes " + q(ch / "subtypes.csv") + " --group " +
                (team == "perfect" ? "MultiModel" : "SingleModel") + " --out " + q(rep) +
                " --csv " + q(dir / (team + ".csv"))) == 0);
    const TeamReport r = read_report(rep);
    CHECK(r.team == team);
    CHECK(r.region == "full");
    REQUIRE(r.scores.size() == 3);
    for (const auto& row : truth) {
      if (row.team != team) continue;
      const auto it = std::find_if(r.scores.begin(), r.scores.end(),
                                   [&](const SlideScore& s) { return s.slide_id == row.slide_id; });
      REQUIRE(it != r.scores.end());
      CHECK(it->counts == row.counts);
      const double dice = 2.0 * row.counts.tp / (2.0 * row.counts.tp + row.counts.fp + row.counts.fn);
      CHECK(it->dice == doctest::Approx(dice).epsilon(1e-12));
    }
  }

  const fs::path csv = dir / "board.csv";
  REQUIRE(run("leaderboard --format csv --reports " + q(dir / "perfect.json") + " " +
              q(dir / "noisy.json") + " --out " + q(csv)) == 0);
  std::istringstream lines(slurp(csv));
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK(header == "rank,team,group,mean_dice,std_dice,accuracy,fnr,fpr,mean_dc");
  CHECK(first.rfind("1,perfect,MultiModel,1.0000,0.0000,", 0) == 0);
  CHECK(first.find("1.0000\xC2\xB1" "0.0000") != std::string::npos);
  CHECK(second.rfind("2,noisy,", 0) == 0);

  REQUIRE(run("leaderboard --reports " + q(dir / "perfect.json") + " " + q(dir / "noisy.json"),
              dir / "board.txt") == 0);
  CHECK(slurp(dir / "board.txt").rfind("Rank", 0) == 0);

  // Every slide favours the perfect team, so the exact two-sided p is 2/2^3.
  REQUIRE(run("compare --mode exact --reports " + q(dir / "perfect.json") + " " +
                  q(dir / "noisy.json"),
              dir / "cmp.json") == 0);
  const auto cmp = nlohmann::json::parse(slurp(dir / "cmp.json"));
  CHECK(cmp.at("p_two_sided").get<double>() == doctest::Approx(0.25));
  CHECK(cmp.at("n").get<int>() == 3);

  CHECK(run("compare --reports " + q(dir / "perfect.json")) == 1);
}

TEST_CASE("worker count does not change outputs") {
  oracle::TempDir dir("cli_workers");
  REQUIRE(run("--seed 9 --workers 1" + std::string(kSynthArgs) + " --out " + q(dir / "a")) == 0);
  REQUIRE(run("--seed 9 --workers 3" + std::string(kSynthArgs) + " --out " + q(dir / "b")) == 0);
  CHECK(tree(dir / "a") == tree(dir / "b"));
  for (const char* w : {"1", "3"}) {
    const std::string tag = std::string("w") + w;
    REQUIRE(run(std::string("--workers ") + w + " eval --gt " + q(dir.path / "a" / "gt") +
                " --pred " + q(dir.path / "a" / "predictions" / "noisy") + " --out " +
                q(dir / (tag + ".json"))) == 0);
    const fs::path slide = dir.path / "a" / "slides" / synthetic_slide_id(0);
    REQUIRE(run(std::string("--workers ") + w + " tile --slide " + q(slide) + " --annotations " +
                q(dir.path / "a" / "annotations" / (synthetic_slide_id(0) + ".xml")) +
                " --level 0 --tile-size 32 --tissue-filter otsu --out " + q(dir / (tag + ".jsonl"))) == 0);
  }
  CHECK(slurp(dir / "w1.json") == slurp(dir / "w3.json"));
  CHECK(slurp(dir / "w1.jsonl") == slurp(dir / "w3.jsonl"));
  CHECK_FALSE(slurp(dir / "w1.jsonl").empty());
}

TEST_CASE("tissue, rasterize and refine") {
  oracle::TempDir dir("cli_masks");
  REQUIRE(run(std::string(kSynthArgs) + " --out " + q(dir / "c")) == 0);
  const std::string id = synthetic_slide_id(0);
  const fs::path slide = dir.path / "c" / "slides" / id;
  REQUIRE(run("tissue --slide " + q(slide) + " --level 1 --out " + q(dir / "tissue.pgm"),
              dir / "tissue.txt") == 0);
  CHECK(slurp(dir / "tissue.txt").rfind("threshold=", 0) == 0);
  REQUIRE(run("rasterize --annotations " + q(dir.path / "c" / "annotations" / (id + ".xml")) +
              " --slide " + q(slide) + " --level 1 --out " + q(dir / "ann.pgm")) == 0);
  REQUIRE(run("refine --gt " + q(dir / "ann.pgm") + " --tissue " + q(dir / "tissue.pgm") +
              " --out " + q(dir / "refined.pgm")) == 0);
  const auto tissue = read_mask(dir / "tissue.pgm");
  const auto ann = read_mask(dir / "ann.pgm");
  const auto refined = read_mask(dir / "refined.pgm");
  CHECK(tissue.level == 1);
  CHECK(tissue.width() == 128);
  CHECK(((refined.bits != 0) == ((ann.bits != 0) && (tissue.bits != 0))).all());

  // a level-1 prediction is upsampled onto the level-0 ground truth
  REQUIRE(run("rasterize --annotations " + q(dir.path / "c" / "annotations" / (id + ".xml")) +
              " --slide " + q(slide) + " --level 0 --out " + q(dir.path / "gt0" / (id + ".pgm"))) == 0);
  fs::create_directories(dir / "pred1");
  fs::copy_file(dir / "ann.pgm", dir.path / "pred1" / (id + ".pgm"));
  fs::copy_file(dir / "ann.pgm.json", dir.path / "pred1" / (id + ".pgm.json"));
  REQUIRE(run("eval --gt " + q(dir / "gt0") + " --pred " + q(dir / "pred1") + " --out " +
              q(dir / "up.json")) == 0);
  CHECK(read_report(dir / "up.json").scores.front().dice > 0.9);
}

TEST_CASE("ensemble vote") {
  oracle::TempDir dir("cli_ensemble");
  std::vector<std::string> paths;
  for (int k = 0; k < 3; ++k) {
    BinaryMask m("s", 0, MaskRole::kPrediction, 4, 1);
    for (int x = 0; x < 4; ++x) m.set(x, 0, x <= k);
    const fs::path p = dir / ("m" + std::to_string(k) + ".pgm");
    write_mask(m, p);
    paths.push_back(q(p));
  }
  REQUIRE(run("ensemble --mode vote --inputs " + paths[0] + " " + paths[1] + " " + paths[2] +
              " --out " + q(dir / "v.pgm")) == 0);
  const auto v = read_mask(dir / "v.pgm");
  CHECK(v.at(0, 0));
  CHECK(v.at(1, 0));
  CHECK_FALSE(v.at(2, 0));
  CHECK_FALSE(v.at(3, 0));
  CHECK(run("ensemble --mode median --inputs " + paths[0] + " --out " + q(dir / "x.pgm")) != 0);
}

TEST_CASE("coteach command") {
  oracle::TempDir dir("cli_coteach");
  {
    std::ofstream cfg(dir / "cfg.txt");
    cfg << "eta=1.0\nt_max=2\nn_max=2\ntau=0.2\nramp_epochs=2\nagreement_masking=false\n";
  }
  REQUIRE(run("coteach --config " + q(dir / "cfg.txt") + " --size 64 --tile 16 --out " +
              q(dir / "out")) == 0);
  const auto result = nlohmann::json::parse(slurp(dir.path / "out" / "result.json"));
  CHECK(result.contains("coteach_accuracy"));
  CHECK(result.contains("baseline_accuracy"));
  CHECK(slurp(dir.path / "out" / "history.csv").rfind("epoch,", 0) == 0);
  {
    std::ofstream cfg(dir / "bad.txt");
    cfg << "eta=1.0\nunknown_key=3\n";
  }
  CHECK(run("coteach --config " + q(dir / "bad.txt") + " --size 64 --tile 16 --out " + q(dir / "o2")) == 1);
}

TEST_CASE("docs command") {
  oracle::TempDir dir("cli_docs");
  REQUIRE(run("docs --out " + q(dir / "cli.md")) == 0);
  const std::string md = slurp(dir / "cli.md");
  for (const char* cmd : {"synth", "tissue", "rasterize", "refine", "tile", "eval", "ensemble",
                          "coteach", "compare", "leaderboard"})
    CHECK(md.find(std::string("## ") + cmd + "\n") != std::string::npos);
}
