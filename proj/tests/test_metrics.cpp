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
#include "wsibench/metrics.hpp"
#include "wsibench/random.hpp"

using namespace wsibench;

namespace {

BinaryMask random_mask(Rng& rng, std::ptrdiff_t w, std::ptrdiff_t h, double p) {
  BinaryMask m("m", 0, MaskRole::kGroundTruth, w, h);
  for (std::ptrdiff_t i = 0; i < m.bits.size(); ++i) m.bits.data()[i] = rng.uniform() < p;
  return m;
}

std::vector<std::uint8_t> flat(const BinaryMask& m) {
  return std::vector<std::uint8_t>(m.bits.data(), m.bits.data() + m.bits.size());
}

ConfusionCounts counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
  ConfusionCounts c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.tn = tn;
  return c;
}

SlideScore scored(const std::string& id, Subtype st, double dice) {
  SlideScore s;
  s.slide_id = id;
  s.subtype = st;
  s.dice = dice;
  return s;
}

}  // namespace

TEST_CASE("confusion equals per-pixel tally") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask gt = random_mask(rng, 64, 64, rng.uniform());
    const BinaryMask pred = random_mask(rng, 64, 64, rng.uniform());
    const BinaryMask region = random_mask(rng, 64, 64, 0.7);
    const auto o = oracle::confusion(flat(gt), flat(pred));
    const ConfusionCounts c = confusion(gt, pred, nullptr, 1 + trial % 4);
    CHECK(c.tp == o.tp);
    CHECK(c.fp == o.fp);
    CHECK(c.fn == o.fn);
    CHECK(c.tn == o.tn);
    const auto fr = flat(region);
    const auto orr = oracle::confusion(flat(gt), flat(pred), &fr);
    const ConfusionCounts cr = confusion(gt, pred, &region, 3);
    CHECK(cr == counts(orr.tp, orr.fp, orr.fn, orr.tn));
    CHECK(cr.total() == region.count());
    // Dice symmetry
    CHECK(dice(confusion(gt, pred)).value == dice(confusion(pred, gt)).value);
  }
}

TEST_CASE("identity and complement predictions") {
  Rng rng(32);
  const BinaryMask gt = random_mask(rng, 30, 20, 0.4);
  const ConfusionCounts same = confusion(gt, gt);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  CHECK(dice(same).value == 1.0);
  BinaryMask comp = gt;
  comp.bits = 1 - gt.bits;
  const ConfusionCounts c = confusion(gt, comp);
  CHECK(c.tp == 0);
  CHECK(c.tn == 0);
  CHECK_THROWS_AS(confusion(gt, random_mask(rng, 30, 21, 0.5)), Error);
  BinaryMask other_level = gt;
  other_level.level = 1;
  CHECK_THROWS_AS(confusion(gt, other_level), Error);
}

TEST_CASE("dice values") {
  CHECK(dice(counts(4, 0, 0, 0)).value == 1.0);
  CHECK(dice(counts(0, 2, 1, 5)).value == 0.0);
  CHECK(dice(counts(3, 1, 1, 0)).value == 0.75);
  const DiceValue e = dice(counts(0, 0, 0, 9));
  CHECK(e.value == 1.0);
  CHECK(e.empty_pair);
  CHECK_FALSE(dice(counts(1, 0, 0, 0)).empty_pair);
}

TEST_CASE("accuracy and error rates") {
  const Rates r = accuracy_fnr_fpr(counts(3, 1, 1, 5));
  CHECK(r.accuracy == 0.8);
  CHECK(r.fnr == 0.25);
  CHECK(r.fpr == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const Rates perfect = accuracy_fnr_fpr(counts(5, 0, 0, 5));
  CHECK(perfect.fnr == 0.0);
  CHECK(perfect.fpr == 0.0);
  const Rates all_pos = accuracy_fnr_fpr(counts(4, 6, 0, 0));
  CHECK(all_pos.fnr == 0.0);
  CHECK(all_pos.fpr == 1.0);
  const Rates no_tumor = accuracy_fnr_fpr(counts(0, 0, 0, 9));
  CHECK(no_tumor.fnr_undefined);
  CHECK_FALSE(no_tumor.fpr_undefined);
}

TEST_CASE("fixing a wrong pixel never lowers dice or accuracy") {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionCounts c = counts(rng.uniform_int(0, 50), rng.uniform_int(0, 50), rng.uniform_int(0, 50),
                               rng.uniform_int(0, 50));
    CHECK(2 * c.tp + c.fp + c.fn == (c.tp + c.fn) + (c.tp + c.fp));
    ConfusionCounts fixed = c;
    if (c.fp > 0) {
      --fixed.fp;
      ++fixed.tn;
    } else if (c.fn > 0) {
      --fixed.fn;
      ++fixed.tp;
    } else {
      continue;
    }
    CHECK(dice(fixed).value >= dice(c).value);
    CHECK(accuracy_fnr_fpr(fixed).accuracy >= accuracy_fnr_fpr(c).accuracy);
  }
}

TEST_CASE("aggregate uses the population std") {
  const auto one = aggregate({scored("a", Subtype::kADC, 0.6)}, GroupBy::kNone);
  REQUIRE(one.size() == 1);
  CHECK(one[0].mean == 0.6);
  CHECK(one[0].std == 0.0);
  const auto two = aggregate({scored("a", Subtype::kADC, 0.5), scored("b", Subtype::kADC, 1.0)}, GroupBy::kNone);
  CHECK(two[0].mean == 0.75);
  CHECK(two[0].std == 0.25);
  CHECK(two[0].n == 2);
  CHECK(two[0].key == "all");
  CHECK_THROWS_AS(aggregate({}, GroupBy::kNone), Error);

  Rng rng(34);
  std::vector<SlideScore> many;
  std::vector<double> values;
  for (int i = 0; i < 37; ++i) {
    many.push_back(scored("s" + std::to_string(i), Subtype::kSCC, rng.uniform()));
    values.push_back(many.back().dice);
  }
  const auto agg = aggregate(many, GroupBy::kNone);
  CHECK(agg[0].mean == doctest::Approx(oracle::mean(values)).epsilon(1e-14));
  CHECK(agg[0].std == doctest::Approx(oracle::population_std(values)).epsilon(1e-12));
}

TEST_CASE("subtype grouping yields SCC, SCLC, ADC rows") {
  std::vector<SlideScore> s = {scored("1", Subtype::kSCLC, 0.7), scored("2", Subtype::kSCC, 0.9),
                               scored("3", Subtype::kADC, 0.8), scored("4", Subtype::kSCC, 0.7)};
  const auto rows = aggregate(s, GroupBy::kSubtype);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].key == "SCC");
  CHECK(rows[1].key == "SCLC");
  CHECK(rows[2].key == "ADC");
  CHECK(rows[0].mean == doctest::Approx(0.8));
  CHECK(rows[0].n == 2);
}

TEST_CASE("score_slide fills every metric") {
  const SlideScore s = score_slide("x", "t", Subtype::kADC, counts(3, 1, 1, 5));
  CHECK(s.dice == 0.75);
  CHECK(s.accuracy == 0.8);
  CHECK(s.fnr == 0.25);
  CHECK(s.counts == counts(3, 1, 1, 5));
}

TEST_CASE("report json and csv") {
  oracle::TempDir tmp("report");
  TeamReport r;
  r.team = "alpha";
  r.group = "MultiModel";
  r.scores.push_back(score_slide("b", "alpha", Subtype::kSCC, counts(3, 1, 1, 5)));
  r.scores.push_back(score_slide("a", "alpha", Subtype::kUnknown, counts(0, 0, 0, 9)));
  finalize_report(r);
  write_report(r, tmp / "r.json");
  const TeamReport back = read_report(tmp / "r.json");
  CHECK(back.team == r.team);
  CHECK(back.group == r.group);
  CHECK(back.scores == r.scores);
  CHECK(back.aggregates == r.aggregates);
  CHECK(report_json(back) == report_json(r));

  const std::string csv = scores_csv(r.scores);
  CHECK(csv.rfind("slide_id,subtype,dice,accuracy,fnr,fpr\n", 0) == 0);
  CHECK(csv.find("b,SCC,0.750000,0.800000,0.250000,0.166667\n") != std::string::npos);

  CHECK_THROWS_AS(parse_report_json("{\"team\": 3}", "bad.json"), Error);
  CHECK_THROWS_AS(parse_report_json("not json", "bad.json"), Error);
}
