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

#include "wsibench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "wsibench/error.hpp"
#include "wsibench/parallel.hpp"

namespace wsibench {

namespace {

using ordered_json = nlohmann::ordered_json;

double ratio(std::int64_t num, std::int64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

double metric_value(const SlideScore& s, Metric m) {
  switch (m) {
    case Metric::kDice: return s.dice;
    case Metric::kAccuracy: return s.accuracy;
    case Metric::kFnr: return s.fnr;
    case Metric::kFpr: return s.fpr;
  }
  return s.dice;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

ConfusionCounts confusion(const BinaryMask& gt, const BinaryMask& pred, const BinaryMask* region,
                          int workers) {
  if (!gt.same_geometry(pred))
    throw Error(ErrorCode::kDimensionMismatch,
                "confusion: " + pred.slide_id + " prediction is level " +
                    std::to_string(pred.level) + " " + std::to_string(pred.width()) + "x" +
                    std::to_string(pred.height()) + ", ground truth is level " +
                    std::to_string(gt.level) + " " + std::to_string(gt.width()) + "x" +
                    std::to_string(gt.height()));
  if (region && !gt.same_geometry(*region))
    throw Error(ErrorCode::kDimensionMismatch, "confusion: region mask geometry differs");

  const auto height = gt.height();
  const auto width = gt.width();
  std::vector<ConfusionCounts> partial(static_cast<std::size_t>(band_count(height, workers)));
  parallel_bands(height, workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t band) {
    // Pack each pixel's (gt, pred) pair into a 2-bit code and histogram it.
    std::int64_t hist[4] = {0, 0, 0, 0};
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
      const std::uint8_t* g = gt.bits.data() + y * width;
      const std::uint8_t* p = pred.bits.data() + y * width;
      if (region) {
        const std::uint8_t* r = region->bits.data() + y * width;
        for (std::ptrdiff_t x = 0; x < width; ++x)
          if (r[x]) ++hist[2 * g[x] + p[x]];
      } else {
        for (std::ptrdiff_t x = 0; x < width; ++x) ++hist[2 * g[x] + p[x]];
      }
    }
    partial[static_cast<std::size_t>(band)] = {hist[3], hist[1], hist[2], hist[0]};
  });
  ConfusionCounts total;
  for (const auto& c : partial) total += c;
  return total;
}

DiceValue dice(const ConfusionCounts& c) {
  const std::int64_t den = 2 * c.tp + c.fp + c.fn;
  if (den == 0) return {1.0, true};
  return {ratio(2 * c.tp, den), false};
}

Rates accuracy_fnr_fpr(const ConfusionCounts& c) {
  Rates r;
  r.accuracy = c.total() > 0 ? ratio(c.tp + c.tn, c.total()) : 1.0;
  if (c.fn + c.tp == 0)
    r.fnr_undefined = true;
  else
    r.fnr = ratio(c.fn, c.fn + c.tp);
  if (c.fp + c.tn == 0)
    r.fpr_undefined = true;
  else
    r.fpr = ratio(c.fp, c.fp + c.tn);
  return r;
}

std::string to_string(Subtype s) {
  switch (s) {
    case Subtype::kADC: return "ADC";
    case Subtype::kSCC: return "SCC";
    case Subtype::kSCLC: return "SCLC";
    case Subtype::kUnknown: return "Unknown";
  }
  return "Unknown";
}

Subtype subtype_from_string(const std::string& s) {
  if (s == "ADC") return Subtype::kADC;
  if (s == "SCC") return Subtype::kSCC;
  if (s == "SCLC") return Subtype::kSCLC;
  if (s == "Unknown" || s.empty()) return Subtype::kUnknown;
  throw Error(ErrorCode::kSchema, "unknown subtype '" + s + "'");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::kDice: return "dice";
    case Metric::kAccuracy: return "accuracy";
    case Metric::kFnr: return "fnr";
    case Metric::kFpr: return "fpr";
  }
  return "dice";
}

SlideScore score_slide(std::string slide_id, std::string team, Subtype subtype,
                       const ConfusionCounts& counts) {
  SlideScore s;
  s.slide_id = std::move(slide_id);
  s.team = std::move(team);
  s.subtype = subtype;
  s.counts = counts;
  const DiceValue d = dice(counts);
  s.dice = d.value;
  s.empty_pair = d.empty_pair;
  const Rates r = accuracy_fnr_fpr(counts);
  s.accuracy = r.accuracy;
  s.fnr = r.fnr;
  s.fpr = r.fpr;
  return s;
}

std::vector<AggregateScore> aggregate(const std::vector<SlideScore>& scores, GroupBy group_by,
                                      Metric metric) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "aggregate: no scores");
  std::map<std::string, std::vector<const SlideScore*>> groups;
  for (const auto& s : scores) {
    std::string key = "all";
    if (group_by == GroupBy::kTeam) key = s.team;
    if (group_by == GroupBy::kSubtype) key = to_string(s.subtype);
    groups[key].push_back(&s);
  }
  std::vector<AggregateScore> out;
  for (auto& [key, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [](const SlideScore* a, const SlideScore* b) {
      return std::tie(a->slide_id, a->team) < std::tie(b->slide_id, b->team);
    });
    const double n = static_cast<double>(members.size());
    double sum = 0.0;
    for (const auto* s : members) sum += metric_value(*s, metric);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto* s : members) {
      const double d = metric_value(*s, metric) - mean;
      ss += d * d;
    }
    out.push_back({key, to_string(metric), mean, std::sqrt(ss / n),
                   static_cast<std::int64_t>(members.size())});
  }
  if (group_by == GroupBy::kSubtype) {
    // table order: SCC, SCLC, ADC, then Unknown
    auto order = [](const std::string& key) {
      switch (subtype_from_string(key)) {
        case Subtype::kSCC: return 0;
        case Subtype::kSCLC: return 1;
        case Subtype::kADC: return 2;
        case Subtype::kUnknown: return 3;
      }
      return 3;
    };
    std::stable_sort(out.begin(), out.end(), [&](const AggregateScore& a, const AggregateScore& b) {
      return order(a.key) < order(b.key);
    });
  }
  return out;
}

void finalize_report(TeamReport& report) {
  report.aggregates.clear();
  if (report.scores.empty()) return;
  for (auto& a : aggregate(report.scores, GroupBy::kNone)) report.aggregates.push_back(a);
  for (auto& a : aggregate(report.scores, GroupBy::kSubtype)) report.aggregates.push_back(a);
}

std::string report_json(const TeamReport& report) {
  ordered_json doc;
  doc["team"] = report.team;
  doc["group"] = report.group;
  doc["region"] = report.region;
  doc["evaluation_level"] = report.evaluation_level;
  doc["scores"] = ordered_json::array();
  for (const auto& s : report.scores) {
    ordered_json j;
    j["slide_id"] = s.slide_id;
    j["subtype"] = to_string(s.subtype);
    j["dice"] = s.dice;
    j["accuracy"] = s.accuracy;
    j["fnr"] = s.fnr;
    j["fpr"] = s.fpr;
    j["tp"] = s.counts.tp;
    j["fp"] = s.counts.fp;
    j["fn"] = s.counts.fn;
    j["tn"] = s.counts.tn;
    j["empty_pair"] = s.empty_pair;
    doc["scores"].push_back(std::move(j));
  }
  doc["aggregates"] = ordered_json::array();
  for (const auto& a : report.aggregates)
    doc["aggregates"].push_back(
        {{"key", a.key}, {"metric", a.metric}, {"mean", a.mean}, {"std", a.std}, {"n", a.n}});
  return doc.dump(2) + "\n";
}

TeamReport parse_report_json(const std::string& text, const std::string& source) {
  TeamReport r;
  try {
    const auto doc = nlohmann::json::parse(text);
    r.team = doc.at("team").get<std::string>();
    r.group = doc.value("group", "");
    r.region = doc.value("region", "full");
    r.evaluation_level = doc.value("evaluation_level", 0);
    for (const auto& j : doc.at("scores")) {
      SlideScore s;
      s.slide_id = j.at("slide_id").get<std::string>();
      s.team = r.team;
      s.subtype = subtype_from_string(j.value("subtype", "Unknown"));
      s.dice = j.at("dice").get<double>();
      s.accuracy = j.at("accuracy").get<double>();
      s.fnr = j.at("fnr").get<double>();
      s.fpr = j.at("fpr").get<double>();
      s.counts.tp = j.value("tp", std::int64_t{0});
      s.counts.fp = j.value("fp", std::int64_t{0});
      s.counts.fn = j.value("fn", std::int64_t{0});
      s.counts.tn = j.value("tn", std::int64_t{0});
      s.empty_pair = j.value("empty_pair", false);
      for (double v : {s.dice, s.accuracy, s.fnr, s.fpr})
        if (!(v >= 0.0 && v <= 1.0))
          throw Error(ErrorCode::kSchema, "slide " + s.slide_id + ": metric outside [0,1]");
      r.scores.push_back(std::move(s));
    }
    if (doc.contains("aggregates"))
      for (const auto& j : doc["aggregates"])
        r.aggregates.push_back({j.at("key").get<std::string>(), j.value("metric", "dice"),
                                j.at("mean").get<double>(), j.at("std").get<double>(),
                                j.at("n").get<std::int64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, source + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, source + ": " + e.what());
  }
  return r;
}

TeamReport read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_report_json(buf.str(), path.string());
}

void write_report(const TeamReport& report, const fs::path& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << report_json(report);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

std::string scores_csv(const std::vector<SlideScore>& scores) {
  std::string out = "slide_id,subtype,dice,accuracy,fnr,fpr\n";
  for (const auto& s : scores)
    out += s.slide_id + "," + to_string(s.subtype) + "," + fixed6(s.dice) + "," +
           fixed6(s.accuracy) + "," + fixed6(s.fnr) + "," + fixed6(s.fpr) + "\n";
  return out;
}

}  // namespace wsibench
