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

#include <cstdint>
#include <string>
#include <vector>

#include "wsibench/raster.hpp"
#include "wsibench/slide_io.hpp"

namespace wsibench {

/// Pixel tallies over the evaluated region. |GT| = tp + fn, |RES| = tp + fp.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Exact counts; `region`, when given, restricts the evaluated pixels.
/// Row bands are tallied in parallel and merged by integer addition.
ConfusionCounts confusion(const BinaryMask& gt, const BinaryMask& pred,
                          const BinaryMask* region = nullptr, int workers = 1);

struct DiceValue {
  double value = 0.0;
  bool empty_pair = false;  // both masks empty; value is 1 by convention
};

/// 2tp / (2tp + fp + fn).
DiceValue dice(const ConfusionCounts& c);

struct Rates {
  double accuracy = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  bool fnr_undefined = false;  // fn + tp == 0, fnr reported as 0
  bool fpr_undefined = false;  // fp + tn == 0, fpr reported as 0
};

Rates accuracy_fnr_fpr(const ConfusionCounts& c);

enum class Subtype { kADC, kSCC, kSCLC, kUnknown };

std::string to_string(Subtype s);
Subtype subtype_from_string(const std::string& s);

struct SlideScore {
  std::string slide_id;
  std::string team;
  Subtype subtype = Subtype::kUnknown;
  double dice = 0.0;
  double accuracy = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  ConfusionCounts counts;
  bool empty_pair = false;
  bool operator==(const SlideScore&) const = default;
};

SlideScore score_slide(std::string slide_id, std::string team, Subtype subtype,
                       const ConfusionCounts& counts);

enum class GroupBy { kNone, kTeam, kSubtype };
enum class Metric { kDice, kAccuracy, kFnr, kFpr };

std::string to_string(Metric m);

struct AggregateScore {
  std::string key;      // group value; "all" when ungrouped
  std::string metric;
  double mean = 0.0;
  double std = 0.0;     // population formula, divisor n
  std::int64_t n = 0;
  bool operator==(const AggregateScore&) const = default;
};

/// Groups come out in lexicographic key order; within a group values are
/// summed in slide-id order so the result does not depend on input order.
std::vector<AggregateScore> aggregate(const std::vector<SlideScore>& scores, GroupBy group_by,
                                      Metric metric = Metric::kDice);

struct TeamReport {
  std::string team;
  std::string group;          // MultiModel / SingleModel, may be empty
  std::string region = "full";  // "full" or "mask": which pixels were evaluated
  int evaluation_level = 0;
  std::vector<SlideScore> scores;
  std::vector<AggregateScore> aggregates;
};

/// Fills aggregates: Dice ungrouped then by subtype.
void finalize_report(TeamReport& report);

std::string report_json(const TeamReport& report);
TeamReport parse_report_json(const std::string& text, const std::string& source);
TeamReport read_report(const fs::path& path);
void write_report(const TeamReport& report, const fs::path& path);

/// Columns slide_id,subtype,dice,accuracy,fnr,fpr.
std::string scores_csv(const std::vector<SlideScore>& scores);

}  // namespace wsibench
