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

#include <map>
#include <string>
#include <vector>

#include "wsibench/metrics.hpp"
#include "wsibench/signed_rank.hpp"

namespace wsibench {

struct LeaderboardEntry {
  std::string team;
  std::string group;
  double mean_dice = 0.0;
  double std_dice = 0.0;
  double accuracy = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  int rank = 0;
  std::int64_t n = 0;
};

/// Descending mean Dice; ties go to the lower mean FNR, then the team id.
/// Every report must score the same slide set.
std::vector<LeaderboardEntry> rank_teams(const std::vector<TeamReport>& reports);

struct GroupComparison {
  std::string group_a;
  std::string group_b;
  std::vector<std::string> slide_ids;
  std::vector<double> slide_mean_a;  // per-slide mean Dice over the group's teams
  std::vector<double> slide_mean_b;
  double mean_dice_a = 0.0;          // over every (team, slide) score in the group
  double std_dice_a = 0.0;
  double mean_dice_b = 0.0;
  double std_dice_b = 0.0;
  SignedRankResult test;
};

/// Pairs per-slide group means across slides and runs the signed-rank test.
/// Teams missing from `grouping` fall back to their report's group. Exactly
/// two groups must result; group_a is the lexicographically smaller name.
GroupComparison group_compare(const std::vector<TeamReport>& reports,
                              const std::map<std::string, std::string>& grouping,
                              SignedRankMode mode = SignedRankMode::kAuto);

std::string comparison_json(const GroupComparison& c);

enum class LeaderboardFormat { kCsv, kJson, kText };

LeaderboardFormat leaderboard_format_from_string(const std::string& s);

/// "0.8372"
std::string fixed4(double v);

/// "0.8372±0.0858"
std::string format_mean_std(double mean, double std);

std::string render_leaderboard(const std::vector<LeaderboardEntry>& entries,
                               LeaderboardFormat format);

}  // namespace wsibench
