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

#include "wsibench/leaderboard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "json.hpp"
#include "wsibench/error.hpp"

namespace wsibench {

namespace {

std::vector<std::string> sorted_slide_ids(const TeamReport& r) {
  std::vector<std::string> ids;
  for (const auto& s : r.scores) ids.push_back(s.slide_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double mean_of(const std::vector<SlideScore>& scores, Metric m) {
  return aggregate(scores, GroupBy::kNone, m).front().mean;
}

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

}  // namespace

std::vector<LeaderboardEntry> rank_teams(const std::vector<TeamReport>& reports) {
  if (reports.empty()) return {};
  const auto reference = sorted_slide_ids(reports.front());
  std::vector<LeaderboardEntry> entries;
  for (const auto& r : reports) {
    if (r.scores.empty())
      throw Error(ErrorCode::kInvalidArgument, "rank_teams: team '" + r.team + "' has no scores");
    if (sorted_slide_ids(r) != reference)
      throw Error(ErrorCode::kInvalidArgument,
                  "rank_teams: team '" + r.team + "' scored a different slide set than team '" +
                      reports.front().team + "'");
    const AggregateScore d = aggregate(r.scores, GroupBy::kNone, Metric::kDice).front();
    LeaderboardEntry e;
    e.team = r.team;
    e.group = r.group;
    e.mean_dice = d.mean;
    e.std_dice = d.std;
    e.n = d.n;
    e.accuracy = mean_of(r.scores, Metric::kAccuracy);
    e.fnr = mean_of(r.scores, Metric::kFnr);
    e.fpr = mean_of(r.scores, Metric::kFpr);
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    return std::make_tuple(-a.mean_dice, a.fnr, a.team) < std::make_tuple(-b.mean_dice, b.fnr, b.team);
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = static_cast<int>(i + 1);
  return entries;
}

GroupComparison group_compare(const std::vector<TeamReport>& reports,
                              const std::map<std::string, std::string>& grouping,
                              SignedRankMode mode) {
  std::map<std::string, std::vector<const TeamReport*>> groups;
  for (const auto& r : reports) {
    const auto it = grouping.find(r.team);
    const std::string g = it != grouping.end() ? it->second : r.group;
    if (g.empty())
      throw Error(ErrorCode::kInvalidArgument, "group_compare: team '" + r.team + "' has no group");
    groups[g].push_back(&r);
  }
  if (groups.size() != 2)
    throw Error(ErrorCode::kInvalidArgument,
                "group_compare: need exactly two non-empty groups, found " +
                    std::to_string(groups.size()));
  for (auto& [name, members] : groups)
    std::sort(members.begin(), members.end(),
              [](const TeamReport* a, const TeamReport* b) { return a->team < b->team; });

  const auto reference = sorted_slide_ids(reports.front());
  for (const auto& r : reports)
    if (sorted_slide_ids(r) != reference)
      throw Error(ErrorCode::kInvalidArgument,
                  "group_compare: team '" + r.team + "' scored a different slide set");

  GroupComparison c;
  c.group_a = groups.begin()->first;
  c.group_b = std::next(groups.begin())->first;
  c.slide_ids = reference;

  auto per_slide_means = [&](const std::vector<const TeamReport*>& members) {
    std::map<std::string, double> sums;
    for (const auto* r : members)
      for (const auto& s : r->scores) sums[s.slide_id] += s.dice;
    std::vector<double> means;
    for (const auto& id : reference) means.push_back(sums[id] / static_cast<double>(members.size()));
    return means;
  };
  auto pooled = [](const std::vector<const TeamReport*>& members) {
    std::vector<SlideScore> all;
    for (const auto* r : members) all.insert(all.end(), r->scores.begin(), r->scores.end());
    return aggregate(all, GroupBy::kNone, Metric::kDice).front();
  };
  c.slide_mean_a = per_slide_means(groups[c.group_a]);
  c.slide_mean_b = per_slide_means(groups[c.group_b]);
  const AggregateScore pa = pooled(groups[c.group_a]);
  const AggregateScore pb = pooled(groups[c.group_b]);
  c.mean_dice_a = pa.mean;
  c.std_dice_a = pa.std;
  c.mean_dice_b = pb.mean;
  c.std_dice_b = pb.std;

  PairedSample sample{reference, c.slide_mean_a, c.slide_mean_b};
  try {
    c.test = wilcoxon_signed_rank(sample, mode);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoInformation) throw;
    throw Error(ErrorCode::kNoInformation,
                "group_compare: groups '" + c.group_a + "' and '" + c.group_b +
                    "' have identical per-slide mean Dice on all " +
                    std::to_string(reference.size()) + " slides; " + e.what());
  }
  return c;
}

std::string comparison_json(const GroupComparison& c) {
  nlohmann::ordered_json j;
  j["group_a"] = c.group_a;
  j["group_b"] = c.group_b;
  j["n"] = c.slide_ids.size();
  j["w_statistic"] = c.test.w_statistic;
  j["p_two_sided"] = c.test.p_two_sided;
  j["zeros_discarded"] = c.test.zeros_discarded;
  j["mode"] = to_string(c.test.mode_used);
  j["mean_dice_a"] = c.mean_dice_a;
  j["std_dice_a"] = c.std_dice_a;
  j["mean_dice_b"] = c.mean_dice_b;
  j["std_dice_b"] = c.std_dice_b;
  char p[32];
  std::snprintf(p, sizeof p, "%.4e", c.test.p_two_sided);
  j["summary"] = c.group_a + " mean DC " + format_mean_std(c.mean_dice_a, c.std_dice_a) + " vs " +
                 c.group_b + " mean DC " + format_mean_std(c.mean_dice_b, c.std_dice_b) +
                 " (signed-rank p=" + p + ")";
  return j.dump(2) + "\n";
}

LeaderboardFormat leaderboard_format_from_string(const std::string& s) {
  if (s == "csv") return LeaderboardFormat::kCsv;
  if (s == "json") return LeaderboardFormat::kJson;
  if (s == "text") return LeaderboardFormat::kText;
  throw Error(ErrorCode::kInvalidArgument, "unknown leaderboard format '" + s + "'");
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string format_mean_std(double mean, double std) {
  return fixed4(mean) + "\xC2\xB1" + fixed4(std);
}

std::string render_leaderboard(const std::vector<LeaderboardEntry>& entries,
                               LeaderboardFormat format) {
  switch (format) {
    case LeaderboardFormat::kCsv: {
      std::string out = "rank,team,group,mean_dice,std_dice,accuracy,fnr,fpr,mean_dc\n";
      for (const auto& e : entries)
        out += std::to_string(e.rank) + "," + e.team + "," + e.group + "," + fixed4(e.mean_dice) +
               "," + fixed4(e.std_dice) + "," + fixed4(e.accuracy) + "," + fixed4(e.fnr) + "," +
               fixed4(e.fpr) + "," + format_mean_std(e.mean_dice, e.std_dice) + "\n";
      return out;
    }
    case LeaderboardFormat::kJson: {
      nlohmann::ordered_json doc;
      doc["entries"] = nlohmann::ordered_json::array();
      for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["rank"] = e.rank;
        j["team"] = e.team;
        j["group"] = e.group;
        j["mean_dice"] = e.mean_dice;
        j["std_dice"] = e.std_dice;
        j["accuracy"] = e.accuracy;
        j["fnr"] = e.fnr;
        j["fpr"] = e.fpr;
        j["mean_dc"] = format_mean_std(e.mean_dice, e.std_dice);
        doc["entries"].push_back(std::move(j));
      }
      return doc.dump(2) + "\n";
    }
    case LeaderboardFormat::kText: {
      const std::vector<std::string> header = {"Rank", "Team", "Group", "Mean.DC",
                                               "Accuracy", "FNR", "FPR"};
      std::vector<std::vector<std::string>> rows{header};
      for (const auto& e : entries)
        rows.push_back({std::to_string(e.rank), e.team, e.group,
                        format_mean_std(e.mean_dice, e.std_dice), fixed4(e.accuracy),
                        fixed4(e.fnr), fixed4(e.fpr)});
      std::vector<std::size_t> widths(header.size(), 0);
      for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
          widths[i] = std::max(widths[i], display_width(row[i]));
      std::string out;
      for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i)
          line += i + 1 < row.size() ? pad(row[i], widths[i] + 2) : row[i];
        out += line + "\n";
      }
      return out;
    }
  }
  return {};
}

}  // namespace wsibench
