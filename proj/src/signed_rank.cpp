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

#include "wsibench/signed_rank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "wsibench/error.hpp"

namespace wsibench {

namespace {

// Tail probabilities of the doubled W+ under the null, from the exact
// distribution of subset sums of the doubled ranks.
struct Tails {
  double lower = 1.0;  // P(W+ <= observed)
  double upper = 1.0;  // P(W+ >= observed)
};

template <typename Count>
Tails exact_tails(const std::vector<std::int64_t>& doubled_ranks, std::int64_t observed) {
  const std::int64_t max_sum =
      std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), std::int64_t{0});
  std::vector<Count> ways(static_cast<std::size_t>(max_sum + 1), Count(0));
  ways[0] = Count(1);
  std::int64_t reach = 0;
  for (const std::int64_t r : doubled_ranks) {
    reach += r;
    for (std::int64_t s = reach; s >= r; --s)
      ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
  }
  Count below(0), above(0), total(0);
  for (std::int64_t s = 0; s <= max_sum; ++s) {
    const Count w = ways[static_cast<std::size_t>(s)];
    total += w;
    if (s <= observed) below += w;
    if (s >= observed) above += w;
  }
  return {static_cast<double>(static_cast<long double>(below) / static_cast<long double>(total)),
          static_cast<double>(static_cast<long double>(above) / static_cast<long double>(total))};
}

}  // namespace

std::string to_string(SignedRankMode m) {
  switch (m) {
    case SignedRankMode::kExact: return "exact";
    case SignedRankMode::kNormal: return "normal-approx";
    case SignedRankMode::kAuto: return "auto";
  }
  return "auto";
}

SignedRankMode signed_rank_mode_from_string(const std::string& s) {
  if (s == "exact") return SignedRankMode::kExact;
  if (s == "normal" || s == "normal-approx") return SignedRankMode::kNormal;
  if (s == "auto") return SignedRankMode::kAuto;
  throw Error(ErrorCode::kInvalidArgument, "unknown signed-rank mode '" + s + "'");
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

SignedRankResult wilcoxon_signed_rank(const PairedSample& s, SignedRankMode mode) {
  if (s.a.size() != s.b.size() || s.a.empty())
    throw Error(ErrorCode::kInvalidArgument,
                "wilcoxon_signed_rank: samples must be non-empty and of equal length");
  SignedRankResult res;
  std::vector<double> magnitude;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    const double d = s.a[i] - s.b[i];
    if (!std::isfinite(d))
      throw Error(ErrorCode::kInvalidArgument, "wilcoxon_signed_rank: non-finite difference");
    if (d == 0.0) {
      ++res.zeros_discarded;
      continue;
    }
    magnitude.push_back(std::fabs(d));
    positive.push_back(d > 0.0);
  }
  const int m = static_cast<int>(magnitude.size());
  res.n_used = m;
  if (m == 0)
    throw Error(ErrorCode::kNoInformation,
                "wilcoxon_signed_rank: all " + std::to_string(s.a.size()) +
                    " differences are zero, the test carries no information");

  const std::vector<double> ranks = average_ranks(magnitude);
  std::vector<std::int64_t> doubled(static_cast<std::size_t>(m));
  std::int64_t observed2 = 0;
  for (int i = 0; i < m; ++i) {
    doubled[static_cast<std::size_t>(i)] = std::llround(2.0 * ranks[static_cast<std::size_t>(i)]);
    if (positive[static_cast<std::size_t>(i)]) observed2 += doubled[static_cast<std::size_t>(i)];
  }
  const double total_rank = 0.5 * m * (m + 1.0);
  res.w_plus = 0.5 * static_cast<double>(observed2);
  res.w_statistic = 2.0 * res.w_plus - total_rank;

  const bool exact = mode == SignedRankMode::kExact ||
                     (mode == SignedRankMode::kAuto && m <= kExactSignedRankLimit);
  if (exact) {
    res.mode_used = SignedRankMode::kExact;
    const Tails t = m <= 62 ? exact_tails<std::uint64_t>(doubled, observed2)
                            : exact_tails<long double>(doubled, observed2);
    res.p_two_sided = std::min(1.0, 2.0 * std::min(t.lower, t.upper));
    return res;
  }

  res.mode_used = SignedRankMode::kNormal;
  double tie_term = 0.0;
  std::vector<double> sorted = magnitude;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double mean = m * (m + 1.0) / 4.0;
  const double var = m * (m + 1.0) * (2.0 * m + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, std::fabs(res.w_plus - mean) - 0.5) / std::sqrt(var);
  res.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

}  // namespace wsibench
