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

#include <string>
#include <vector>

namespace wsibench {

/// Two methods' per-slide values, aligned index-wise.
struct PairedSample {
  std::vector<std::string> labels;
  std::vector<double> a;
  std::vector<double> b;
};

enum class SignedRankMode { kExact, kNormal, kAuto };

std::string to_string(SignedRankMode m);
SignedRankMode signed_rank_mode_from_string(const std::string& s);

struct SignedRankResult {
  double w_statistic = 0.0;  // sum of signed ranks, W+ - W-
  double w_plus = 0.0;
  double p_two_sided = 1.0;
  int n_used = 0;            // pairs left after discarding zero differences
  int zeros_discarded = 0;
  SignedRankMode mode_used = SignedRankMode::kExact;
};

/// Largest number of non-zero differences for which kAuto uses the exact
/// null distribution.
inline constexpr int kExactSignedRankLimit = 20;

/// Wilcoxon signed-rank test on a - b. Zero differences are dropped, tied
/// magnitudes get average ranks. The exact p counts sign assignments of the
/// observed ranks; the normal approximation uses tie-corrected variance and
/// a 0.5 continuity correction. Throws kNoInformation if every difference
/// is zero.
SignedRankResult wilcoxon_signed_rank(const PairedSample& s,
                                      SignedRankMode mode = SignedRankMode::kAuto);

/// Average ranks (1-based) of `values`, ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

}  // namespace wsibench
