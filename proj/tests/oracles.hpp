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

// Reference implementations used as test oracles. Each is written from the
// textbook definition, shares no code with the library, and favours clarity
// over speed.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

namespace fs = std::filesystem;

struct Vertex {
  double x, y;
};

/// Crossing-number test: odd number of edge crossings to the right of (px, py).
inline bool inside_even_odd(const std::vector<Vertex>& poly, double px, double py) {
  bool c = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vertex& a = poly[i];
    const Vertex& b = poly[j];
    if ((a.y > py) != (b.y > py) && px < (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x) c = !c;
  }
  return c;
}

/// Row-major 0/1 raster: pixel set iff its centre lies inside any polygon.
inline std::vector<std::uint8_t> rasterize(const std::vector<std::vector<Vertex>>& polys, int level,
                                           int width, int height) {
  const double s = std::ldexp(1.0, -level);
  std::vector<std::vector<Vertex>> scaled;
  for (const auto& p : polys) {
    std::vector<Vertex> q;
    for (const auto& v : p) q.push_back({v.x * s, v.y * s});
    scaled.push_back(q);
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (const auto& q : scaled)
        if (q.size() >= 3 && inside_even_odd(q, x + 0.5, y + 0.5)) {
          out[static_cast<std::size_t>(y) * width + x] = 1;
          break;
        }
  return out;
}

/// Exhaustive Otsu over all splits [0..t] / [t+1..255]: the textbook
/// between-class variance w0*w1*(mu0-mu1)^2 in exact rational arithmetic.
/// Returns nullopt when fewer than two bins are populated.
inline std::optional<int> otsu(const std::vector<std::uint64_t>& hist) {
  using boost::multiprecision::cpp_rational;
  int populated = 0;
  std::uint64_t total = 0, total_sum = 0;
  for (int g = 0; g < 256; ++g) {
    populated += hist[g] > 0;
    total += hist[g];
    total_sum += hist[g] * static_cast<std::uint64_t>(g);
  }
  if (populated < 2) return std::nullopt;
  std::optional<int> best;
  cpp_rational best_var = -1;
  std::uint64_t n0 = 0, s0 = 0;
  for (int t = 0; t < 255; ++t) {
    n0 += hist[t];
    s0 += hist[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const cpp_rational mu0(s0, n0);
    const cpp_rational mu1(total_sum - s0, n1);
    const cpp_rational w0(n0, total), w1(n1, total);
    const cpp_rational var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

struct SignedRank {
  double w_plus = 0;
  double p_two_sided = 1;
  int m = 0;
};

/// Signed-rank test by enumerating all 2^m sign patterns of the nonzero
/// differences. Ranks are averaged over ties.
inline SignedRank signed_rank_enumerate(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double v : diffs)
    if (v != 0.0) d.push_back(v);
  const int m = static_cast<int>(d.size());
  std::vector<std::int64_t> rank2(m);  // doubled ranks
  for (int i = 0; i < m; ++i) {
    std::int64_t less = 0, equal = 0;
    for (int j = 0; j < m; ++j) {
      less += std::abs(d[j]) < std::abs(d[i]);
      equal += std::abs(d[j]) == std::abs(d[i]);
    }
    rank2[i] = 2 * less + equal + 1;
  }
  std::int64_t observed = 0;
  for (int i = 0; i < m; ++i)
    if (d[i] > 0) observed += rank2[i];
  std::uint64_t le = 0, ge = 0;
  const std::uint64_t patterns = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    std::int64_t w = 0;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1u) w += rank2[i];
    le += w <= observed;
    ge += w >= observed;
  }
  SignedRank r;
  r.m = m;
  r.w_plus = static_cast<double>(observed) / 2.0;
  r.p_two_sided = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(patterns));
  return r;
}

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts confusion(const std::vector<std::uint8_t>& gt, const std::vector<std::uint8_t>& pred,
                        const std::vector<std::uint8_t>* region = nullptr) {
  Counts c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (region && !(*region)[i]) continue;
    if (gt[i] && pred[i]) ++c.tp;
    if (!gt[i] && pred[i]) ++c.fp;
    if (gt[i] && !pred[i]) ++c.fn;
    if (!gt[i] && !pred[i]) ++c.tn;
  }
  return c;
}

inline std::int64_t window_count(const std::vector<std::uint8_t>& mask, int width, int x0, int y0,
                                 int size) {
  std::int64_t n = 0;
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x) n += mask[static_cast<std::size_t>(y) * width + x] != 0;
  return n;
}

/// One full-batch gradient step of mean logistic cross-entropy.
inline std::vector<double> logistic_step(const std::vector<double>& w,
                                         const std::vector<std::vector<double>>& x,
                                         const std::vector<int>& y, double eta) {
  std::vector<double> grad(w.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double z = 0;
    for (std::size_t k = 0; k < w.size(); ++k) z += w[k] * x[i][k];
    const double p = 1.0 / (1.0 + std::exp(-z));
    for (std::size_t k = 0; k < w.size(); ++k) grad[k] += (p - y[i]) * x[i][k];
  }
  std::vector<double> out = w;
  for (std::size_t k = 0; k < w.size(); ++k) out[k] -= eta * grad[k] / static_cast<double>(x.size());
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

/// Fresh scratch directory, removed by the destructor.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("wsibench_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& s) const { return path / s; }
};

}  // namespace oracle
