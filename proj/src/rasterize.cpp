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

#include <algorithm>
#include <cmath>
#include <vector>

#include "wsibench/error.hpp"
#include "wsibench/mask_ops.hpp"
#include "wsibench/parallel.hpp"

namespace wsibench {

namespace {

struct Edge {
  double x1, y1, x2, y2;
};

std::vector<std::vector<Edge>> scaled_edges(const AnnotationSet& a, int level,
                                            const std::string& group) {
  const double scale = std::ldexp(1.0, -level);
  std::vector<std::vector<Edge>> polys;
  for (const auto& ann : a.annotations) {
    if (!group.empty() && ann.group != group) continue;
    std::vector<Edge> edges;
    const std::size_t n = ann.vertices.size();
    edges.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = ann.vertices[i];
      const Point& q = ann.vertices[(i + 1) % n];
      edges.push_back({p.x * scale, p.y * scale, q.x * scale, q.y * scale});
    }
    polys.push_back(std::move(edges));
  }
  return polys;
}

// First integer x with x + 0.5 >= a, evaluated with the same comparison the
// point-in-polygon test uses.
std::ptrdiff_t first_center_at_or_after(double a, std::ptrdiff_t width) {
  if (!(a > -1.0)) return 0;
  if (a > static_cast<double>(width) + 1.0) return width;
  auto x = static_cast<std::ptrdiff_t>(std::ceil(a - 0.5));
  while (static_cast<double>(x) + 0.5 < a) ++x;
  while (static_cast<double>(x - 1) + 0.5 >= a) --x;
  return std::clamp<std::ptrdiff_t>(x, 0, width);
}

}  // namespace

BinaryMask rasterize(const AnnotationSet& a, int level, std::ptrdiff_t width,
                     std::ptrdiff_t height, const std::string& group, int workers) {
  if (level < 0 || width < 1 || height < 1)
    throw Error(ErrorCode::kInvalidArgument, "rasterize: bad level or dimensions");
  BinaryMask mask(a.slide_id, level, MaskRole::kGroundTruth, width, height);
  const auto polys = scaled_edges(a, level, group);
  if (polys.empty()) return mask;

  parallel_bands(height, workers, [&](std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t) {
    std::vector<double> crossings;
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
      const double yc = static_cast<double>(y) + 0.5;
      std::uint8_t* row = mask.bits.data() + y * width;
      for (const auto& edges : polys) {
        crossings.clear();
        for (const Edge& e : edges) {
          if ((e.y1 > yc) != (e.y2 > yc))
            crossings.push_back(e.x1 + (yc - e.y1) * (e.x2 - e.x1) / (e.y2 - e.y1));
        }
        std::sort(crossings.begin(), crossings.end());
        // Center xc is inside iff an odd number of crossings lie strictly to
        // its right, i.e. xc in [c[2i], c[2i+1]).
        for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
          const std::ptrdiff_t xs = first_center_at_or_after(crossings[i], width);
          const std::ptrdiff_t xe = first_center_at_or_after(crossings[i + 1], width);
          for (std::ptrdiff_t x = xs; x < xe; ++x) row[x] = 1;
        }
      }
    }
  });
  return mask;
}

int count_degenerate_polygons(const AnnotationSet& a, int level) {
  const double scale = std::ldexp(1.0, -level);
  int degenerate = 0;
  for (const auto& ann : a.annotations) {
    double twice_area = 0.0;
    const std::size_t n = ann.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = ann.vertices[i];
      const Point& q = ann.vertices[(i + 1) % n];
      twice_area += (p.x * scale) * (q.y * scale) - (q.x * scale) * (p.y * scale);
    }
    if (twice_area == 0.0) ++degenerate;
  }
  return degenerate;
}

}  // namespace wsibench
