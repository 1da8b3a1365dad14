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

#include "wsibench/coteach.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wsibench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw Error(ErrorCode::kSchema, where + ": expected a number, got '" + v + "'");
  return out;
}

long long parse_integer(const std::string& v, const std::string& where) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw Error(ErrorCode::kSchema, where + ": expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw Error(ErrorCode::kSchema, where + ": expected true/false, got '" + v + "'");
}

}  // namespace

void CoteachConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw Error(ErrorCode::kInvalidArgument, "coteach config: eta must be > 0");
  if (t_max < 1) throw Error(ErrorCode::kInvalidArgument, "coteach config: t_max must be >= 1");
  if (n_max < 1) throw Error(ErrorCode::kInvalidArgument, "coteach config: n_max must be >= 1");
  if (!(tau >= 0.0 && tau < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "coteach config: tau must be in [0, 1)");
  if (ramp_epochs < 1)
    throw Error(ErrorCode::kInvalidArgument, "coteach config: ramp_epochs must be >= 1");
  if (!(init_scale >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "coteach config: init_scale must be >= 0");
}

double drop_rate(int epoch, const CoteachConfig& cfg) {
  return cfg.tau * std::min(1.0, static_cast<double>(epoch) / cfg.ramp_epochs);
}

PixelBatch<double> make_pixel_batch(const RgbImage& img, const BinaryMask& labels,
                                    TileOrigin origin, std::ptrdiff_t size) {
  if (labels.width() != img.width() || labels.height() != img.height())
    throw Error(ErrorCode::kDimensionMismatch, "make_pixel_batch: label mask geometry differs");
  if (size < 1 || origin.x < 0 || origin.y < 0 || origin.x + size > img.width() ||
      origin.y + size > img.height())
    throw Error(ErrorCode::kInvalidArgument, "make_pixel_batch: window leaves the image");
  PixelBatch<double> b;
  b.width = size;
  b.height = size;
  b.features.resize(size * size, kPixelFeatureDim);
  b.labels.resize(size * size);
  const auto w = img.width();
  const auto h = img.height();
  for (std::ptrdiff_t j = 0; j < size; ++j)
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      const std::ptrdiff_t x = origin.x + i;
      const std::ptrdiff_t y = origin.y + j;
      const std::ptrdiff_t row = j * size + i;
      const std::uint8_t* px = img.pixel(x, y);
      double sum = 0.0, sum2 = 0.0;
      for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          const auto nx = std::clamp<std::ptrdiff_t>(x + dx, 0, w - 1);
          const auto ny = std::clamp<std::ptrdiff_t>(y + dy, 0, h - 1);
          const double g = gray_level(img.pixel(nx, ny)) / 255.0;
          sum += g;
          sum2 += g * g;
        }
      const double mean = sum / 9.0;
      b.features(row, 0) = 1.0;
      b.features(row, 1) = px[0] / 255.0;
      b.features(row, 2) = px[1] / 255.0;
      b.features(row, 3) = px[2] / 255.0;
      b.features(row, 4) = mean;
      b.features(row, 5) = std::sqrt(std::max(0.0, sum2 / 9.0 - mean * mean));
      b.labels[row] = labels.bits(y, x);
    }
  return b;
}

void flip_labels(PixelBatch<double>& batch, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "flip_labels: rate must be in [0,1]");
  for (std::ptrdiff_t i = 0; i < batch.labels.size(); ++i)
    if (hash_uniform(seed, static_cast<std::uint64_t>(i)) < rate) batch.labels[i] ^= 1;
}

std::map<std::string, std::string> parse_key_value_text(const std::string& text,
                                                        const std::string& source) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw Error(ErrorCode::kSchema, where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::kSchema, where + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw Error(ErrorCode::kSchema, where + ": duplicate key '" + key + "'");
  }
  return kv;
}

std::map<std::string, std::string> parse_key_value_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_value_text(buf.str(), path.string());
}

CoteachConfig coteach_config_from(std::map<std::string, std::string>& kv,
                                  const std::string& source) {
  CoteachConfig cfg;
  auto take = [&](const char* key, auto&& apply) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    apply(it->second, source + ": key '" + key + "'");
    kv.erase(it);
  };
  take("eta", [&](const std::string& v, const std::string& w) { cfg.eta = parse_double(v, w); });
  take("t_max", [&](const std::string& v, const std::string& w) {
    cfg.t_max = static_cast<int>(parse_integer(v, w));
  });
  take("n_max", [&](const std::string& v, const std::string& w) {
    cfg.n_max = static_cast<int>(parse_integer(v, w));
  });
  take("tau", [&](const std::string& v, const std::string& w) { cfg.tau = parse_double(v, w); });
  take("ramp_epochs", [&](const std::string& v, const std::string& w) {
    cfg.ramp_epochs = static_cast<int>(parse_integer(v, w));
  });
  take("seed", [&](const std::string& v, const std::string& w) {
    cfg.seed = static_cast<std::uint64_t>(parse_integer(v, w));
  });
  take("agreement_masking", [&](const std::string& v, const std::string& w) {
    cfg.agreement_masking = parse_bool(v, w);
  });
  take("init_scale",
       [&](const std::string& v, const std::string& w) { cfg.init_scale = parse_double(v, w); });
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, source + ": " + e.what());
  }
  return cfg;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,loss_f,loss_g,drop_rate,selected_fraction\n";
  char buf[160];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.9f,%.9f,%.6f,%.6f\n", h.epoch, h.loss_f, h.loss_g,
                  h.drop_rate, h.selected_fraction);
    out += buf;
  }
  return out;
}

}  // namespace wsibench
