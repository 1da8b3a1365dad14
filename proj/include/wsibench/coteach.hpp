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

// Pixel-level co-teaching: two dense-prediction learners trained side by
// side on noisy masks. Each step, every learner derives pseudo-labels from
// its current prediction; each learner is then updated on the pixels its
// *peer* considers clean:
//
//   1. candidates = pixels where the peer's pseudo-label agrees with L
//      (optional, `agreement_masking`);
//   2. of those, keep the (1 - R(T)) fraction with the smallest loss under
//      the peer, where R(T) = tau * min(1, T / ramp_epochs);
//   3. take a gradient step of the mean logistic loss against L over the
//      kept pixels.
//
// Both updates read the pre-step parameters. With identical initial states
// the two learners stay bit-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsibench/ensemble.hpp"
#include "wsibench/error.hpp"
#include "wsibench/mask_ops.hpp"
#include "wsibench/random.hpp"
#include "wsibench/tiling.hpp"
#include "wsibench/raster.hpp"

namespace wsibench {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ColumnArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Per-pixel feature rows (row-major pixel order) with a binary, possibly
/// noisy, label per pixel.
template <typename Scalar = double>
struct PixelBatch {
  std::ptrdiff_t width = 0;
  std::ptrdiff_t height = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> features;  // pixels x dim
  Eigen::Array<std::uint8_t, Eigen::Dynamic, 1> labels;

  std::ptrdiff_t pixels() const { return features.rows(); }
  std::ptrdiff_t dim() const { return features.cols(); }

  void validate() const {
    if (width < 1 || height < 1 || features.rows() != width * height ||
        labels.size() != features.rows())
      throw Error(ErrorCode::kDimensionMismatch, "PixelBatch: feature/label geometry mismatch");
  }
};

struct CoteachConfig {
  double eta = 0.5;
  int t_max = 10;
  int n_max = 10;
  double tau = 0.0;  // final drop rate, in [0, 1)
  int ramp_epochs = 1;
  std::uint64_t seed = 0;
  bool agreement_masking = true;
  double init_scale = 0.01;

  void validate() const;
};

/// R(T) = tau * min(1, T / ramp_epochs).
double drop_rate(int epoch, const CoteachConfig& cfg);

/// Per-epoch record of a training run.
struct EpochStats {
  int epoch = 0;
  double loss_f = 0.0;
  double loss_g = 0.0;
  double drop_rate = 0.0;
  double selected_fraction = 0.0;
  bool operator==(const EpochStats&) const = default;
};

template <typename Scalar>
struct LearnerState {
  Vector<Scalar> w;
  std::vector<Scalar> loss_history;  // one entry per epoch
};

/// The dense-prediction learner: per-pixel logistic regression, logit = x.w.
/// Any type with the same two members can stand in for it.
template <typename Scalar>
struct LinearLogisticLearner {
  static ColumnArray<Scalar> logits(const Vector<Scalar>& w, const PixelBatch<Scalar>& b) {
    if (w.size() != b.dim())
      throw Error(ErrorCode::kDimensionMismatch,
                  "learner: " + std::to_string(w.size()) + " parameters for " +
                      std::to_string(b.dim()) + " features");
    return (b.features * w).array();
  }

  /// d/dw of sum_i dlogit_i * logit_i(w).
  static Vector<Scalar> backward(const Vector<Scalar>&, const PixelBatch<Scalar>& b,
                                 const ColumnArray<Scalar>& dlogit) {
    return b.features.transpose() * dlogit.matrix();
  }
};

template <typename Scalar>
ColumnArray<Scalar> sigmoid(const ColumnArray<Scalar>& z) {
  // exp of a non-positive argument only, so neither branch overflows.
  const ColumnArray<Scalar> e = (-z.abs()).exp();
  return (z >= Scalar(0)).select(Scalar(1) / (Scalar(1) + e), e / (Scalar(1) + e));
}

/// Logistic cross-entropy per pixel, computed as a stable softplus.
template <typename Scalar>
ColumnArray<Scalar> logistic_loss(const ColumnArray<Scalar>& z,
                                  const Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>& y) {
  const ColumnArray<Scalar> signed_z = (y != 0).select(-z, z);
  return signed_z.max(Scalar(0)) + (-z.abs()).exp().log1p();
}

template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
ProbabilityMap<Scalar> predict(const Vector<Scalar>& w, const PixelBatch<Scalar>& batch) {
  batch.validate();
  const ColumnArray<Scalar> p = sigmoid<Scalar>(Learner::logits(w, batch));
  Raster<Scalar> values = Eigen::Map<const Raster<Scalar>>(p.data(), batch.height, batch.width);
  return ProbabilityMap<Scalar>("", 0, std::move(values));
}

/// predict(w, batch) > 0.5
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
BinaryMask pseudo_label(const Vector<Scalar>& w, const PixelBatch<Scalar>& batch) {
  return binarize(predict<Scalar, Learner>(w, batch), Scalar(0.5));
}

/// Mean logistic loss of the batch labels over all pixels.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
Scalar mean_loss(const Vector<Scalar>& w, const PixelBatch<Scalar>& batch) {
  return logistic_loss<Scalar>(Learner::logits(w, batch), batch.labels).mean();
}

/// Gradient of the mean logistic loss over the pixels flagged in `selected`
/// (all pixels when empty). Zero when nothing is selected.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
Vector<Scalar> loss_gradient(const Vector<Scalar>& w, const PixelBatch<Scalar>& batch,
                             const Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>& selected = {}) {
  const ColumnArray<Scalar> p = sigmoid<Scalar>(Learner::logits(w, batch));
  ColumnArray<Scalar> residual = p - batch.labels.template cast<Scalar>();
  std::ptrdiff_t k = batch.pixels();
  if (selected.size() > 0) {
    residual = (selected != 0).select(residual, Scalar(0));
    k = static_cast<std::ptrdiff_t>((selected != 0).count());
  }
  if (k == 0) return Vector<Scalar>::Zero(w.size());
  return Learner::backward(w, batch, residual) / static_cast<Scalar>(k);
}

/// Flags the clean pixels used to update a learner: among pixels where the
/// peer's pseudo-label agrees with the given label (if `agreement_masking`),
/// keep all but floor(rate * candidates) of them, dropping the largest peer
/// losses first; equal losses are ordered by pixel index.
template <typename Scalar>
Eigen::Array<std::uint8_t, Eigen::Dynamic, 1> select_clean(
    const ColumnArray<Scalar>& peer_loss, const BinaryMask& peer_pseudo,
    const Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>& labels, double rate,
    bool agreement_masking) {
  const std::ptrdiff_t n = peer_loss.size();
  std::vector<std::ptrdiff_t> candidates;
  candidates.reserve(static_cast<std::size_t>(n));
  const std::uint8_t* pseudo = peer_pseudo.bits.data();
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (!agreement_masking || pseudo[i] == labels[i]) candidates.push_back(i);
  const auto drop = static_cast<std::size_t>(
      std::floor(rate * static_cast<double>(candidates.size()) + 1e-9));
  const std::size_t keep = candidates.size() - std::min(drop, candidates.size());
  if (keep < candidates.size()) {
    auto smaller = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
      return peer_loss[a] < peer_loss[b] || (peer_loss[a] == peer_loss[b] && a < b);
    };
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                     candidates.end(), smaller);
    candidates.resize(keep);
  }
  Eigen::Array<std::uint8_t, Eigen::Dynamic, 1> selected =
      Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>::Zero(n);
  for (const auto i : candidates) selected[i] = 1;
  return selected;
}

template <typename Scalar>
struct StepResult {
  Vector<Scalar> wf;
  Vector<Scalar> wg;
  Scalar loss_f = 0;  // pre-step mean loss against the given labels
  Scalar loss_g = 0;
  double drop_rate = 0.0;
  double selected_fraction_f = 0.0;
  double selected_fraction_g = 0.0;
};

/// One simultaneous co-teaching update of both learners at epoch `epoch`
/// (1-based). Throws kDivergence if an update produces non-finite parameters.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
StepResult<Scalar> coteach_step(const Vector<Scalar>& wf, const Vector<Scalar>& wg,
                                const PixelBatch<Scalar>& batch, int epoch,
                                const CoteachConfig& cfg) {
  batch.validate();
  const ColumnArray<Scalar> zf = Learner::logits(wf, batch);
  const ColumnArray<Scalar> zg = Learner::logits(wg, batch);
  const ColumnArray<Scalar> loss_f = logistic_loss<Scalar>(zf, batch.labels);
  const ColumnArray<Scalar> loss_g = logistic_loss<Scalar>(zg, batch.labels);
  const BinaryMask pseudo_f = pseudo_label<Scalar, Learner>(wf, batch);
  const BinaryMask pseudo_g = pseudo_label<Scalar, Learner>(wg, batch);

  const double rate = drop_rate(epoch, cfg);
  // f learns from the pixels g judges clean, and vice versa.
  const auto sel_f = select_clean<Scalar>(loss_g, pseudo_g, batch.labels, rate, cfg.agreement_masking);
  const auto sel_g = select_clean<Scalar>(loss_f, pseudo_f, batch.labels, rate, cfg.agreement_masking);

  const Scalar eta = static_cast<Scalar>(cfg.eta);
  StepResult<Scalar> out;
  out.wf = wf - eta * loss_gradient<Scalar, Learner>(wf, batch, sel_f);
  out.wg = wg - eta * loss_gradient<Scalar, Learner>(wg, batch, sel_g);
  if (!out.wf.allFinite() || !out.wg.allFinite())
    throw Error(ErrorCode::kDivergence, "coteach_step: parameters became non-finite at epoch " +
                                            std::to_string(epoch));
  out.loss_f = loss_f.mean();
  out.loss_g = loss_g.mean();
  out.drop_rate = rate;
  const double n = static_cast<double>(batch.pixels());
  out.selected_fraction_f = static_cast<double>((sel_f != 0).count()) / n;
  out.selected_fraction_g = static_cast<double>((sel_g != 0).count()) / n;
  return out;
}

template <typename Scalar>
struct TrainResult {
  LearnerState<Scalar> f;
  LearnerState<Scalar> g;
  std::vector<EpochStats> history;
};

/// Seeded initial parameters: independent N(0, init_scale^2) draws for f then g.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> initial_weights(std::ptrdiff_t dim,
                                                          const CoteachConfig& cfg) {
  Rng rng(cfg.seed ^ 0x5EEDC0DEull);
  Vector<Scalar> wf(dim), wg(dim);
  for (std::ptrdiff_t i = 0; i < dim; ++i) wf[i] = static_cast<Scalar>(cfg.init_scale * rng.normal());
  for (std::ptrdiff_t i = 0; i < dim; ++i) wg[i] = static_cast<Scalar>(cfg.init_scale * rng.normal());
  return {wf, wg};
}

/// T_max epochs; each epoch shuffles the dataset order with the seeded
/// generator and performs N_max steps, fetching batches cyclically.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
TrainResult<Scalar> train(const std::vector<PixelBatch<Scalar>>& dataset, const CoteachConfig& cfg,
                          Vector<Scalar> wf, Vector<Scalar> wg) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty dataset");
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult<Scalar> result;
  for (int epoch = 1; epoch <= cfg.t_max; ++epoch) {
    rng.shuffle(order);
    double loss_f = 0.0, loss_g = 0.0, selected = 0.0;
    for (int step = 0; step < cfg.n_max; ++step) {
      const auto& batch = dataset[order[static_cast<std::size_t>(step) % order.size()]];
      StepResult<Scalar> s = coteach_step<Scalar, Learner>(wf, wg, batch, epoch, cfg);
      wf = std::move(s.wf);
      wg = std::move(s.wg);
      loss_f += static_cast<double>(s.loss_f);
      loss_g += static_cast<double>(s.loss_g);
      selected += s.selected_fraction_f;
    }
    const double steps = cfg.n_max;
    result.history.push_back({epoch, loss_f / steps, loss_g / steps, drop_rate(epoch, cfg),
                              selected / steps});
    result.f.loss_history.push_back(static_cast<Scalar>(loss_f / steps));
    result.g.loss_history.push_back(static_cast<Scalar>(loss_g / steps));
  }
  result.f.w = std::move(wf);
  result.g.w = std::move(wg);
  return result;
}

template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
TrainResult<Scalar> train(const std::vector<PixelBatch<Scalar>>& dataset, const CoteachConfig& cfg) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty dataset");
  auto [wf, wg] = initial_weights<Scalar>(dataset.front().dim(), cfg);
  return train<Scalar, Learner>(dataset, cfg, std::move(wf), std::move(wg));
}

/// Single-learner baseline with the same schedule: plain gradient descent on
/// the mean logistic loss over every pixel, starting from f's initial weights.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
LearnerState<Scalar> train_baseline(const std::vector<PixelBatch<Scalar>>& dataset,
                                    const CoteachConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "train_baseline: empty dataset");
  LearnerState<Scalar> state;
  state.w = initial_weights<Scalar>(dataset.front().dim(), cfg).first;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= cfg.t_max; ++epoch) {
    rng.shuffle(order);
    double loss = 0.0;
    for (int step = 0; step < cfg.n_max; ++step) {
      const auto& batch = dataset[order[static_cast<std::size_t>(step) % order.size()]];
      loss += static_cast<double>(mean_loss<Scalar, Learner>(state.w, batch));
      state.w -= static_cast<Scalar>(cfg.eta) * loss_gradient<Scalar, Learner>(state.w, batch);
      if (!state.w.allFinite())
        throw Error(ErrorCode::kDivergence, "train_baseline: parameters became non-finite");
    }
    state.loss_history.push_back(static_cast<Scalar>(loss / cfg.n_max));
  }
  return state;
}

/// Largest relative difference between the analytic gradient of the mean
/// loss and its central finite difference with the given step.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
Scalar gradient_check(const Vector<Scalar>& w, const PixelBatch<Scalar>& batch,
                      Scalar step = Scalar(1e-5)) {
  const Vector<Scalar> analytic = loss_gradient<Scalar, Learner>(w, batch);
  Scalar worst = 0;
  for (std::ptrdiff_t i = 0; i < w.size(); ++i) {
    Vector<Scalar> up = w, down = w;
    up[i] += step;
    down[i] -= step;
    const Scalar numeric =
        (mean_loss<Scalar, Learner>(up, batch) - mean_loss<Scalar, Learner>(down, batch)) /
        (Scalar(2) * step);
    const Scalar scale =
        std::max({std::abs(analytic[i]), std::abs(numeric), Scalar(1e-6)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

/// Fraction of pixels where the learner's pseudo-label matches `truth`.
template <typename Scalar, typename Learner = LinearLogisticLearner<Scalar>>
double pixel_accuracy(const Vector<Scalar>& w, const std::vector<PixelBatch<Scalar>>& batches) {
  std::int64_t correct = 0, total = 0;
  for (const auto& b : batches) {
    const BinaryMask pl = pseudo_label<Scalar, Learner>(w, b);
    const std::uint8_t* p = pl.bits.data();
    for (std::ptrdiff_t i = 0; i < b.pixels(); ++i) correct += p[i] == b.labels[i];
    total += b.pixels();
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

inline constexpr int kPixelFeatureDim = 6;

/// Features per pixel of the window: [1, R, G, B, local mean, local std],
/// color scaled to [0,1], local statistics of gray level over the 3x3
/// neighborhood clamped at the image border.
PixelBatch<double> make_pixel_batch(const RgbImage& img, const BinaryMask& labels,
                                    TileOrigin origin, std::ptrdiff_t size);

/// Flips each label independently with probability `rate` (seeded).
void flip_labels(PixelBatch<double>& batch, double rate, std::uint64_t seed);

/// key=value lines, '#' comments. Throws kSchema naming the line on errors.
std::map<std::string, std::string> parse_key_value_file(const fs::path& path);
std::map<std::string, std::string> parse_key_value_text(const std::string& text,
                                                        const std::string& source);

/// Consumes the co-teaching keys from `kv`, leaving any others in place.
CoteachConfig coteach_config_from(std::map<std::string, std::string>& kv,
                                  const std::string& source);

/// epoch,loss_f,loss_g,drop_rate,selected_fraction
std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace wsibench
