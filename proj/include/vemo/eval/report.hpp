// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/data/windows.hpp"
#include "vemo/error.hpp"
#include "vemo/eval/metrics.hpp"
#include "vemo/nn/batch.hpp"
#include "vemo/nn/checkpoint.hpp"
#include "vemo/signal/welch.hpp"

namespace vemo::eval {

struct ChannelMetrics {
  double rmse = 0.0;
  double mean_rel_pct = 0.0;
  double median_rel_pct = 0.0;
  double max_abs = 0.0;

  friend bool operator==(const ChannelMetrics&, const ChannelMetrics&) = default;
};

struct ChannelReport {
  ChannelMetrics metrics;
  Histogram histogram;
  std::vector<double> rel_error;  // percent, one entry per window
  std::vector<double> reference;  // physical units
  std::vector<double> prediction;
  signal::PsdEstimate reference_psd;
  signal::PsdEstimate prediction_psd;
};

struct EvalReport {
  std::array<ChannelReport, kNumStates> channels;
  std::size_t window = 0;
  double sample_rate_hz = 0.0;
  std::string provenance;

  std::array<ChannelMetrics, kNumStates> metrics() const {
    std::array<ChannelMetrics, kNumStates> out;
    for (std::size_t s = 0; s < kNumStates; ++s) out[s] = channels[s].metrics;
    return out;
  }
};

/// Welch segment for a series of n samples: the default 1024, shortened for
/// short test sets.
inline std::size_t psd_segment(std::size_t n) { return std::min(signal::kDefaultWelchSegment, n); }

/// Metrics of scaled predictions (4 x N) against a dataset's targets, both
/// unscaled to physical units first.
inline EvalReport evaluate_predictions(const nn::Matrix& prediction, const data::WindowedDataset& ds) {
  const std::size_t n = ds.size();
  if (n == 0) throw InvalidArgument("evaluation set is empty");
  if (prediction.rows() != static_cast<Eigen::Index>(kNumStates) || prediction.cols() != static_cast<Eigen::Index>(n)) {
    throw InvalidArgument("prediction matrix does not match the evaluation set");
  }
  EvalReport rep;
  rep.window = ds.window();
  rep.sample_rate_hz = ds.sample_rate_hz;
  for (std::size_t s = 0; s < kNumStates; ++s) {
    auto& ch = rep.channels[s];
    const double f = ds.scaling().state_factor(s);
    ch.reference.resize(n);
    ch.prediction.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ch.reference[i] = ds.target(i, s) * f;
      ch.prediction[i] = prediction(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) * f;
    }
    ch.metrics.rmse = rmse(ch.reference, ch.prediction);
    ch.metrics.max_abs = max_abs_error(ch.reference, ch.prediction);
    ch.rel_error = relative_error_series(ch.reference, ch.prediction);
    ch.metrics.mean_rel_pct = mean(ch.rel_error);
    ch.metrics.median_rel_pct = median(ch.rel_error);
    ch.histogram = error_histogram(ch.rel_error);
    if (n >= 2) {
      const std::size_t seg = psd_segment(n);
      ch.reference_psd = signal::welch_psd(ch.reference, ds.sample_rate_hz, seg);
      ch.prediction_psd = signal::welch_psd(ch.prediction, ds.sample_rate_hz, seg);
    }
  }
  return rep;
}

/// One-step prediction over every window from ground-truth history.
inline EvalReport one_step_eval(const nn::VemoParams& params, const data::WindowedDataset& test,
                                std::size_t threads = 1) {
  return evaluate_predictions(nn::predict(params, test, threads), test);
}

/// Field-by-field comparison of a checkpoint's data contract and a dataset.
inline std::vector<std::string> contract_diff(const nn::ModelMeta& meta, const data::WindowedDataset& ds) {
  std::vector<std::string> diff;
  if (meta.window != ds.window()) {
    diff.push_back("window: checkpoint " + std::to_string(meta.window) + ", dataset " + std::to_string(ds.window()));
  }
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (meta.scaling.factors()[c] != ds.scaling().factors()[c]) {
      diff.push_back("scaling." + std::string(kChannelNames[c]) + ": checkpoint " +
                     std::to_string(meta.scaling.factors()[c]) + ", dataset " +
                     std::to_string(ds.scaling().factors()[c]));
    }
  }
  if (meta.sample_rate_hz != ds.sample_rate_hz) {
    diff.push_back("sample_rate_hz: checkpoint " + std::to_string(meta.sample_rate_hz) + ", dataset " +
                   std::to_string(ds.sample_rate_hz));
  }
  return diff;
}

inline void require_contract(const nn::ModelMeta& meta, const data::WindowedDataset& ds) {
  const auto diff = contract_diff(meta, ds);
  if (diff.empty()) return;
  std::string msg = "checkpoint and dataset disagree:";
  for (const auto& d : diff) msg += "\n  " + d;
  throw MismatchError(msg);
}

inline EvalReport one_step_eval(const nn::Checkpoint& ckpt, const data::WindowedDataset& test,
                                std::size_t threads = 1) {
  require_contract(ckpt.meta, test);
  auto rep = one_step_eval(ckpt.params, test, threads);
  rep.provenance = ckpt.meta.provenance;
  return rep;
}

/// Relative L2 error of natural-log power over the bins inside [f_lo, f_hi]:
/// ||log P_pred - log P_ref|| / ||log P_ref||.
inline double psd_band_error(const signal::PsdEstimate& reference, const signal::PsdEstimate& prediction,
                             std::pair<double, double> band) {
  const auto& f = reference.frequencies;
  if (f.size() != prediction.frequencies.size() || f.size() != reference.power.size() ||
      f.size() != prediction.power.size()) {
    throw MismatchError("psd_band_error: frequency grids differ in size");
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f[i] - prediction.frequencies[i]) > 1e-9 * std::max(1.0, std::abs(f[i]))) {
      throw MismatchError("psd_band_error: frequency grids differ at bin " + std::to_string(i));
    }
  }
  const auto [lo, hi] = band;
  if (f.empty() || !(lo < hi) || lo < f.front() || hi > f.back()) {
    throw InvalidArgument("psd_band_error: band lies outside the frequency grid");
  }
  double num = 0.0, den = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < lo || f[i] > hi) continue;
    if (!(reference.power[i] > 0.0) || !(prediction.power[i] > 0.0)) {
      throw NumericError("psd_band_error: non-positive power at " + std::to_string(f[i]) + " Hz");
    }
    const double lr = std::log(reference.power[i]);
    const double d = std::log(prediction.power[i]) - lr;
    num += d * d;
    den += lr * lr;
    ++used;
  }
  if (used == 0) throw InvalidArgument("psd_band_error: no frequency bins inside the band");
  if (den == 0.0) throw NumericError("psd_band_error: reference log-power vanishes over the band");
  return std::sqrt(num / den);
}

}  // namespace vemo::eval
