// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/data/run.hpp"
#include "vemo/error.hpp"
#include "vemo/signal/scaling.hpp"

namespace vemo::data {

inline constexpr std::size_t kDefaultWindow = 100;

/// Supervised pairs for one-step prediction. Input slab n holds the scaled
/// records n..n+k-1 (layout n, t, channel); target row n is the scaled state
/// at n+k.
class WindowedDataset {
 public:
  WindowedDataset(std::size_t window, signal::ScalingTable scaling)
      : window_(window), scaling_(std::move(scaling)) {}

  WindowedDataset(std::size_t window, signal::ScalingTable scaling, std::vector<double> inputs,
                  std::vector<double> targets)
      : window_(window), scaling_(std::move(scaling)), inputs_(std::move(inputs)), targets_(std::move(targets)) {
    if (window_ == 0) throw InvalidArgument("window length must be positive");
    if (targets_.size() % kNumStates != 0 || inputs_.size() != count() * window_ * kNumChannels) {
      throw InvalidArgument("windowed dataset arrays have inconsistent shapes");
    }
  }

  std::size_t window() const noexcept { return window_; }
  std::size_t size() const noexcept { return targets_.size() / kNumStates; }
  std::size_t count() const noexcept { return size(); }
  bool empty() const noexcept { return targets_.empty(); }
  const signal::ScalingTable& scaling() const noexcept { return scaling_; }

  double input(std::size_t n, std::size_t t, std::size_t c) const {
    return inputs_[(n * window_ + t) * kNumChannels + c];
  }
  double target(std::size_t n, std::size_t s) const { return targets_[n * kNumStates + s]; }

  /// Row-major (k x 8) block for window n.
  std::span<const double> window_slab(std::size_t n) const {
    return std::span<const double>(inputs_).subspan(n * window_ * kNumChannels, window_ * kNumChannels);
  }
  std::span<const double> target_row(std::size_t n) const {
    return std::span<const double>(targets_).subspan(n * kNumStates, kNumStates);
  }

  const std::vector<double>& inputs() const noexcept { return inputs_; }
  const std::vector<double>& targets() const noexcept { return targets_; }

  /// Windows [begin, end) as a new dataset.
  WindowedDataset slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw InvalidArgument("dataset slice out of range");
    const std::size_t slab = window_ * kNumChannels;
    WindowedDataset out(window_, scaling_,
                        std::vector<double>(inputs_.begin() + static_cast<std::ptrdiff_t>(begin * slab),
                                            inputs_.begin() + static_cast<std::ptrdiff_t>(end * slab)),
                        std::vector<double>(targets_.begin() + static_cast<std::ptrdiff_t>(begin * kNumStates),
                                            targets_.begin() + static_cast<std::ptrdiff_t>(end * kNumStates)));
    out.source_labels = source_labels;
    out.cutoff_hz = cutoff_hz;
    out.sample_rate_hz = sample_rate_hz;
    out.provenance = provenance;
    return out;
  }

  std::vector<std::string> source_labels;
  double cutoff_hz = 0.0;  // 0 when the source was not filtered
  double sample_rate_hz = kDefaultSampleRateHz;
  std::string provenance;

  friend bool operator==(const WindowedDataset&, const WindowedDataset&) = default;

 private:
  std::size_t window_;
  signal::ScalingTable scaling_;
  std::vector<double> inputs_;
  std::vector<double> targets_;
};

/// Windows whose inputs come from `input_run` and whose targets come from
/// `target_run`. Both runs must be index-aligned. Used to feed a model inputs
/// filtered differently from its reference.
inline WindowedDataset make_windows(const Run& input_run, const Run& target_run, std::size_t window,
                                    const signal::ScalingTable& scaling) {
  if (window == 0) throw InvalidArgument("window length must be positive");
  if (input_run.size() != target_run.size()) {
    throw InvalidArgument("input and target runs differ in length");
  }
  const std::size_t total = input_run.size();
  if (total <= window) {
    throw InvalidArgument("insufficient data: run '" + input_run.label() + "' has " +
                          std::to_string(total) + " samples, window needs more than " +
                          std::to_string(window));
  }
  const std::size_t count = total - window;

  std::vector<ChannelVector> scaled(total);
  for (std::size_t i = 0; i < total; ++i) scaled[i] = scaling.scale(input_run[i]);

  std::vector<double> inputs(count * window * kNumChannels);
  std::vector<double> targets(count * kNumStates);
  for (std::size_t n = 0; n < count; ++n) {
    double* slab = inputs.data() + n * window * kNumChannels;
    for (std::size_t t = 0; t < window; ++t) {
      const auto& r = scaled[n + t];
      std::copy(r.begin(), r.end(), slab + t * kNumChannels);
    }
    const auto target = scaling.scale(target_run[n + window]);
    for (std::size_t s = 0; s < kNumStates; ++s) targets[n * kNumStates + s] = target[kFirstState + s];
  }

  WindowedDataset ds(window, scaling, std::move(inputs), std::move(targets));
  ds.source_labels = {input_run.label()};
  ds.sample_rate_hz = input_run.sample_rate_hz();
  return ds;
}

inline WindowedDataset make_windows(const Run& run, std::size_t window, const signal::ScalingTable& scaling) {
  return make_windows(run, run, window, scaling);
}

/// Contiguous split. The validation side drops its first `window` windows,
/// which share samples with the tail of the training side.
inline std::pair<WindowedDataset, WindowedDataset> split_dataset(const WindowedDataset& ds, double train_fraction,
                                                                 double val_fraction) {
  if (!(train_fraction > 0.0) || !(val_fraction > 0.0)) {
    throw InvalidArgument("split fractions must both be positive");
  }
  if (std::abs(train_fraction + val_fraction - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must sum to 1");
  }
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  const std::size_t val_begin = n_train + ds.window();
  if (n_train == 0 || val_begin >= n) {
    throw InvalidArgument("split leaves an empty side: " + std::to_string(n) + " windows, " +
                          std::to_string(n_train) + " for training, window " + std::to_string(ds.window()));
  }
  return {ds.slice(0, n_train), ds.slice(val_begin, n)};
}

}  // namespace vemo::data
