// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "vemo/data/windows.hpp"
#include "vemo/error.hpp"
#include "vemo/nn/batch.hpp"
#include "vemo/nn/vemo.hpp"
#include "vemo/train/adam.hpp"
#include "vemo/util/parallel.hpp"

namespace vemo::train {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mae = 0.0;
  double val_mae = 0.0;
  double wall_seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mae = std::numeric_limits<double>::infinity();
  bool stopped_early = false;

  /// Compares every numeric field except wall time.
  bool same_trajectory(const TrainingLog& o) const {
    if (epochs.size() != o.epochs.size() || best_epoch != o.best_epoch || stopped_early != o.stopped_early) return false;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
      if (epochs[i].epoch != o.epochs[i].epoch || epochs[i].train_mae != o.epochs[i].train_mae ||
          epochs[i].val_mae != o.epochs[i].val_mae) {
        return false;
      }
    }
    return best_val_mae == o.best_val_mae;
  }
};

inline void write_training_log(std::ostream& out, const TrainingLog& log, bool include_wall_time = true) {
  out << "epoch,train_mae,val_mae" << (include_wall_time ? ",wall_time_s" : "") << '\n';
  out.precision(17);
  for (const auto& e : log.epochs) {
    out << e.epoch << ',' << e.train_mae << ',' << e.val_mae;
    if (include_wall_time) out << ',' << e.wall_seconds;
    out << '\n';
  }
}

/// Epoch permutation of [0, n): Fisher-Yates driven by a generator seeded
/// from (seed, epoch) only.
inline std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

struct BatchGradient {
  VemoParams gradient;                 // of the batch mean absolute error
  std::vector<double> window_abs_err;  // per window, summed over channels
};

/// Gradient of the batch MAE. The batch is cut into fixed `chunk_size`
/// pieces whose gradients are summed in chunk order.
inline BatchGradient batch_gradient(const VemoParams& params, const data::WindowedDataset& ds,
                                    std::span<const std::size_t> indices, std::size_t chunk_size,
                                    std::size_t threads) {
  const std::size_t n = indices.size();
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<VemoParams> partial(chunks);
  BatchGradient out;
  out.window_abs_err.assign(n, 0.0);

  util::parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = std::min(n, begin + chunk_size);
    const auto idx = indices.subspan(begin, end - begin);
    const auto tr = nn::model_forward(params, nn::pack_dataset(ds, idx));
    const Matrix target = nn::pack_targets(ds, idx);
    const Matrix diff = tr.prediction - target;
    Matrix g = diff.unaryExpr([](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); });
    for (std::size_t b = 0; b < idx.size(); ++b) {
      out.window_abs_err[begin + b] = diff.col(static_cast<Eigen::Index>(b)).cwiseAbs().sum();
    }
    partial[c] = nn::model_backward(params, tr, g);
  });

  out.gradient = std::move(partial.front());
  for (std::size_t c = 1; c < chunks; ++c) {
    detail::for_each_tensor_pair(out.gradient, partial[c], [](const std::string&, Matrix& a, const Matrix& b) { a += b; });
  }
  const double scale = 1.0 / static_cast<double>(n * kNumStates);
  out.gradient.for_each_tensor([&](const std::string&, Matrix& m) { m *= scale; });
  return out;
}

struct FitResult {
  VemoParams params;  // best validation epoch
  TrainingLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on the mean absolute error with seeded per-epoch shuffling,
/// global-norm clipping and early stopping on validation MAE. Training MAE
/// is the mean over the epoch's batches as seen during the epoch.
inline FitResult fit(const data::WindowedDataset& train_set, const data::WindowedDataset& val_set,
                     const TrainConfig& config, VemoParams initial, const EpochCallback& on_epoch = {}) {
  config.validate();
  if (train_set.empty() || val_set.empty()) throw InvalidArgument("training and validation splits must be non-empty");
  if (train_set.window() != val_set.window()) throw InvalidArgument("train and validation windows differ");
  initial.validate();

  TrainState state(std::move(initial));
  FitResult result;
  result.params = state.params;
  std::size_t since_best = 0;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> per_window(train_set.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = epoch_permutation(train_set.size(), config.seed, epoch);
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const auto idx = std::span<const std::size_t>(order).subspan(begin, end - begin);
      auto bg = batch_gradient(state.params, train_set, idx, config.chunk_size, config.threads);
      for (std::size_t b = 0; b < idx.size(); ++b) per_window[idx[b]] = bg.window_abs_err[b];
      if (config.clip_norm > 0.0) {
        const double norm = global_norm(bg.gradient);
        if (norm > config.clip_norm) {
          const double s = config.clip_norm / norm;
          bg.gradient.for_each_tensor([s](const std::string&, Matrix& m) { m *= s; });
        }
      }
      adam_step(state, bg.gradient, config);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mae = std::accumulate(per_window.begin(), per_window.end(), 0.0) /
                    static_cast<double>(per_window.size() * kNumStates);
    rec.val_mae = nn::mean_absolute_error(state.params, val_set, config.threads);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!std::isfinite(rec.val_mae)) {
      throw NumericError("training diverged: validation MAE is not finite at epoch " + std::to_string(epoch));
    }
    if (rec.val_mae < result.log.best_val_mae) {
      result.log.best_val_mae = rec.val_mae;
      result.log.best_epoch = epoch;
      result.params = state.params;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      result.log.stopped_early = true;
      break;
    }
  }
  return result;
}

inline FitResult fit(const data::WindowedDataset& train_set, const data::WindowedDataset& val_set,
                     const TrainConfig& config, const nn::Architecture& arch = {}, const EpochCallback& on_epoch = {}) {
  return fit(train_set, val_set, config, nn::init_params(arch, config.seed), on_epoch);
}

}  // namespace vemo::train
