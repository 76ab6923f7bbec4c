// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/data/windows.hpp"
#include "vemo/nn/vemo.hpp"
#include "vemo/util/parallel.hpp"

namespace vemo::nn {

inline constexpr std::size_t kPredictChunk = 256;

inline SequenceBatch pack_dataset(const data::WindowedDataset& ds, std::span<const std::size_t> indices) {
  std::vector<std::span<const double>> slabs;
  slabs.reserve(indices.size());
  for (auto n : indices) slabs.push_back(ds.window_slab(n));
  return pack_windows(slabs, ds.window());
}

inline Matrix pack_targets(const data::WindowedDataset& ds, std::span<const std::size_t> indices) {
  Matrix t(static_cast<Eigen::Index>(kNumStates), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t b = 0; b < indices.size(); ++b) {
    for (std::size_t s = 0; s < kNumStates; ++s) {
      t(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(b)) = ds.target(indices[b], s);
    }
  }
  return t;
}

/// Scaled predictions for every window, shape 4 x N. Chunks are fixed-size,
/// so results do not depend on the worker count.
inline Matrix predict(const VemoParams& params, const data::WindowedDataset& ds, std::size_t threads = 1) {
  if (ds.window() == 0) throw InvalidArgument("dataset has zero window length");
  const std::size_t n = ds.size();
  Matrix out(static_cast<Eigen::Index>(kNumStates), static_cast<Eigen::Index>(n));
  const std::size_t chunks = (n + kPredictChunk - 1) / kPredictChunk;
  util::parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kPredictChunk;
    const std::size_t end = std::min(n, begin + kPredictChunk);
    std::vector<std::size_t> idx(end - begin);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = begin + i;
    const auto tr = model_forward(params, pack_dataset(ds, idx));
    out.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) = tr.prediction;
  });
  return out;
}

/// Mean absolute error over all windows and the four channels.
inline double mean_absolute_error(const VemoParams& params, const data::WindowedDataset& ds, std::size_t threads = 1) {
  const Matrix pred = predict(params, ds, threads);
  double sum = 0.0;
  for (std::size_t n = 0; n < ds.size(); ++n) {
    for (std::size_t s = 0; s < kNumStates; ++s) {
      sum += std::abs(pred(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) - ds.target(n, s));
    }
  }
  return sum / static_cast<double>(ds.size() * kNumStates);
}

}  // namespace vemo::nn
