// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "vemo/data/run.hpp"
#include "vemo/data/windows.hpp"
#include "vemo/eval/report.hpp"
#include "vemo/nn/checkpoint.hpp"

namespace vemo::eval {

inline const std::vector<double> kDefaultSweepCutoffs = {45.0, 25.0, 15.0, 5.0, 1.0};

struct SweepRow {
  double input_cutoff_hz = 0.0;
  bool matched = false;  // input filtered at the training cutoff
  std::array<ChannelMetrics, kNumStates> metrics;
};

struct SweepMatrix {
  double training_cutoff_hz = 0.0;
  std::vector<SweepRow> rows;
  std::string provenance;

  const SweepRow& matched_row() const {
    for (const auto& r : rows) {
      if (r.matched) return r;
    }
    throw InvalidArgument("sweep has no matched-cutoff row");
  }
};

/// Cutoffs from `candidates` usable against a model trained at
/// `training_cutoff`, in the given order.
inline std::vector<double> admissible_cutoffs(const std::vector<double>& candidates, double training_cutoff) {
  std::vector<double> out;
  for (double c : candidates) {
    if (c >= training_cutoff) out.push_back(c);
  }
  return out;
}

/// Evaluates the model on inputs filtered at each cutoff against targets
/// filtered at the training cutoff. A matched row (input cutoff equal to the
/// training cutoff) is appended when the list does not already hold one.
inline SweepMatrix noise_sweep(const nn::Checkpoint& ckpt, const data::Run& raw_test,
                               const std::vector<double>& input_cutoffs, double training_cutoff,
                               std::size_t threads = 1) {
  if (!(training_cutoff > 0.0)) throw InvalidArgument("training cutoff must be positive");
  for (double c : input_cutoffs) {
    if (c < training_cutoff) {
      throw InvalidArgument("input cutoff " + std::to_string(c) + " Hz is below the training cutoff " +
                            std::to_string(training_cutoff) + " Hz");
    }
  }
  std::vector<double> cutoffs = input_cutoffs;
  if (std::find(cutoffs.begin(), cutoffs.end(), training_cutoff) == cutoffs.end()) cutoffs.push_back(training_cutoff);

  const data::Run reference = data::filter_run(raw_test, training_cutoff);
  SweepMatrix out;
  out.training_cutoff_hz = training_cutoff;
  out.provenance = ckpt.meta.provenance;
  for (double c : cutoffs) {
    const data::Run input = c == training_cutoff ? reference : data::filter_run(raw_test, c);
    auto ds = data::make_windows(input, reference, ckpt.meta.window, ckpt.meta.scaling);
    require_contract(ckpt.meta, ds);
    const auto rep = one_step_eval(ckpt.params, ds, threads);
    out.rows.push_back({c, c == training_cutoff, rep.metrics()});
  }
  return out;
}

}  // namespace vemo::eval
