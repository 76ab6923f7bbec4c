// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/error.hpp"
#include "vemo/signal/butterworth.hpp"
#include "vemo/signal/zero_phase.hpp"

namespace vemo::data {

inline constexpr double kDefaultSampleRateHz = 100.0;

/// Thresholds for "the vehicle is at rest", checked over the first and last
/// `samples` records of a run.
struct StandstillTolerance {
  double speed_kph = 0.5;
  double accel = 0.2;         // m/s^2, applies to a_x and a_y
  double yaw_rate_dps = 0.5;
  std::size_t samples = 10;
};

/// Uniformly sampled telemetry: one 8-channel record per time step.
/// Construction does not validate; see validate_run.
class Run {
 public:
  Run() = default;
  Run(std::string label, double sample_rate_hz, std::vector<ChannelVector> records,
      double start_time_s = 0.0)
      : label_(std::move(label)),
        sample_rate_hz_(sample_rate_hz),
        start_time_s_(start_time_s),
        records_(std::move(records)) {
    if (!(sample_rate_hz_ > 0.0)) throw InvalidArgument("sample rate must be positive");
  }

  const std::string& label() const noexcept { return label_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double start_time_s() const noexcept { return start_time_s_; }
  double time_step() const noexcept { return 1.0 / sample_rate_hz_; }
  double time_at(std::size_t i) const noexcept {
    return start_time_s_ + static_cast<double>(i) / sample_rate_hz_;
  }
  double duration_s() const noexcept { return static_cast<double>(records_.size()) / sample_rate_hz_; }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const ChannelVector& operator[](std::size_t i) const { return records_[i]; }
  std::span<const ChannelVector> records() const noexcept { return records_; }

  std::vector<double> channel(Channel c) const {
    std::vector<double> out(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) out[i] = records_[i][index(c)];
    return out;
  }

  friend bool operator==(const Run&, const Run&) = default;

 private:
  std::string label_;
  double sample_rate_hz_ = kDefaultSampleRateHz;
  double start_time_s_ = 0.0;
  std::vector<ChannelVector> records_;
};

/// Finite values everywhere and each channel inside its physical domain.
/// Rows in messages are 1-based record indices.
inline void validate_domains(const Run& run) {
  for (std::size_t i = 0; i < run.size(); ++i) {
    const auto& r = run[i];
    const std::size_t row = i + 1;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      if (!std::isfinite(r[c])) {
        throw ValidationError(std::string(kChannelNames[c]) + " is not finite", row);
      }
    }
    const auto u = controls_of(r);
    const auto x = state_of(r);
    if (u.throttle < 0.0 || u.throttle > 100.0) throw ValidationError("u_t outside [0,100]", row);
    if (u.brake < 0.0 || u.brake > 100.0) throw ValidationError("u_b outside [0,100]", row);
    if (u.steering_deg <= -180.0 || u.steering_deg >= 180.0) {
      throw ValidationError("u_s outside (-180,180) deg", row);
    }
    if (u.gear < 1.0 || u.gear > 6.0 || u.gear != std::floor(u.gear)) {
      throw ValidationError("u_g not in {1,...,6}", row);
    }
    if (x.speed_kph < 0.0) throw ValidationError("v_x negative", row);
  }
}

inline bool at_standstill(const ChannelVector& r, const StandstillTolerance& tol) noexcept {
  const auto x = state_of(r);
  return x.speed_kph < tol.speed_kph && std::abs(x.accel_x) < tol.accel &&
         std::abs(x.accel_y) < tol.accel && std::abs(x.yaw_rate_dps) < tol.yaw_rate_dps;
}

inline void validate_standstill(const Run& run, const StandstillTolerance& tol = {}) {
  if (run.empty()) throw ValidationError("run '" + run.label() + "' is empty");
  const std::size_t n = std::min(tol.samples, run.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!at_standstill(run[i], tol)) {
      throw ValidationError("run '" + run.label() + "' does not start at standstill", i + 1);
    }
    const std::size_t j = run.size() - 1 - i;
    if (!at_standstill(run[j], tol)) {
      throw ValidationError("run '" + run.label() + "' does not end at standstill", j + 1);
    }
  }
}

inline void validate_run(const Run& run, const StandstillTolerance& tol = {}) {
  validate_domains(run);
  validate_standstill(run, tol);
}

/// Joins runs end to end. Every run must be at rest on both ends, so the
/// joins introduce no discontinuity in the dynamics.
inline Run concat_runs(std::span<const Run> runs, const StandstillTolerance& tol = {}) {
  if (runs.empty()) throw InvalidArgument("concat_runs: no runs given");
  const double rate = runs.front().sample_rate_hz();
  std::vector<ChannelVector> records;
  std::string label;
  for (const auto& run : runs) {
    if (run.sample_rate_hz() != rate) {
      throw InvalidArgument("concat_runs: run '" + run.label() + "' has a different sample rate");
    }
    validate_standstill(run, tol);
    records.insert(records.end(), run.records().begin(), run.records().end());
    label += (label.empty() ? "" : "+") + run.label();
  }
  return Run(std::move(label), rate, std::move(records), runs.front().start_time_s());
}

/// Zero-phase filters every channel, controls included.
inline Run filter_run(const Run& run, const signal::SosFilter& filter) {
  if (filter.sample_rate_hz() != run.sample_rate_hz()) {
    throw InvalidArgument("filter designed for a different sample rate than run '" + run.label() + "'");
  }
  std::vector<ChannelVector> records(run.size());
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto filtered = signal::apply_zero_phase(filter, run.channel(static_cast<Channel>(c)));
    for (std::size_t i = 0; i < run.size(); ++i) records[i][c] = filtered[i];
  }
  return Run(run.label(), run.sample_rate_hz(), std::move(records), run.start_time_s());
}

inline constexpr int kFilterOrder = 8;

inline Run filter_run(const Run& run, double cutoff_hz, int order = kFilterOrder) {
  return filter_run(run, signal::design_butterworth_lowpass(order, cutoff_hz, run.sample_rate_hz()));
}

}  // namespace vemo::data
