// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "vemo/error.hpp"

namespace vemo::signal {

struct PsdEstimate {
  std::vector<double> frequencies;  // Hz
  std::vector<double> power;        // units^2 / Hz
  std::size_t segment_len = 0;
  double overlap = 0.0;

  double bin_width() const {
    return frequencies.size() > 1 ? frequencies[1] - frequencies[0] : 0.0;
  }

  /// Rectangle-rule integral of the density; approximates the variance.
  double integrated_power() const {
    double sum = 0.0;
    for (double p : power) sum += p;
    return sum * bin_width();
  }
};

inline constexpr std::size_t kDefaultWelchSegment = 1024;
inline constexpr double kDefaultWelchOverlap = 0.5;

/// Periodic Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

/// Welch estimate: Hann-windowed, mean-removed segments, averaged one-sided
/// periodograms scaled to a density.
inline PsdEstimate welch_psd(std::span<const double> series, double sample_rate_hz,
                             std::size_t segment_len = kDefaultWelchSegment,
                             double overlap = kDefaultWelchOverlap) {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("welch_psd: sample rate must be positive");
  if (segment_len < 2) throw InvalidArgument("welch_psd: segment length must be at least 2");
  if (segment_len > series.size()) {
    throw InvalidArgument("welch_psd: segment length " + std::to_string(segment_len) +
                          " exceeds series length " + std::to_string(series.size()));
  }
  if (!(overlap >= 0.0) || !(overlap < 1.0)) {
    throw InvalidArgument("welch_psd: overlap must be in [0, 1)");
  }

  const std::size_t noverlap = static_cast<std::size_t>(std::floor(overlap * static_cast<double>(segment_len)));
  const std::size_t step = segment_len - noverlap;
  const std::size_t nfreq = segment_len / 2 + 1;
  const bool has_nyquist = segment_len % 2 == 0;

  const auto window = hann_window(segment_len);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;
  const double scale = 1.0 / (sample_rate_hz * window_power);

  Eigen::FFT<double> fft;
  std::vector<double> buf(segment_len);
  std::vector<std::complex<double>> spec;
  std::vector<double> acc(nfreq, 0.0);
  std::size_t segments = 0;

  for (std::size_t start = 0; start + segment_len <= series.size(); start += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < segment_len; ++i) mean += series[start + i];
    mean /= static_cast<double>(segment_len);
    for (std::size_t i = 0; i < segment_len; ++i) buf[i] = (series[start + i] - mean) * window[i];

    fft.fwd(spec, buf);
    for (std::size_t k = 0; k < nfreq; ++k) {
      double p = std::norm(spec[k]) * scale;
      const bool edge = k == 0 || (has_nyquist && k == nfreq - 1);
      if (!edge) p *= 2.0;
      acc[k] += p;
    }
    ++segments;
  }

  PsdEstimate out;
  out.segment_len = segment_len;
  out.overlap = overlap;
  out.frequencies.resize(nfreq);
  out.power.resize(nfreq);
  for (std::size_t k = 0; k < nfreq; ++k) {
    out.frequencies[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(segment_len);
    out.power[k] = acc[k] / static_cast<double>(segments);
  }
  return out;
}

}  // namespace vemo::signal
