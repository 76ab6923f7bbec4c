// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vemo/error.hpp"

namespace vemo::eval {

namespace detail {

inline void check_pair(std::span<const double> y, std::span<const double> y_hat, const char* what) {
  if (y.size() != y_hat.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                          std::to_string(y_hat.size()) + ")");
  }
  if (y.empty()) throw InvalidArgument(std::string(what) + ": empty sequence");
}

}  // namespace detail

inline double rmse(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, "rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - y_hat[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(y.size()));
}

/// Percent residuals normalized by the largest |y| over the whole sequence.
inline std::vector<double> relative_error_series(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, "relative_error_series");
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw InvalidArgument("relative_error_series: reference is identically zero");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = 100.0 * std::abs(y[i] - y_hat[i]) / peak;
  return out;
}

inline double max_abs_error(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, "max_abs_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - y_hat[i]));
  return worst;
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("mean of empty sequence");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

/// Linear interpolation between order statistics, q in [0, 100].
inline double percentile(std::span<const double> xs, double q) {
  if (xs.empty()) throw InvalidArgument("percentile of empty sequence");
  if (!(q >= 0.0 && q <= 100.0)) throw InvalidArgument("percentile must be in [0, 100]");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double pos = q / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline double median(std::span<const double> xs) { return percentile(xs, 50.0); }

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size()); }
  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
};

inline constexpr std::size_t kHistogramBins = 100;
inline constexpr double kHistogramUpperPercentile = 99.5;

/// Uniform bins over [0, p99.5]; samples above the range land in the last bin.
inline Histogram error_histogram(std::span<const double> values, std::size_t bins = kHistogramBins,
                                 double upper_percentile = kHistogramUpperPercentile) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  h.hi = percentile(values, upper_percentile);
  const double width = h.hi / static_cast<double>(bins);
  for (double v : values) {
    std::size_t b = bins - 1;
    if (width > 0.0 && v < h.hi) b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, v) / width));
    if (width == 0.0) b = v > h.hi ? bins - 1 : 0;
    ++h.counts[b];
  }
  return h;
}

}  // namespace vemo::eval
