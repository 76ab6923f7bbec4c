// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vemo/error.hpp"

namespace vemo::signal {

/// One biquad with a0 normalized to 1:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(std::complex<double> z_inv) const {
    const auto z2 = z_inv * z_inv;
    return (b0 + b1 * z_inv + b2 * z2) / (1.0 + a1 * z_inv + a2 * z2);
  }

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Lowpass realized as a cascade of second-order sections.
class SosFilter {
 public:
  SosFilter(std::vector<Biquad> sections, int order, double cutoff_hz, double sample_rate_hz)
      : sections_(std::move(sections)),
        order_(order),
        cutoff_hz_(cutoff_hz),
        sample_rate_hz_(sample_rate_hz) {
    if (order_ <= 0 || order_ % 2 != 0 || static_cast<std::size_t>(order_) != 2 * sections_.size()) {
      throw InvalidArgument("SOS order must be even and equal twice the section count");
    }
    if (!(cutoff_hz_ > 0.0) || !(cutoff_hz_ < sample_rate_hz_ / 2.0)) {
      throw InvalidArgument("cutoff must lie in (0, Nyquist)");
    }
  }

  std::span<const Biquad> sections() const noexcept { return sections_; }
  int order() const noexcept { return order_; }
  double cutoff_hz() const noexcept { return cutoff_hz_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }

  std::complex<double> response(double freq_hz) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz_;
    const auto z_inv = std::polar(1.0, -w);
    std::complex<double> h{1.0, 0.0};
    for (const auto& s : sections_) h *= s.response(z_inv);
    return h;
  }

  double magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }

  double gain_db(double freq_hz) const { return 20.0 * std::log10(magnitude(freq_hz)); }

  double dc_gain() const {
    double g = 1.0;
    for (const auto& s : sections_) g *= s.dc_gain();
    return g;
  }

 private:
  std::vector<Biquad> sections_;
  int order_;
  double cutoff_hz_;
  double sample_rate_hz_;
};

/// Digital Butterworth lowpass. The analog prototype is prewarped so the
/// -3 dB point lands exactly on `cutoff_hz`, mapped with the bilinear
/// transform, and conjugate pole pairs become sections (all zeros at z = -1).
/// Sections are ordered from lowest to highest pole radius, each scaled to
/// unity DC gain.
inline SosFilter design_butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
  if (order < 2 || order % 2 != 0) {
    throw InvalidArgument("Butterworth order must be a positive even integer, got " +
                          std::to_string(order));
  }
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
    throw InvalidArgument("cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, " +
                          std::to_string(sample_rate_hz / 2.0) + ") Hz");
  }

  const double fs2 = 2.0 * sample_rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);

  std::vector<std::complex<double>> poles;
  poles.reserve(order / 2);
  for (int k = 0; k < order / 2; ++k) {
    // upper-half-plane analog pole of the normalized prototype, scaled
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    const auto s = warped * std::polar(1.0, theta);
    poles.push_back((fs2 + s) / (fs2 - s));
  }
  std::sort(poles.begin(), poles.end(),
            [](const auto& a, const auto& b) { return std::abs(a) < std::abs(b); });

  std::vector<Biquad> sections;
  sections.reserve(poles.size());
  for (const auto& p : poles) {
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    sections.push_back(s);
  }
  return SosFilter(std::move(sections), order, cutoff_hz, sample_rate_hz);
}

}  // namespace vemo::signal
