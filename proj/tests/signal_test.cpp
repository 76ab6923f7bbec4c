// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vemo/signal.hpp"

namespace {

using namespace vemo::signal;

// Squared magnitude of an order-n Butterworth prototype at ratio w/wc.
double analog_gain_db(double ratio, int order) { return 10.0 * std::log10(1.0 / (1.0 + std::pow(ratio, 2 * order))); }

std::vector<double> sinusoid(double freq, double fs, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

TEST(Butterworth, SectionCountMatchesOrder) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  EXPECT_EQ(f.order(), 8);
  EXPECT_EQ(f.sections().size(), 4u);
}

TEST(Butterworth, MinusThreeDbAtCutoff) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  EXPECT_NEAR(f.gain_db(5.0), -3.0103, 0.05);
}

TEST(Butterworth, UnityDcGain) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  EXPECT_NEAR(f.dc_gain(), 1.0, 1e-12);
  EXPECT_NEAR(f.gain_db(0.0), 0.0, 1e-10);
  for (double fc : {0.5, 5.0, 25.0, 45.0}) {
    EXPECT_NEAR(design_butterworth_lowpass(8, fc, 100.0).dc_gain(), 1.0, 1e-9) << fc;
  }
}

TEST(Butterworth, OneOctaveAttenuation) {
  // analog prototype at 2x cutoff: 1 / (1 + 2^16)
  const double analog = analog_gain_db(2.0, 8);
  EXPECT_NEAR(analog, -48.165, 1e-3);

  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  const double digital = f.gain_db(10.0);
  EXPECT_LE(digital, -48.0);
  // bilinear transform: the digital response is the analog one at the
  // prewarped frequency ratio
  const double warped = std::tan(std::numbers::pi * 10.0 / 100.0) / std::tan(std::numbers::pi * 5.0 / 100.0);
  EXPECT_NEAR(digital, analog_gain_db(warped, 8), 1e-8);
}

TEST(Butterworth, MagnitudeMonotoneNonIncreasing) {
  for (double fc : {0.5, 5.0, 25.0, 45.0}) {
    const auto f = design_butterworth_lowpass(8, fc, 100.0);
    double prev = f.magnitude(0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double m = f.magnitude(50.0 * i / 1000.0);
      EXPECT_LE(m, prev + 1e-12) << "fc=" << fc << " i=" << i;
      prev = m;
    }
  }
}

TEST(Butterworth, RejectsBadArguments) {
  EXPECT_THROW(design_butterworth_lowpass(7, 5.0, 100.0), vemo::InvalidArgument);
  EXPECT_THROW(design_butterworth_lowpass(0, 5.0, 100.0), vemo::InvalidArgument);
  EXPECT_THROW(design_butterworth_lowpass(8, 50.0, 100.0), vemo::InvalidArgument);
  EXPECT_THROW(design_butterworth_lowpass(8, 60.0, 100.0), vemo::InvalidArgument);
  EXPECT_THROW(design_butterworth_lowpass(8, 0.0, 100.0), vemo::InvalidArgument);
}

TEST(ZeroPhase, ConstantPassesUnchanged) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  const std::vector<double> x(500, 3.25);
  const auto y = apply_zero_phase(f, x);
  ASSERT_EQ(y.size(), x.size());
  for (double v : y) EXPECT_NEAR(v, 3.25, 1e-12);
}

TEST(ZeroPhase, PassbandSinusoidKeepsAmplitudeAndPhase) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  const auto x = sinusoid(1.0, 100.0, 1001);  // whole periods
  const auto y = apply_zero_phase(f, x);

  double peak = 0.0;
  for (std::size_t i = 100; i + 100 < y.size(); ++i) peak = std::max(peak, std::abs(y[i]));
  EXPECT_NEAR(peak, 1.0, 0.01);

  auto xcorr = [&](int lag) {
    double s = 0.0;
    for (std::size_t i = 100; i + 100 < x.size(); ++i) s += x[i] * y[static_cast<std::size_t>(static_cast<int>(i) + lag)];
    return s;
  };
  int best = 0;
  double best_val = xcorr(0);
  for (int lag = -20; lag <= 20; ++lag) {
    if (xcorr(lag) > best_val) {
      best_val = xcorr(lag);
      best = lag;
    }
  }
  EXPECT_EQ(best, 0);
}

TEST(ZeroPhase, StopbandSinusoidRemoved) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  const auto x = sinusoid(40.0, 100.0, 3001);
  const auto y = apply_zero_phase(f, x);
  // steady state; the first ~2 s carry the start-up transient of the padded pass
  for (std::size_t i = 200; i < y.size(); ++i) EXPECT_LT(std::abs(y[i]), 1e-6) << i;
}

TEST(ZeroPhase, EdgeTransientMatchesReference) {
  // scipy.signal.sosfiltfilt(butter(8, 5, fs=100, output="sos"), x, padtype="odd", padlen=24)
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  const auto y = apply_zero_phase(f, sinusoid(40.0, 100.0, 3001));
  EXPECT_NEAR(y[0], 7.37221793e-03, 1e-11);
  EXPECT_NEAR(y[50], -5.13626331e-04, 1e-12);
  EXPECT_NEAR(y[100], 3.31328548e-05, 1e-13);
  EXPECT_NEAR(y[150], -1.88309588e-06, 1e-14);
}

TEST(ZeroPhase, Linear) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(400), y(400), combo(400);
    const double a = n(rng), b = n(rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = n(rng);
      combo[i] = a * x[i] + b * y[i];
    }
    const auto fx = apply_zero_phase(f, x);
    const auto fy = apply_zero_phase(f, y);
    const auto fc = apply_zero_phase(f, combo);
    double scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) scale = std::max(scale, std::abs(a * fx[i]) + std::abs(b * fy[i]));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(fc[i], a * fx[i] + b * fy[i], 1e-9 * scale);
  }
}

TEST(ZeroPhase, RejectsShortSeries) {
  const auto f = design_butterworth_lowpass(8, 5.0, 100.0);
  EXPECT_THROW(apply_zero_phase(f, std::vector<double>(24, 1.0)), vemo::InvalidArgument);
  EXPECT_NO_THROW(apply_zero_phase(f, std::vector<double>(25, 1.0)));
}

TEST(Welch, PeakAtSinusoidFrequency) {
  const auto x = sinusoid(10.0, 100.0, 8192);
  const auto p = welch_psd(x, 100.0);
  std::size_t arg = 0;
  for (std::size_t k = 1; k < p.power.size(); ++k) {
    if (p.power[k] > p.power[arg]) arg = k;
  }
  EXPECT_NEAR(p.frequencies[arg], 10.0, p.bin_width() / 2.0);
}

TEST(Welch, ZeroSeriesZeroPower) {
  const auto p = welch_psd(std::vector<double>(4096, 0.0), 100.0);
  for (double v : p.power) EXPECT_EQ(v, 0.0);
}

TEST(Welch, WhiteNoiseIntegratesToVariance) {
  std::mt19937_64 rng(42);
  const double sigma = 1.7;
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> x(100000);
  for (double& v : x) v = n(rng);
  const auto p = welch_psd(x, 100.0);
  for (double v : p.power) EXPECT_GE(v, 0.0);
  EXPECT_NEAR(p.integrated_power(), sigma * sigma, 0.05 * sigma * sigma);
}

TEST(Welch, SinusoidPlusNoiseParseval) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.5);
  auto x = sinusoid(3.3, 100.0, 60000, 2.0);
  for (double& v : x) v += n(rng);
  const double variance = 2.0 * 2.0 / 2.0 + 0.25;
  EXPECT_NEAR(welch_psd(x, 100.0).integrated_power(), variance, 0.05 * variance);
}

TEST(Welch, RejectsBadArguments) {
  EXPECT_THROW(welch_psd(std::vector<double>(100, 0.0), 100.0, 1024), vemo::InvalidArgument);
  EXPECT_THROW(welch_psd(std::vector<double>(2000, 0.0), 100.0, 1024, 1.0), vemo::InvalidArgument);
}

TEST(Scaling, TableFactors) {
  const auto t = ScalingTable::standard();
  vemo::ChannelVector r{};
  r[vemo::index(vemo::Channel::speed_x)] = 280.0;
  r[vemo::index(vemo::Channel::accel_x)] = 19.62;
  r[vemo::index(vemo::Channel::steering)] = 0.0;
  const auto s = scale(r, t);
  EXPECT_DOUBLE_EQ(s[vemo::index(vemo::Channel::speed_x)], 1.0);
  EXPECT_DOUBLE_EQ(s[vemo::index(vemo::Channel::accel_x)], 1.0);
  EXPECT_EQ(s[vemo::index(vemo::Channel::steering)], 0.0);
  EXPECT_DOUBLE_EQ(t.factor(vemo::Channel::throttle), 100.0);
  EXPECT_DOUBLE_EQ(t.factor(vemo::Channel::steering), 250.0);
  EXPECT_DOUBLE_EQ(t.factor(vemo::Channel::gear), 6.0);
  EXPECT_DOUBLE_EQ(t.factor(vemo::Channel::yaw_rate), 60.0);
}

TEST(Scaling, RoundTripOnRandomRecords) {
  const auto t = ScalingTable::standard();
  std::mt19937_64 rng(11);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int i = 0; i < 1000; ++i) {
    const vemo::ChannelVector r{u(0, 100), u(0, 100), u(-179, 179), std::floor(u(1, 7)),
                                u(-30, 30), u(-30, 30), u(-120, 120), u(0, 300)};
    const auto back = unscale(scale(r, t), t);
    for (std::size_t c = 0; c < r.size(); ++c) EXPECT_NEAR(back[c], r[c], 1e-12 * std::max(1.0, std::abs(r[c])));
  }
}

TEST(Scaling, RejectsNonPositiveFactor) {
  vemo::ChannelVector f{100, 100, 250, 6, 19.62, 19.62, 60, 0.0};
  EXPECT_THROW(ScalingTable{f}, vemo::InvalidArgument);
}

}  // namespace
