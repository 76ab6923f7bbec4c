// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "vemo/data.hpp"
#include "vemo/synth.hpp"

namespace {

using namespace vemo::synth;
using vemo::ControlVector;

constexpr double kDeg = std::numbers::pi / 180.0;

ManeuverSegment segment(std::string kind, double start, double duration, double throttle = 0.0, double brake = 0.0,
                        double steer = 0.0, int gear = 1) {
  ManeuverSegment s;
  s.kind = std::move(kind);
  s.start_s = start;
  s.duration_s = duration;
  s.throttle_start = s.throttle_end = throttle;
  s.brake_start = s.brake_end = brake;
  s.steer_start_deg = s.steer_end_deg = steer;
  s.gear = gear;
  return s;
}

// Fixed controls, RK4 at step h; returns the state after every step.
std::vector<VehicleState> integrate(const SingleTrackParams& p, VehicleState s, const ControlVector& u, double duration,
                                    double h = 0.01) {
  std::vector<VehicleState> out;
  const auto steps = static_cast<std::size_t>(std::llround(duration / h));
  for (std::size_t i = 0; i < steps; ++i) {
    s = rk4_step(p, s, static_cast<double>(i) * h, h, [&](double) { return u; });
    out.push_back(s);
  }
  return out;
}

// Lateral equilibrium at fixed vx, solved by Newton's method with a
// finite-difference Jacobian on the force balance written out again here.
struct SteadyState {
  double vy = 0.0;
  double yaw_rate = 0.0;
  double fy_f = 0.0;
  double delta_eff = 0.0;
};

SteadyState solve_steady_state(const SingleTrackParams& p, double vx, double steering_deg) {
  const double delta = steering_deg / p.steering_ratio * kDeg;
  const double v_eff = std::hypot(vx, p.low_speed_blend);
  const double de = delta * vx / v_eff;
  auto forces = [&](double vy, double r) {
    const double af = de - (vy + p.front_axle_m * r) / v_eff;
    const double ar = -(vy - p.rear_axle_m * r) / v_eff;
    return std::pair{p.front_force_cap * std::tanh(p.front_cornering_stiffness * af / p.front_force_cap),
                     p.rear_force_cap * std::tanh(p.rear_cornering_stiffness * ar / p.rear_force_cap)};
  };
  // residuals: vy' = 0 and r' = 0
  auto residual = [&](double vy, double r) {
    const auto [ff, fr] = forces(vy, r);
    return std::array<double, 2>{(ff * std::cos(de) + fr) / p.mass_kg - vx * r,
                                 (p.front_axle_m * ff * std::cos(de) - p.rear_axle_m * fr) / p.yaw_inertia_kgm2};
  };
  double vy = 0.0, r = vx * delta / p.wheelbase_m;
  for (int it = 0; it < 100; ++it) {
    const auto f0 = residual(vy, r);
    const double h = 1e-7;
    const auto fv = residual(vy + h, r);
    const auto fr = residual(vy, r + h);
    const double j00 = (fv[0] - f0[0]) / h, j10 = (fv[1] - f0[1]) / h;
    const double j01 = (fr[0] - f0[0]) / h, j11 = (fr[1] - f0[1]) / h;
    const double det = j00 * j11 - j01 * j10;
    const double dvy = (f0[0] * j11 - f0[1] * j01) / det;
    const double dr = (j00 * f0[1] - j10 * f0[0]) / det;
    // backtrack until the residual norm decreases
    const double norm0 = std::hypot(f0[0], f0[1]);
    double step = 1.0;
    while (step > 1e-6) {
      const auto f1 = residual(vy - step * dvy, r - step * dr);
      if (std::hypot(f1[0], f1[1]) < norm0 || norm0 < 1e-15) break;
      step /= 2.0;
    }
    vy -= step * dvy;
    r -= step * dr;
    if (std::abs(dvy) < 1e-14 && std::abs(dr) < 1e-14) break;
  }
  return {vy, r, forces(vy, r).first, de};
}

TEST(SingleTrack, RestStaysAtRest) {
  const ManeuverScript script({segment("rest", 0.0, 20.0)});
  const auto run = simulate({}, script, 100.0, 20.0);
  ASSERT_EQ(run.size(), 2000u);
  for (std::size_t i = 0; i < run.size(); ++i) {
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(run[i][c], c == 3 ? 1.0 : 0.0);
  }
}

TEST(SingleTrack, StraightLineHasNoLateralMotion) {
  const SingleTrackParams p;
  const auto traj = integrate(p, {}, {40.0, 0.0, 0.0, 3.0}, 120.0);
  double prev = 0.0;
  for (const auto& s : traj) {
    EXPECT_EQ(s.vy, 0.0);
    EXPECT_EQ(s.yaw_rate, 0.0);
    EXPECT_GE(s.vx, prev);
    prev = s.vx;
  }
  // approaches the drag balance speed from below
  const double v_balance = std::sqrt(p.drive_force * p.gear_ratios[2] * 0.4 / p.drag_coefficient);
  EXPECT_LT(traj.back().vx, v_balance);
  EXPECT_GT(traj.back().vx, 0.9 * v_balance);
}

TEST(SingleTrack, CoastingSpeedNonIncreasing) {
  const auto traj = integrate({}, {50.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 6.0}, 60.0);
  double prev = 50.0;
  for (const auto& s : traj) {
    EXPECT_LE(s.vx, prev);
    prev = s.vx;
  }
  EXPECT_LT(traj.back().vx, 50.0);
}

TEST(SingleTrack, TopSpeedNearScalingLimit) {
  const SingleTrackParams p;
  const double v_top = std::sqrt(p.drive_force * p.gear_ratios[5] / p.drag_coefficient) * 3.6;
  EXPECT_NEAR(v_top, 280.0, 0.5);
}

TEST(SingleTrack, SteadyStateYawRateMatchesRootFinding) {
  const SingleTrackParams p;
  for (double steer : {20.0, 45.0, -60.0, 90.0}) {
    const double vx = 25.0;
    const auto ss = solve_steady_state(p, vx, steer);
    // throttle holding vx constant: accel_x = -vy * r
    const double drag = p.drag_coefficient * vx * vx;
    const double drive = drag + ss.fy_f * std::sin(ss.delta_eff) - p.mass_kg * ss.vy * ss.yaw_rate;
    const int gear = 3;
    const double throttle = 100.0 * drive / (p.drive_force * p.gear_ratios[gear - 1]);
    ASSERT_GT(throttle, 0.0);
    ASSERT_LT(throttle, 100.0);

    const auto traj = integrate(p, {vx, 0.0, 0.0}, {throttle, 0.0, steer, static_cast<double>(gear)}, 60.0);
    const auto& end = traj.back();
    EXPECT_NEAR(end.vx, vx, 1e-3 * vx) << steer;
    EXPECT_NEAR(end.yaw_rate, ss.yaw_rate, 1e-3 * std::abs(ss.yaw_rate)) << steer;
    EXPECT_NEAR(end.vy, ss.vy, 1e-3 * std::abs(ss.vy) + 1e-6) << steer;
  }
}

TEST(SingleTrack, SmallSteerApproachesLinearBicycle) {
  // linear tires, slip over v_eff: r = delta / (L / v_eff + vx K), K = m (b Cr - a Cf) / (L Cf Cr)
  const SingleTrackParams p;
  const double vx = 20.0, steer = 5.0;
  const auto ss = solve_steady_state(p, vx, steer);
  const double k = p.mass_kg * (p.rear_axle_m * p.rear_cornering_stiffness - p.front_axle_m * p.front_cornering_stiffness) /
                   (p.wheelbase_m * p.front_cornering_stiffness * p.rear_cornering_stiffness);
  const double v_eff = std::hypot(vx, p.low_speed_blend);
  const double r_linear = ss.delta_eff / (p.wheelbase_m / v_eff + vx * k);
  EXPECT_NEAR(ss.yaw_rate, r_linear, 0.01 * std::abs(r_linear));
}

TEST(SingleTrack, MirrorSymmetry) {
  const auto script = build_training_script(5, 40.0);
  std::vector<ManeuverSegment> mirrored = script.segments();
  for (auto& s : mirrored) {
    s.steer_start_deg = -s.steer_start_deg;
    s.steer_end_deg = -s.steer_end_deg;
    s.steer_amplitude_deg = -s.steer_amplitude_deg;
  }
  const auto a = simulate({}, script, 100.0, 40.0);
  const auto b = simulate({}, ManeuverScript(mirrored), 100.0, 40.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 4; c < 8; ++c) scale = std::max(scale, std::abs(a[i][c]));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b[i][4], a[i][4], 1e-9 * scale);
    EXPECT_NEAR(b[i][5], -a[i][5], 1e-9 * scale);
    EXPECT_NEAR(b[i][6], -a[i][6], 1e-9 * scale);
    EXPECT_NEAR(b[i][7], a[i][7], 1e-9 * scale);
  }
}

TEST(SingleTrack, StepHalvingConverges) {
  // 10 s of smooth driving: launch, steer sinusoid, brake ramp
  std::vector<ManeuverSegment> segs{segment("rest", 0.0, 0.5)};
  auto launch = segment("launch", 0.5, 3.0, 0.0, 0.0, 0.0, 2);
  launch.throttle_end = 80.0;
  segs.push_back(launch);
  auto sine = segment("sine_steer", 3.5, 4.0, 80.0, 0.0, 0.0, 2);
  sine.steer_amplitude_deg = 60.0;
  sine.steer_frequency_hz = 0.5;
  segs.push_back(sine);
  auto brake = segment("brake_ramp", 7.5, 2.5, 0.0, 0.0, 0.0, 2);
  brake.brake_end = 40.0;
  segs.push_back(brake);
  segs.push_back(segment("rest", 10.0, 0.5));
  const ManeuverScript script(segs);

  SimulationOptions one, two;
  two.substeps = 2;
  const auto a = simulate({}, script, 100.0, 10.0, one);
  const auto b = simulate({}, script, 100.0, 10.0, two);
  const auto& ea = a[a.size() - 1];
  const auto& eb = b[b.size() - 1];
  for (std::size_t c = 4; c < 8; ++c) {
    EXPECT_LE(std::abs(ea[c] - eb[c]), 1e-6 * std::max(1.0, std::abs(eb[c]))) << vemo::kChannelNames[c];
  }
}

TEST(SingleTrack, RejectsBadParameters) {
  SingleTrackParams p;
  p.mass_kg = -1.0;
  EXPECT_THROW(p.validate(), vemo::InvalidArgument);
  SingleTrackParams q;
  q.front_axle_m = 1.0;
  EXPECT_THROW(q.validate(), vemo::InvalidArgument);
  const ManeuverScript script({segment("rest", 0.0, 5.0)});
  EXPECT_THROW(simulate({}, script, 100.0, 4.005), vemo::InvalidArgument);
  EXPECT_THROW(simulate({}, script, 100.0, 6.0), vemo::InvalidArgument);
  EXPECT_THROW(simulate(p, script, 100.0, 5.0), vemo::InvalidArgument);
}

TEST(Script, DeterministicPerSeed) {
  EXPECT_TRUE(build_training_script(11, 60.0) == build_training_script(11, 60.0));
  EXPECT_FALSE(build_training_script(11, 60.0) == build_training_script(12, 60.0));
}

TEST(Script, ContainsManeuverFamilies) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = build_training_script(seed, 60.0);
    EXPECT_GE(s.count("sine_steer"), 1u);
    EXPECT_GE(s.count("brake_ramp"), 1u);
    EXPECT_NEAR(s.duration(), 60.0, 1e-9);
    for (const auto& seg : s.segments()) {
      if (seg.kind == "sine_steer") {
        EXPECT_GE(seg.steer_frequency_hz, 0.2);
        EXPECT_LE(seg.steer_frequency_hz, 2.0);
      }
    }
    EXPECT_NO_THROW(s.validate(100.0));
  }
}

TEST(Script, TooShortRejected) {
  EXPECT_THROW(build_training_script(1, 10.0), vemo::InvalidArgument);
  EXPECT_NO_THROW(build_training_script(1, 30.0));
}

TEST(Script, JsonRoundTrip) {
  const auto s = build_training_script(3, 45.0);
  const auto back = ManeuverScript::from_json(nlohmann::json::parse(s.to_json().dump()));
  EXPECT_TRUE(back == s);
}

TEST(Script, RejectsGapsAndNonRestEnds) {
  EXPECT_THROW(ManeuverScript({segment("rest", 0.0, 1.0), segment("rest", 1.5, 1.0)}), vemo::InvalidArgument);
  const ManeuverScript moving({segment("rest", 0.0, 1.0), segment("cruise", 1.0, 1.0, 20.0)});
  EXPECT_THROW(moving.validate(100.0), vemo::InvalidArgument);
  const ManeuverScript wild({segment("rest", 0.0, 1.0), segment("cruise", 1.0, 1.0, 120.0), segment("rest", 2.0, 1.0)});
  EXPECT_THROW(wild.validate(100.0), vemo::InvalidArgument);
}

TEST(Script, SimulatedRunsAreValidTelemetry) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const double duration = seed % 2 == 0 ? 60.0 : 40.0;
    const auto run = simulate({}, build_training_script(seed, duration), 100.0, duration);
    EXPECT_NO_THROW(vemo::data::validate_run(run)) << seed;
    double vmax = 0.0, ay = 0.0;
    for (const auto& r : run.records()) {
      vmax = std::max(vmax, r[7]);
      ay = std::max(ay, std::abs(r[5]));
    }
    EXPECT_GT(vmax, 30.0) << seed;
    EXPECT_LT(vmax, 280.0) << seed;
    EXPECT_GT(ay, 1.0) << seed;
  }
}

TEST(Noise, ZeroStdLeavesRunUnchanged) {
  const auto run = simulate({}, build_training_script(1, 30.0), 100.0, 30.0);
  EXPECT_TRUE(add_measurement_noise(run, {0, 0, 0, 0}, 9) == run);
}

TEST(Noise, MonteCarloStd) {
  std::vector<vemo::ChannelVector> recs(10020, vemo::ChannelVector{0, 0, 0, 1, 0, 0, 0, 100.0});
  const vemo::data::Run run("flat", 100.0, recs);
  const double sigma = 0.3;
  const auto noisy = add_measurement_noise(run, {sigma, 0, 0, 0}, 42);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 10; i + 10 < noisy.size(); ++i) {
    const double e = noisy[i][4] - run[i][4];
    sum += e;
    sq += e * e;
    ++n;
    EXPECT_EQ(noisy[i][5], run[i][5]);
  }
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
  EXPECT_NEAR(sd, sigma, 0.1 * sigma);
  EXPECT_TRUE(add_measurement_noise(run, {sigma, 0, 0, 0}, 42) == noisy);
}

TEST(Noise, EndpointsCleanAndSpeedClamped) {
  const auto run = simulate({}, build_training_script(2, 30.0), 100.0, 30.0);
  const auto noisy = add_measurement_noise(run, {0.1, 0.1, 0.3, 5.0}, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(noisy[i], run[i]);
    EXPECT_EQ(noisy[run.size() - 1 - i], run[run.size() - 1 - i]);
  }
  for (const auto& r : noisy.records()) EXPECT_GE(r[7], 0.0);
  EXPECT_NO_THROW(vemo::data::validate_run(noisy));
}

TEST(Noise, NegativeStdRejected) {
  const ManeuverScript script({segment("rest", 0.0, 1.0)});
  const auto run = simulate({}, script, 100.0, 1.0);
  EXPECT_THROW(add_measurement_noise(run, {-0.1, 0, 0, 0}, 1), vemo::InvalidArgument);
}

}  // namespace
