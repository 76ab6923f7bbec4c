// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/data/run.hpp"
#include "vemo/error.hpp"
#include "vemo/synth/maneuver.hpp"

namespace vemo::synth {

/// Planar single-track vehicle. Defaults describe a GT3-sized car whose
/// full-throttle top speed in sixth gear is 280 km/h.
struct SingleTrackParams {
  double mass_kg = 1300.0;
  double yaw_inertia_kgm2 = 1800.0;
  double front_axle_m = 1.2;  // CG to front axle
  double rear_axle_m = 1.5;   // CG to rear axle
  double wheelbase_m = 2.7;
  double front_cornering_stiffness = 80000.0;  // N/rad
  double rear_cornering_stiffness = 100000.0;  // N/rad
  double front_force_cap = 9500.0;             // N
  double rear_force_cap = 9000.0;              // N
  double drive_force = 2420.0;                 // N at full throttle, ratio 1
  double brake_force = 15000.0;                // N at full brake
  double drag_coefficient = 0.4;               // N/(m/s)^2
  std::array<double, 6> gear_ratios = {3.0, 2.3, 1.8, 1.45, 1.2, 1.0};
  double steering_ratio = 12.0;    // wheel deg per road-wheel deg
  double low_speed_blend = 5.0;    // m/s, regularizes slip angles near rest
  double stop_speed = 0.3;         // m/s, smooths brake force through zero speed

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("vehicle parameter ") + name + " must be positive");
    };
    positive(mass_kg, "mass");
    positive(yaw_inertia_kgm2, "yaw_inertia");
    positive(front_axle_m, "front_axle");
    positive(rear_axle_m, "rear_axle");
    positive(wheelbase_m, "wheelbase");
    positive(front_cornering_stiffness, "front_cornering_stiffness");
    positive(rear_cornering_stiffness, "rear_cornering_stiffness");
    positive(front_force_cap, "front_force_cap");
    positive(rear_force_cap, "rear_force_cap");
    positive(drive_force, "drive_force");
    positive(brake_force, "brake_force");
    positive(drag_coefficient, "drag_coefficient");
    positive(steering_ratio, "steering_ratio");
    positive(low_speed_blend, "low_speed_blend");
    positive(stop_speed, "stop_speed");
    for (double g : gear_ratios) positive(g, "gear_ratio");
    if (std::abs(front_axle_m + rear_axle_m - wheelbase_m) > 1e-9) {
      throw InvalidArgument("front and rear axle distances must sum to the wheelbase");
    }
  }
};

/// Body-frame velocities: longitudinal, lateral (m/s) and yaw rate (rad/s).
struct VehicleState {
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
};

/// Accelerations measured at the CG plus the state derivative.
struct Dynamics {
  double accel_x = 0.0;
  double accel_y = 0.0;
  VehicleState derivative;
};

/// Force balance for the given state and controls.
///
/// Tire lateral force is cap * tanh(C * alpha / cap): linear for small slip,
/// saturating smoothly at the cap. Slip angles use sqrt(vx^2 + blend^2) in
/// place of vx, and the steering input is faded by vx / sqrt(vx^2 + blend^2),
/// so a car at rest with the wheel turned produces no force while residual
/// lateral motion is still damped out.
inline Dynamics evaluate_dynamics(const SingleTrackParams& p, const VehicleState& s, const ControlVector& u) {
  const double delta = u.steering_deg / p.steering_ratio * std::numbers::pi / 180.0;
  const double v_eff = std::sqrt(s.vx * s.vx + p.low_speed_blend * p.low_speed_blend);
  const double delta_eff = delta * s.vx / v_eff;

  const double alpha_f = delta_eff - (s.vy + p.front_axle_m * s.yaw_rate) / v_eff;
  const double alpha_r = -(s.vy - p.rear_axle_m * s.yaw_rate) / v_eff;
  const double fy_f = p.front_force_cap * std::tanh(p.front_cornering_stiffness * alpha_f / p.front_force_cap);
  const double fy_r = p.rear_force_cap * std::tanh(p.rear_cornering_stiffness * alpha_r / p.rear_force_cap);

  const auto gear = static_cast<std::size_t>(std::clamp(u.gear, 1.0, 6.0)) - 1;
  const double drive = p.drive_force * p.gear_ratios[gear] * u.throttle / 100.0;
  const double brake = p.brake_force * u.brake / 100.0 * std::tanh(s.vx / p.stop_speed);
  const double drag = p.drag_coefficient * s.vx * std::abs(s.vx);

  Dynamics d;
  d.accel_x = (drive - brake - drag - fy_f * std::sin(delta_eff)) / p.mass_kg;
  d.accel_y = (fy_f * std::cos(delta_eff) + fy_r) / p.mass_kg;
  d.derivative.vx = d.accel_x + s.vy * s.yaw_rate;
  d.derivative.vy = d.accel_y - s.vx * s.yaw_rate;
  d.derivative.yaw_rate =
      (p.front_axle_m * fy_f * std::cos(delta_eff) - p.rear_axle_m * fy_r) / p.yaw_inertia_kgm2;
  return d;
}

inline StateVector measure(const SingleTrackParams& p, const VehicleState& s, const ControlVector& u) {
  const auto d = evaluate_dynamics(p, s, u);
  return {d.accel_x, d.accel_y, s.yaw_rate * 180.0 / std::numbers::pi, s.vx * 3.6};
}

/// One classic RK4 step with controls sampled from `controls(t)`. The
/// longitudinal speed is clamped at zero afterwards.
template <typename ControlFn>
VehicleState rk4_step(const SingleTrackParams& p, const VehicleState& s, double t, double h, ControlFn&& controls) {
  auto f = [&](const VehicleState& x, double tt) { return evaluate_dynamics(p, x, controls(tt)).derivative; };
  auto add = [](const VehicleState& a, const VehicleState& b, double k) {
    return VehicleState{a.vx + k * b.vx, a.vy + k * b.vy, a.yaw_rate + k * b.yaw_rate};
  };
  const auto k1 = f(s, t);
  const auto k2 = f(add(s, k1, h / 2), t + h / 2);
  const auto k3 = f(add(s, k2, h / 2), t + h / 2);
  const auto k4 = f(add(s, k3, h), t + h);
  VehicleState out{s.vx + h / 6 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx),
                   s.vy + h / 6 * (k1.vy + 2 * k2.vy + 2 * k3.vy + k4.vy),
                   s.yaw_rate + h / 6 * (k1.yaw_rate + 2 * k2.yaw_rate + 2 * k3.yaw_rate + k4.yaw_rate)};
  out.vx = std::max(0.0, out.vx);
  return out;
}

struct SimulationOptions {
  std::size_t substeps = 1;  // RK4 steps per sample interval
  VehicleState initial{};
  std::string label = "synthetic";
};

/// Integrates the script and samples controls and measured states at every
/// sample instant t_i = i / sample_rate, i in [0, duration * sample_rate).
/// Controls are held constant over each sample interval, as a logged input
/// would be, so every RK4 step sees smooth dynamics.
inline data::Run simulate(const SingleTrackParams& params, const ManeuverScript& script, double sample_rate_hz,
                          double duration_s, const SimulationOptions& options = {}) {
  params.validate();
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  const double steps_real = duration_s * sample_rate_hz;
  const double steps_rounded = std::round(steps_real);
  if (!(steps_rounded >= 1.0) || std::abs(steps_real - steps_rounded) > 1e-9 * std::max(1.0, steps_real)) {
    throw InvalidArgument("duration * sample rate must be a positive integer number of steps");
  }
  if (script.duration() + 1e-9 < duration_s) throw InvalidArgument("maneuver script is shorter than the duration");
  if (options.substeps == 0) throw InvalidArgument("substeps must be positive");
  script.validate(sample_rate_hz);

  const auto steps = static_cast<std::size_t>(steps_rounded);
  const double dt = 1.0 / sample_rate_hz;
  const double h = dt / static_cast<double>(options.substeps);

  std::vector<ChannelVector> records;
  records.reserve(steps);
  VehicleState state = options.initial;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto u = script.controls_at(t);
    records.push_back(pack(u, measure(params, state, u)));
    auto held = [&u](double) { return u; };
    for (std::size_t k = 0; k < options.substeps; ++k) {
      state = rk4_step(params, state, t + static_cast<double>(k) * h, h, held);
    }
  }
  return data::Run(options.label, sample_rate_hz, std::move(records));
}

/// Additive white Gaussian noise on the four state channels. The first and
/// last `keep_clean` samples keep their original values so standstill
/// endpoints survive; v_x is clamped at zero.
inline data::Run add_measurement_noise(const data::Run& run, const StateArray& noise_std, std::uint64_t seed,
                                       std::size_t keep_clean = data::StandstillTolerance{}.samples) {
  for (double s : noise_std) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("noise standard deviation must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ChannelVector> records(run.records().begin(), run.records().end());
  const std::size_t n = records.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < kNumStates; ++s) {
      const double e = normal(rng);
      const bool endpoint = i < keep_clean || i + keep_clean >= n;
      if (endpoint || noise_std[s] == 0.0) continue;
      records[i][kFirstState + s] += noise_std[s] * e;
    }
    auto& v = records[i][index(Channel::speed_x)];
    v = std::max(0.0, v);
  }
  return data::Run(run.label(), run.sample_rate_hz(), std::move(records), run.start_time_s());
}

}  // namespace vemo::synth
