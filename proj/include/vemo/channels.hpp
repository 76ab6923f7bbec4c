// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace vemo {

// Column layout shared by telemetry files, runs and model inputs: the four
// driver controls followed by the four vehicle states.
enum class Channel : std::size_t {
  throttle = 0,  // u_t, percent
  brake,         // u_b, percent
  steering,      // u_s, steering-wheel degrees
  gear,          // u_g, 1..6
  accel_x,       // a_x, m/s^2
  accel_y,       // a_y, m/s^2
  yaw_rate,      // deg/s
  speed_x,       // v_x, km/h
};

inline constexpr std::size_t kNumChannels = 8;
inline constexpr std::size_t kNumControls = 4;
inline constexpr std::size_t kNumStates = 4;
inline constexpr std::size_t kFirstState = kNumControls;

inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {
    "u_t", "u_b", "u_s", "u_g", "a_x", "a_y", "yaw_rate", "v_x"};

inline constexpr std::array<std::string_view, kNumStates> kStateNames = {
    "a_x", "a_y", "yaw_rate", "v_x"};

constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }

using ChannelVector = std::array<double, kNumChannels>;
using StateArray = std::array<double, kNumStates>;

struct ControlVector {
  double throttle = 0.0;
  double brake = 0.0;
  double steering_deg = 0.0;
  double gear = 1.0;
};

struct StateVector {
  double accel_x = 0.0;
  double accel_y = 0.0;
  double yaw_rate_dps = 0.0;
  double speed_kph = 0.0;
};

inline ChannelVector pack(const ControlVector& u, const StateVector& x) noexcept {
  return {u.throttle, u.brake, u.steering_deg, u.gear,
          x.accel_x,  x.accel_y, x.yaw_rate_dps, x.speed_kph};
}

inline ControlVector controls_of(const ChannelVector& r) noexcept {
  return {r[0], r[1], r[2], r[3]};
}

inline StateVector state_of(const ChannelVector& r) noexcept {
  return {r[4], r[5], r[6], r[7]};
}

}  // namespace vemo
