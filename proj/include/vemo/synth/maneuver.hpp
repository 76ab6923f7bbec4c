// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vemo/channels.hpp"
#include "vemo/error.hpp"

namespace vemo::synth {

/// One piece of a control schedule. Throttle, brake and the steering base
/// ramp linearly from start to end values over the segment; a sinusoid
/// (phase zero at segment start) rides on the steering base. Gear is constant.
struct ManeuverSegment {
  std::string kind = "rest";
  double start_s = 0.0;
  double duration_s = 0.0;
  double throttle_start = 0.0, throttle_end = 0.0;  // percent
  double brake_start = 0.0, brake_end = 0.0;        // percent
  double steer_start_deg = 0.0, steer_end_deg = 0.0;
  double steer_amplitude_deg = 0.0;
  double steer_frequency_hz = 0.0;
  int gear = 1;

  double end_s() const noexcept { return start_s + duration_s; }

  ControlVector controls_at(double t) const noexcept {
    const double tau = std::clamp((t - start_s) / duration_s, 0.0, 1.0);
    auto lerp = [tau](double a, double b) { return a + (b - a) * tau; };
    ControlVector u;
    u.throttle = lerp(throttle_start, throttle_end);
    u.brake = lerp(brake_start, brake_end);
    u.steering_deg = lerp(steer_start_deg, steer_end_deg) +
                     steer_amplitude_deg * std::sin(2.0 * std::numbers::pi * steer_frequency_hz * (t - start_s));
    u.gear = gear;
    return u;
  }

  friend bool operator==(const ManeuverSegment&, const ManeuverSegment&) = default;
};

inline void to_json(nlohmann::json& j, const ManeuverSegment& s) {
  j = nlohmann::json{{"kind", s.kind},
                     {"start_s", s.start_s},
                     {"duration_s", s.duration_s},
                     {"throttle", {s.throttle_start, s.throttle_end}},
                     {"brake", {s.brake_start, s.brake_end}},
                     {"steer_deg", {s.steer_start_deg, s.steer_end_deg}},
                     {"steer_amplitude_deg", s.steer_amplitude_deg},
                     {"steer_frequency_hz", s.steer_frequency_hz},
                     {"gear", s.gear}};
}

inline void from_json(const nlohmann::json& j, ManeuverSegment& s) {
  s.kind = j.at("kind").get<std::string>();
  s.start_s = j.at("start_s").get<double>();
  s.duration_s = j.at("duration_s").get<double>();
  s.throttle_start = j.at("throttle").at(0).get<double>();
  s.throttle_end = j.at("throttle").at(1).get<double>();
  s.brake_start = j.at("brake").at(0).get<double>();
  s.brake_end = j.at("brake").at(1).get<double>();
  s.steer_start_deg = j.at("steer_deg").at(0).get<double>();
  s.steer_end_deg = j.at("steer_deg").at(1).get<double>();
  s.steer_amplitude_deg = j.at("steer_amplitude_deg").get<double>();
  s.steer_frequency_hz = j.at("steer_frequency_hz").get<double>();
  s.gear = j.at("gear").get<int>();
}

/// Piecewise control schedule covering [0, duration()).
class ManeuverScript {
 public:
  ManeuverScript() = default;
  explicit ManeuverScript(std::vector<ManeuverSegment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw InvalidArgument("maneuver script has no segments");
    double t = 0.0;
    for (const auto& s : segments_) {
      if (!(s.duration_s > 0.0)) throw InvalidArgument("segment '" + s.kind + "' has non-positive duration");
      if (std::abs(s.start_s - t) > 1e-9) throw InvalidArgument("segments must be contiguous from t = 0");
      t = s.end_s();
    }
  }

  const std::vector<ManeuverSegment>& segments() const noexcept { return segments_; }
  double duration() const noexcept { return segments_.empty() ? 0.0 : segments_.back().end_s(); }

  std::size_t count(std::string_view kind) const {
    return static_cast<std::size_t>(std::count_if(segments_.begin(), segments_.end(),
                                                  [&](const auto& s) { return s.kind == kind; }));
  }

  ControlVector controls_at(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const ManeuverSegment& s) { return v < s.start_s; });
    if (it != segments_.begin()) --it;
    return it->controls_at(t);
  }

  /// Throws when any sample at `sample_rate_hz` leaves the control domains,
  /// or the script does not start and end with zero controls in first gear.
  void validate(double sample_rate_hz) const {
    const auto steps = static_cast<std::size_t>(std::floor(duration() * sample_rate_hz));
    for (std::size_t i = 0; i <= steps; ++i) {
      const double t = std::min(static_cast<double>(i) / sample_rate_hz, duration());
      const auto u = controls_at(t);
      if (u.throttle < 0.0 || u.throttle > 100.0 || u.brake < 0.0 || u.brake > 100.0 ||
          !(std::abs(u.steering_deg) < 180.0) || u.gear < 1.0 || u.gear > 6.0) {
        throw InvalidArgument("maneuver script leaves the control domain at t = " + std::to_string(t) + " s");
      }
    }
    auto at_rest = [](const ManeuverSegment& s) {
      return s.throttle_start == 0.0 && s.throttle_end == 0.0 && s.brake_start == 0.0 && s.brake_end == 0.0 &&
             s.steer_start_deg == 0.0 && s.steer_end_deg == 0.0 && s.steer_amplitude_deg == 0.0 && s.gear == 1;
    };
    if (!at_rest(segments_.front()) || !at_rest(segments_.back())) {
      throw InvalidArgument("maneuver script must begin and end with zero controls in first gear");
    }
  }

  nlohmann::json to_json() const { return nlohmann::json{{"segments", segments_}}; }

  static ManeuverScript from_json(const nlohmann::json& j) {
    return ManeuverScript(j.at("segments").get<std::vector<ManeuverSegment>>());
  }

  friend bool operator==(const ManeuverScript&, const ManeuverScript&) = default;

 private:
  std::vector<ManeuverSegment> segments_;
};

inline constexpr double kMinScriptDuration = 30.0;

namespace detail {

// Point-mass speed estimate used only to pick plausible gears and to keep
// steering maneuvers away from a stopped car. Mirrors the default vehicle.
struct SpeedTracker {
  double v = 0.0;  // m/s

  static int gear_for(double v) {
    const double kph = v * 3.6;
    if (kph < 55.0) return 1;
    if (kph < 90.0) return 2;
    if (kph < 125.0) return 3;
    if (kph < 160.0) return 4;
    if (kph < 200.0) return 5;
    return 6;
  }

  void advance(const ManeuverSegment& s) {
    constexpr double dt = 0.01;
    static constexpr double ratios[] = {3.0, 2.3, 1.8, 1.45, 1.2, 1.0};
    for (double t = 0.0; t < s.duration_s; t += dt) {
      const auto u = s.controls_at(s.start_s + t);
      double f = 2420.0 * ratios[s.gear - 1] * u.throttle / 100.0 - 15000.0 * u.brake / 100.0 * std::tanh(v / 0.3) -
                 0.4 * v * v;
      v = std::max(0.0, v + f / 1300.0 * dt);
    }
  }
};

}  // namespace detail

/// Randomized driving script: launches with gear steps, constant-gear
/// sinusoidal steering (0.2-2 Hz), braking ramps of varying intensity and
/// cruising, bracketed by rest at both ends. Deterministic in `seed`.
inline ManeuverScript build_training_script(std::uint64_t seed, double duration_s) {
  if (!(duration_s >= kMinScriptDuration)) {
    throw InvalidArgument("script duration must be at least " + std::to_string(kMinScriptDuration) + " s");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  constexpr double kLeadRest = 1.5;
  constexpr double kStopBrake = 8.0;
  constexpr double kTailRest = 2.0;
  const double body_end = duration_s - kStopBrake - kTailRest - 0.5;

  std::vector<ManeuverSegment> segs;
  detail::SpeedTracker speed;
  double t = 0.0;
  double throttle = 0.0;

  auto push = [&](ManeuverSegment s) {
    s.start_s = t;
    segs.push_back(s);
    speed.advance(s);
    t = s.end_s();
    throttle = s.throttle_end;
  };

  {
    ManeuverSegment rest;
    rest.duration_s = kLeadRest;
    push(rest);
  }

  auto launch = [&] {
    const double target = uniform(45.0, 100.0);
    const int steps = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < steps && t < body_end; ++i) {
      ManeuverSegment s;
      s.kind = i == 0 ? "throttle_ramp" : "gear_step";
      s.duration_s = std::min(uniform(1.0, 2.5), body_end - t);
      if (s.duration_s <= 0.05) return;
      s.throttle_start = i == 0 ? throttle : target;
      s.throttle_end = target;
      s.gear = detail::SpeedTracker::gear_for(speed.v);
      push(s);
    }
  };

  auto sine_steer = [&] {
    ManeuverSegment s;
    s.kind = "sine_steer";
    s.steer_frequency_hz = uniform(0.2, 2.0);
    const double period = 1.0 / s.steer_frequency_hz;
    const double cycles = std::max(1.0, std::floor(uniform(2.0, 6.0) / period));
    s.duration_s = cycles * period;
    if (t + s.duration_s > body_end) return false;
    // lower amplitude at speed keeps the tires near, not far past, their limit
    const double max_amp = std::clamp(90.0 - 0.35 * speed.v * 3.6, 12.0, 90.0);
    s.steer_amplitude_deg = uniform(0.3, 1.0) * max_amp;
    s.throttle_start = throttle;
    s.throttle_end = throttle;
    s.gear = detail::SpeedTracker::gear_for(speed.v);
    push(s);
    return true;
  };

  auto brake_ramp = [&] {
    const double peak = uniform(20.0, 90.0);
    ManeuverSegment release_throttle;
    release_throttle.kind = "lift";
    release_throttle.duration_s = 0.3;
    release_throttle.throttle_start = throttle;
    release_throttle.gear = detail::SpeedTracker::gear_for(speed.v);
    if (t + 0.3 + 3.0 > body_end) return false;
    push(release_throttle);

    ManeuverSegment ramp;
    ramp.kind = "brake_ramp";
    ramp.duration_s = uniform(0.3, 1.5);
    ramp.brake_end = peak;
    ramp.gear = release_throttle.gear;
    push(ramp);

    ManeuverSegment hold;
    hold.kind = "brake_hold";
    hold.duration_s = std::min(uniform(0.3, 1.5), std::max(0.1, body_end - t - 0.5));
    hold.brake_start = peak;
    hold.brake_end = peak;
    hold.gear = detail::SpeedTracker::gear_for(speed.v);
    push(hold);

    ManeuverSegment release;
    release.kind = "brake_release";
    release.duration_s = 0.4;
    release.brake_start = peak;
    release.gear = detail::SpeedTracker::gear_for(speed.v);
    push(release);
    return true;
  };

  auto cruise = [&] {
    ManeuverSegment s;
    s.kind = "cruise";
    s.duration_s = std::min(uniform(1.0, 3.0), body_end - t);
    if (s.duration_s <= 0.05) return;
    s.throttle_start = throttle;
    s.throttle_end = uniform(15.0, 60.0);
    s.gear = detail::SpeedTracker::gear_for(speed.v);
    push(s);
  };

  // every script exercises each maneuver family at least once
  launch();
  sine_steer();
  brake_ramp();
  while (t < body_end - 0.5) {
    if (speed.v < 12.0) {
      launch();
      continue;
    }
    const auto pick = rng() % 5;
    bool ok = true;
    if (pick == 0) launch();
    else if (pick == 1 || pick == 2) ok = sine_steer();
    else if (pick == 3) ok = brake_ramp();
    else cruise();
    if (!ok) cruise();
  }

  ManeuverSegment stop_ramp;
  stop_ramp.kind = "stop_ramp";
  stop_ramp.duration_s = 0.5;
  stop_ramp.throttle_start = throttle;
  stop_ramp.brake_end = 100.0;
  stop_ramp.gear = detail::SpeedTracker::gear_for(speed.v);
  push(stop_ramp);

  ManeuverSegment stop;
  stop.kind = "stop";
  stop.duration_s = duration_s - kTailRest - t;
  stop.brake_start = 100.0;
  stop.brake_end = 100.0;
  stop.gear = 1;
  push(stop);

  ManeuverSegment rest;
  rest.duration_s = kTailRest;
  push(rest);

  // absorb floating-point drift so the script ends exactly at duration_s
  segs.back().duration_s = duration_s - segs.back().start_s;
  return ManeuverScript(std::move(segs));
}

}  // namespace vemo::synth
