// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>

#include "vemo/channels.hpp"
#include "vemo/error.hpp"

namespace vemo::signal {

inline constexpr double kStandardGravity = 9.81;

/// Per-channel reference magnitudes used to make model inputs and outputs
/// order one. Factors follow the channel layout in channels.hpp.
class ScalingTable {
 public:
  /// u_t 100, u_b 100, u_s 250 deg, u_g 6, a_x 2g, a_y 2g, yaw 60 deg/s,
  /// v_x 280 km/h.
  static ScalingTable standard(double gravity = kStandardGravity) {
    return ScalingTable({100.0, 100.0, 250.0, 6.0, 2.0 * gravity, 2.0 * gravity, 60.0, 280.0});
  }

  explicit ScalingTable(const ChannelVector& factors) : factors_(factors) {
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      if (!(factors_[c] > 0.0) || !std::isfinite(factors_[c])) {
        throw InvalidArgument("scaling factor for " + std::string(kChannelNames[c]) +
                              " must be finite and positive");
      }
    }
  }

  const ChannelVector& factors() const noexcept { return factors_; }
  double factor(Channel c) const noexcept { return factors_[index(c)]; }
  double state_factor(std::size_t s) const noexcept { return factors_[kFirstState + s]; }

  ChannelVector scale(const ChannelVector& physical) const noexcept {
    ChannelVector out;
    for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = physical[c] / factors_[c];
    return out;
  }

  ChannelVector unscale(const ChannelVector& scaled) const noexcept {
    ChannelVector out;
    for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = scaled[c] * factors_[c];
    return out;
  }

  StateArray scale_state(const StateArray& physical) const noexcept {
    StateArray out;
    for (std::size_t s = 0; s < kNumStates; ++s) out[s] = physical[s] / state_factor(s);
    return out;
  }

  StateArray unscale_state(const StateArray& scaled) const noexcept {
    StateArray out;
    for (std::size_t s = 0; s < kNumStates; ++s) out[s] = scaled[s] * state_factor(s);
    return out;
  }

  friend bool operator==(const ScalingTable&, const ScalingTable&) = default;

 private:
  ChannelVector factors_;
};

inline ChannelVector scale(const ChannelVector& record, const ScalingTable& table) {
  return table.scale(record);
}

inline ChannelVector unscale(const ChannelVector& record, const ScalingTable& table) {
  return table.unscale(record);
}

}  // namespace vemo::signal
