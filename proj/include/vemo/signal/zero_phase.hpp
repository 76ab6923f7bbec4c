// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vemo/error.hpp"
#include "vemo/signal/butterworth.hpp"

namespace vemo::signal {

namespace detail {

// Transposed direct form II state for one section.
struct SectionState {
  double z1 = 0.0;
  double z2 = 0.0;
};

// Steady-state section states for a unit step at the cascade input.
inline std::vector<SectionState> step_initial_states(const SosFilter& filter) {
  std::vector<SectionState> zi;
  zi.reserve(filter.sections().size());
  double level = 1.0;  // steady-state input level seen by the current section
  for (const auto& s : filter.sections()) {
    const double y = s.dc_gain() * level;
    SectionState st;
    st.z2 = s.b2 * level - s.a2 * y;
    st.z1 = s.b1 * level - s.a1 * y + st.z2;
    zi.push_back(st);
    level = y;
  }
  return zi;
}

inline void run_cascade(const SosFilter& filter, std::span<double> data,
                        std::span<const SectionState> zi_unit) {
  const double x0 = data.empty() ? 0.0 : data.front();
  const auto sections = filter.sections();
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    double z1 = zi_unit[k].z1 * x0;
    double z2 = zi_unit[k].z2 * x0;
    for (double& v : data) {
      const double x = v;
      const double y = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * y + z2;
      z2 = s.b2 * x - s.a2 * y;
      v = y;
    }
  }
}

}  // namespace detail

/// Edge padding used by apply_zero_phase: 3 samples per filter order.
inline std::size_t zero_phase_padding(const SosFilter& filter) noexcept {
  return 3 * static_cast<std::size_t>(filter.order());
}

/// Forward-backward filtering with odd-reflection padding at both ends and
/// step-response initial states, so constants pass unchanged and the net phase
/// is zero. Output has the input length.
inline std::vector<double> apply_zero_phase(const SosFilter& filter, std::span<const double> series) {
  const std::size_t pad = zero_phase_padding(filter);
  const std::size_t n = series.size();
  if (n <= pad) {
    throw InvalidArgument("series of length " + std::to_string(n) + " too short for zero-phase " +
                          "filtering; need more than " + std::to_string(pad) + " samples");
  }

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  const double first = series.front();
  const double last = series.back();
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * first - series[i]);
  ext.insert(ext.end(), series.begin(), series.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * last - series[n - 1 - i]);

  const auto zi = detail::step_initial_states(filter);
  detail::run_cascade(filter, ext, zi);
  std::reverse(ext.begin(), ext.end());
  detail::run_cascade(filter, ext, zi);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace vemo::signal
