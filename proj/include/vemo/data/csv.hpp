// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/data/run.hpp"
#include "vemo/error.hpp"

namespace vemo::data {

/// Maps telemetry columns onto channels. Defaults match the native header
/// `t,u_t,u_b,u_s,u_g,a_x,a_y,yaw_rate,v_x`.
struct CsvSchema {
  std::string time_column = "t";
  std::array<std::string, kNumChannels> channel_columns = {
      "u_t", "u_b", "u_s", "u_g", "a_x", "a_y", "yaw_rate", "v_x"};
  double sample_rate_hz = kDefaultSampleRateHz;
  char separator = ',';
  double timestamp_jitter_s = 1e-6;
  StandstillTolerance standstill{};
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view field, std::string_view column, std::size_t row) {
  field = trim(field);
  if (field.empty()) throw ValidationError("missing value in column '" + std::string(column) + "'", row);
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError("cannot parse '" + std::string(field) + "' in column '" +
                              std::string(column) + "'",
                          row);
  }
  return v;
}

inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Reads a telemetry table without checking domains or standstill. Timestamps
/// must advance by exactly 1/sample_rate within the schema's jitter.
inline Run read_run_unchecked(std::istream& in, const CsvSchema& schema, std::string label) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("telemetry stream has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_fields(line, schema.separator);

  auto find_column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (detail::trim(header[i]) == name) return i;
    }
    throw ValidationError("missing column '" + name + "'");
  };
  const std::size_t time_col = find_column(schema.time_column);
  std::array<std::size_t, kNumChannels> cols{};
  for (std::size_t c = 0; c < kNumChannels; ++c) cols[c] = find_column(schema.channel_columns[c]);

  const double dt = 1.0 / schema.sample_rate_hz;
  std::vector<ChannelVector> records;
  std::optional<double> t0;
  double prev_t = 0.0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto fields = detail::split_fields(line, schema.separator);
    if (fields.size() != header.size()) {
      throw ValidationError("expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            row);
    }
    const double t = detail::parse_number(fields[time_col], schema.time_column, row);
    if (!std::isfinite(t)) throw ValidationError("timestamp is not finite", row);
    if (!t0) {
      t0 = t;
    } else {
      if (!(t > prev_t)) throw ValidationError("timestamps are not strictly increasing", row);
      const double expected = *t0 + static_cast<double>(records.size()) * dt;
      if (std::abs(t - expected) > schema.timestamp_jitter_s) {
        throw ValidationError("non-uniform time step", row);
      }
    }
    prev_t = t;
    ChannelVector r{};
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      r[c] = detail::parse_number(fields[cols[c]], schema.channel_columns[c], row);
    }
    records.push_back(r);
  }
  return Run(std::move(label), schema.sample_rate_hz, std::move(records), t0.value_or(0.0));
}

/// Reads and validates a telemetry run: domains plus standstill endpoints.
inline Run load_run(std::istream& in, const CsvSchema& schema = {}, std::string label = "run") {
  Run run = read_run_unchecked(in, schema, std::move(label));
  validate_run(run, schema.standstill);
  return run;
}

/// Writes the native schema with shortest round-trip number formatting, so
/// reading the output back reproduces every value bit for bit.
inline void write_run(std::ostream& out, const Run& run) {
  out << "t";
  for (auto name : kChannelNames) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < run.size(); ++i) {
    out << detail::format_number(run.time_at(i));
    for (double v : run[i]) out << ',' << detail::format_number(v);
    out << '\n';
  }
}

}  // namespace vemo::data
