// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/eval/report.hpp"
#include "vemo/eval/svg.hpp"
#include "vemo/eval/sweep.hpp"

namespace vemo::eval {

inline constexpr std::array<std::string_view, kNumStates> kStateUnits = {"m/s^2", "m/s^2", "deg/s", "km/h"};

namespace detail {

inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fixed(double v, int digits = 4) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

inline std::string column_label(std::size_t s) {
  return std::string(kStateNames[s]) + " [" + std::string(kStateUnits[s]) + "]";
}

struct MetricRow {
  const char* name;
  double ChannelMetrics::*field;
};

inline constexpr std::array<MetricRow, 4> kMetricRows = {{
    {"RMSE", &ChannelMetrics::rmse},
    {"Mean eps_rel [%]", &ChannelMetrics::mean_rel_pct},
    {"Median eps_rel [%]", &ChannelMetrics::median_rel_pct},
    {"E_max", &ChannelMetrics::max_abs},
}};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw InvalidArgument("failed writing " + path.string());
}

}  // namespace detail

/// Metrics table: one row per metric, one column per state channel.
inline void write_summary(std::ostream& out, const EvalReport& rep, const std::string& title = "One-step evaluation") {
  out << title << '\n';
  out << "windows: " << rep.channels[0].reference.size() << ", k: " << rep.window
      << ", sample rate: " << detail::fixed(rep.sample_rate_hz, 1) << " Hz\n";
  if (!rep.provenance.empty()) out << "provenance: " << rep.provenance << '\n';
  out << detail::pad("metric", 20);
  for (std::size_t s = 0; s < kNumStates; ++s) out << detail::pad(detail::column_label(s), 20);
  out << '\n';
  for (const auto& row : detail::kMetricRows) {
    out << detail::pad(row.name, 20);
    for (std::size_t s = 0; s < kNumStates; ++s) out << detail::pad(detail::fixed(rep.channels[s].metrics.*row.field), 20);
    out << '\n';
  }
}

inline void write_histograms_csv(std::ostream& out, const EvalReport& rep) {
  out << "channel,bin,lo_pct,hi_pct,count\n";
  for (std::size_t s = 0; s < kNumStates; ++s) {
    const auto& h = rep.channels[s].histogram;
    const double w = h.bin_width();
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      out << kStateNames[s] << ',' << b << ',' << detail::exact(h.lo + w * static_cast<double>(b)) << ','
          << detail::exact(h.lo + w * static_cast<double>(b + 1)) << ',' << h.counts[b] << '\n';
    }
  }
}

/// Per-window reference, prediction and relative error for every channel.
inline void write_series_csv(std::ostream& out, const EvalReport& rep) {
  out << "index,time_s";
  for (auto name : kStateNames) out << ',' << name << "_ref," << name << "_pred," << name << "_rel_pct";
  out << '\n';
  const std::size_t n = rep.channels[0].reference.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << i << ',' << detail::exact(static_cast<double>(i + rep.window) / rep.sample_rate_hz);
    for (const auto& ch : rep.channels) {
      out << ',' << detail::exact(ch.reference[i]) << ',' << detail::exact(ch.prediction[i]) << ','
          << detail::exact(ch.rel_error[i]);
    }
    out << '\n';
  }
}

inline void write_psd_csv(std::ostream& out, const EvalReport& rep) {
  out << "frequency_hz";
  for (auto name : kStateNames) out << ',' << name << "_ref," << name << "_pred";
  out << '\n';
  const auto& f = rep.channels[0].reference_psd.frequencies;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << detail::exact(f[i]);
    for (const auto& ch : rep.channels) {
      out << ',' << detail::exact(ch.reference_psd.power[i]) << ',' << detail::exact(ch.prediction_psd.power[i]);
    }
    out << '\n';
  }
}

inline void write_sweep_summary(std::ostream& out, const SweepMatrix& m) {
  out << "Input-cutoff sweep, model trained at " << detail::fixed(m.training_cutoff_hz, 2) << " Hz\n";
  if (!m.provenance.empty()) out << "provenance: " << m.provenance << '\n';
  out << detail::pad("channel / metric", 34);
  for (const auto& r : m.rows) out << detail::pad(detail::fixed(r.input_cutoff_hz, 2) + " Hz" + (r.matched ? "*" : ""), 14);
  out << '\n';
  for (std::size_t s = 0; s < kNumStates; ++s) {
    for (const auto& row : detail::kMetricRows) {
      out << detail::pad(detail::column_label(s) + " " + row.name, 34);
      for (const auto& r : m.rows) out << detail::pad(detail::fixed(r.metrics[s].*row.field), 14);
      out << '\n';
    }
  }
  out << "* input filtered at the training cutoff\n";
}

inline void write_sweep_csv(std::ostream& out, const SweepMatrix& m) {
  out << "input_cutoff_hz,matched,channel,rmse,mean_rel_pct,median_rel_pct,max_abs\n";
  for (const auto& r : m.rows) {
    for (std::size_t s = 0; s < kNumStates; ++s) {
      const auto& x = r.metrics[s];
      out << detail::exact(r.input_cutoff_hz) << ',' << (r.matched ? 1 : 0) << ',' << kStateNames[s] << ','
          << detail::exact(x.rmse) << ',' << detail::exact(x.mean_rel_pct) << ',' << detail::exact(x.median_rel_pct)
          << ',' << detail::exact(x.max_abs) << '\n';
    }
  }
}

inline void write_psd_svg(std::ostream& out, const EvalReport& rep, std::size_t s) {
  const auto& ch = rep.channels[s];
  svg::plot(out, {"PSD " + std::string(kStateNames[s]), "frequency [Hz]", "power density", true, false},
            {{"reference", "#1f4e9c", ch.reference_psd.frequencies, ch.reference_psd.power},
             {"prediction", "#c8431e", ch.prediction_psd.frequencies, ch.prediction_psd.power}});
}

inline void write_histogram_svg(std::ostream& out, const EvalReport& rep, std::size_t s) {
  const auto& h = rep.channels[s].histogram;
  svg::Series bars{"count", "#1f4e9c", {}, {}};
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    bars.x.push_back(h.lo + h.bin_width() * (static_cast<double>(b) + 0.5));
    bars.y.push_back(static_cast<double>(h.counts[b]));
  }
  svg::plot(out, {"Relative error histogram " + std::string(kStateNames[s]), "eps_rel [%]", "count", false, true},
            {bars});
}

inline void write_rel_error_svg(std::ostream& out, const EvalReport& rep, std::size_t s) {
  const auto& ch = rep.channels[s];
  svg::Series e{"eps_rel", "#1f4e9c", {}, ch.rel_error};
  for (std::size_t i = 0; i < ch.rel_error.size(); ++i) {
    e.x.push_back(static_cast<double>(i + rep.window) / rep.sample_rate_hz);
  }
  const double t0 = e.x.front(), t1 = e.x.back();
  svg::plot(out, {"Relative error " + std::string(kStateNames[s]), "time [s]", "eps_rel [%]", false, false},
            {e,
             {"mean", "#c8431e", {t0, t1}, {ch.metrics.mean_rel_pct, ch.metrics.mean_rel_pct}},
             {"median", "#2e8b3c", {t0, t1}, {ch.metrics.median_rel_pct, ch.metrics.median_rel_pct}}});
}

template <typename F>
std::string render(F&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

/// Writes summary.txt, the three tables and per-channel SVGs into `dir`.
/// Returns the file names written.
inline std::vector<std::string> write_eval_report(const std::filesystem::path& dir, const EvalReport& rep,
                                                  const std::string& title = "One-step evaluation") {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    detail::write_file(dir / name, content);
    files.push_back(name);
  };
  emit("summary.txt", render([&](std::ostream& o) { write_summary(o, rep, title); }));
  emit("histograms.csv", render([&](std::ostream& o) { write_histograms_csv(o, rep); }));
  emit("series.csv", render([&](std::ostream& o) { write_series_csv(o, rep); }));
  emit("psd.csv", render([&](std::ostream& o) { write_psd_csv(o, rep); }));
  for (std::size_t s = 0; s < kNumStates; ++s) {
    const std::string name(kStateNames[s]);
    emit("psd_" + name + ".svg", render([&](std::ostream& o) { write_psd_svg(o, rep, s); }));
    emit("histogram_" + name + ".svg", render([&](std::ostream& o) { write_histogram_svg(o, rep, s); }));
    emit("rel_error_" + name + ".svg", render([&](std::ostream& o) { write_rel_error_svg(o, rep, s); }));
  }
  return files;
}

inline std::vector<std::string> write_sweep_report(const std::filesystem::path& dir, const SweepMatrix& m) {
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "sweep.txt", render([&](std::ostream& o) { write_sweep_summary(o, m); }));
  detail::write_file(dir / "sweep.csv", render([&](std::ostream& o) { write_sweep_csv(o, m); }));
  std::string svg_body = render([&](std::ostream& o) {
    std::vector<svg::Series> series;
    const std::array<const char*, kNumStates> colors = {"#1f4e9c", "#c8431e", "#2e8b3c", "#7a3ea1"};
    std::vector<const SweepRow*> by_cutoff;
    for (const auto& r : m.rows) by_cutoff.push_back(&r);
    std::sort(by_cutoff.begin(), by_cutoff.end(),
              [](const SweepRow* a, const SweepRow* b) { return a->input_cutoff_hz < b->input_cutoff_hz; });
    for (std::size_t s = 0; s < kNumStates; ++s) {
      svg::Series line{std::string(kStateNames[s]), colors[s], {}, {}};
      for (const SweepRow* rp : by_cutoff) {
        const auto& r = *rp;
        line.x.push_back(r.input_cutoff_hz);
        line.y.push_back(r.metrics[s].mean_rel_pct);
      }
      series.push_back(std::move(line));
    }
    svg::plot(o, {"Mean eps_rel vs input cutoff", "input cutoff [Hz]", "mean eps_rel [%]", false, false}, series);
  });
  detail::write_file(dir / "sweep.svg", svg_body);
  return {"sweep.txt", "sweep.csv", "sweep.svg"};
}

}  // namespace vemo::eval
