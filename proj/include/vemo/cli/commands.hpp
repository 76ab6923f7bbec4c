// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "vemo/cli/config.hpp"
#include "vemo/data.hpp"
#include "vemo/eval.hpp"
#include "vemo/nn.hpp"
#include "vemo/nn/batch.hpp"
#include "vemo/synth.hpp"
#include "vemo/train.hpp"

namespace vemo::cli {

namespace fs = std::filesystem;

/// Independent sub-seed for stream `stream` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline std::string cutoff_tag(double hz) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ghz", hz);
  return buf;
}

inline std::string train_run_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "train_%02zu", i);
  return buf;
}

inline fs::path train_cache_path(const ExperimentConfig& c, double hz) {
  return c.paths.cache() / ("train_" + cutoff_tag(hz) + ".vemods");
}
inline fs::path test_cache_path(const ExperimentConfig& c, double hz) {
  return c.paths.cache() / ("test_" + cutoff_tag(hz) + ".vemods");
}
inline fs::path checkpoint_path(const ExperimentConfig& c) {
  return c.paths.model() / ("checkpoint_" + cutoff_tag(c.cutoff_hz) + ".vemock");
}
inline fs::path training_log_path(const ExperimentConfig& c) {
  return c.paths.model() / ("training_log_" + cutoff_tag(c.cutoff_hz) + ".csv");
}
inline fs::path eval_dir(const ExperimentConfig& c) { return c.paths.reports() / ("eval_" + cutoff_tag(c.cutoff_hz)); }
inline fs::path sweep_dir(const ExperimentConfig& c) { return c.paths.reports() / ("sweep_" + cutoff_tag(c.cutoff_hz)); }

namespace detail {

inline void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create directory " + dir.string());
}

inline void write_text(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << body;
  if (!f) throw InvalidArgument("failed writing " + path.string());
}

inline data::Run read_run_file(const fs::path& path, double sample_rate_hz) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open " + path.string());
  data::CsvSchema schema;
  schema.sample_rate_hz = sample_rate_hz;
  return data::load_run(f, schema, path.stem().string());
}

inline std::vector<fs::path> train_run_files(const ExperimentConfig& c) {
  std::vector<fs::path> files;
  if (fs::is_directory(c.paths.data())) {
    for (const auto& e : fs::directory_iterator(c.paths.data())) {
      const auto name = e.path().filename().string();
      if (name.rfind("train_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument("no training runs in " + c.paths.data().string() + "; run generate first");
  return files;
}

inline void print_manifest_line(std::ostream& out, const std::string& name, const data::Run& run) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-14s %8.2f s", name.c_str(), run.duration_s());
  out << buf;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    double lo = run[0][c], hi = run[0][c];
    for (std::size_t i = 1; i < run.size(); ++i) {
      lo = std::min(lo, run[i][c]);
      hi = std::max(hi, run[i][c]);
    }
    std::snprintf(buf, sizeof buf, "  %s [%.3g, %.3g]", std::string(kChannelNames[c]).c_str(), lo, hi);
    out << buf;
  }
  out << '\n';
}

inline std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void throw_diff(const std::string& what, const std::vector<std::string>& diff) {
  if (diff.empty()) return;
  std::string msg = what + ":";
  for (const auto& d : diff) msg += "\n  " + d;
  throw MismatchError(msg);
}

template <typename T>
std::string list(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace detail

/// Field-by-field differences between the configuration and a checkpoint.
inline std::vector<std::string> checkpoint_config_diff(const ExperimentConfig& c, const nn::Checkpoint& ck) {
  std::vector<std::string> d;
  if (ck.meta.window != c.window) {
    d.push_back("window: config " + std::to_string(c.window) + ", checkpoint " + std::to_string(ck.meta.window));
  }
  const auto scaling = c.scaling();
  for (std::size_t i = 0; i < kNumChannels; ++i) {
    if (scaling.factors()[i] != ck.meta.scaling.factors()[i]) {
      d.push_back("scaling." + std::string(kChannelNames[i]) + ": config " + detail::number(scaling.factors()[i]) +
                  ", checkpoint " + detail::number(ck.meta.scaling.factors()[i]));
    }
  }
  if (ck.meta.cutoff_hz != c.cutoff_hz) {
    d.push_back("cutoff_hz: config " + detail::number(c.cutoff_hz) + ", checkpoint " + detail::number(ck.meta.cutoff_hz));
  }
  if (ck.meta.sample_rate_hz != c.synth.sample_rate_hz) {
    d.push_back("sample_rate_hz: config " + detail::number(c.synth.sample_rate_hz) + ", checkpoint " +
                detail::number(ck.meta.sample_rate_hz));
  }
  const auto a = ck.params.architecture();
  if (a.encoder_units != c.architecture.encoder_units) {
    d.push_back("architecture.encoder_units: config " + detail::list(c.architecture.encoder_units) + ", checkpoint " +
                detail::list(a.encoder_units));
  }
  if (a.branch_hidden != c.architecture.branch_hidden) {
    d.push_back("architecture.branch_hidden: config " + detail::list(c.architecture.branch_hidden) + ", checkpoint " +
                detail::list(a.branch_hidden));
  }
  if (a.encoder_gate != c.architecture.encoder_gate) {
    d.push_back("architecture.encoder_gate: config " + detail::activation_name(c.architecture.encoder_gate) +
                ", checkpoint " + detail::activation_name(a.encoder_gate));
  }
  return d;
}

/// Synthetic training runs plus one held-out test run as telemetry CSVs,
/// each with its maneuver script next to it.
inline std::vector<fs::path> cmd_generate(const ExperimentConfig& c, std::ostream& out) {
  c.validate();
  const auto dir = c.paths.data();
  detail::make_dir(dir);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, double duration, std::uint64_t script_seed, std::uint64_t noise_seed) {
    const auto script = synth::build_training_script(script_seed, duration);
    synth::SimulationOptions opt;
    opt.label = name;
    auto run = synth::simulate({}, script, c.synth.sample_rate_hz, duration, opt);
    run = synth::add_measurement_noise(run, c.synth.noise_std, noise_seed);
    std::ostringstream csv;
    data::write_run(csv, run);
    detail::write_text(dir / (name + ".csv"), csv.str());
    detail::write_text(dir / (name + ".script.json"), script.to_json().dump(2) + "\n");
    written.push_back(dir / (name + ".csv"));
    detail::print_manifest_line(out, name, run);
  };
  for (std::size_t i = 0; i < c.synth.train_runs; ++i) {
    emit(train_run_name(i), c.synth.train_duration_s, derive_seed(c.seed, 2 * i), derive_seed(c.seed, 2 * i + 1));
  }
  emit("test", c.synth.test_duration_s, derive_seed(c.seed, 1000001), derive_seed(c.seed, 1000002));
  return written;
}

/// Filters the concatenated training runs and the test run at every
/// preprocess cutoff (plus the training cutoff) and writes windowed caches.
inline std::vector<fs::path> cmd_preprocess(const ExperimentConfig& c, std::ostream& out) {
  c.validate();
  std::vector<data::Run> runs;
  std::vector<std::string> labels;
  for (const auto& f : detail::train_run_files(c)) {
    runs.push_back(detail::read_run_file(f, c.synth.sample_rate_hz));
    labels.push_back(runs.back().label());
  }
  const auto train_all = data::concat_runs(runs);
  const auto test = detail::read_run_file(c.paths.data() / "test.csv", c.synth.sample_rate_hz);

  std::vector<double> cutoffs = c.preprocess_cutoffs;
  if (std::find(cutoffs.begin(), cutoffs.end(), c.cutoff_hz) == cutoffs.end()) cutoffs.push_back(c.cutoff_hz);
  detail::make_dir(c.paths.cache());
  const auto scaling = c.scaling();
  const auto prov = provenance(c);
  std::vector<fs::path> written;
  for (double hz : cutoffs) {
    auto train = data::make_windows(data::filter_run(train_all, hz), c.window, scaling);
    train.cutoff_hz = hz;
    train.source_labels = labels;
    train.provenance = prov;
    data::save_dataset(train, train_cache_path(c, hz).string());
    auto held = data::make_windows(data::filter_run(test, hz), c.window, scaling);
    held.cutoff_hz = hz;
    held.provenance = prov;
    data::save_dataset(held, test_cache_path(c, hz).string());
    out << cutoff_tag(hz) << ": " << train.size() << " training windows, " << held.size() << " test windows\n";
    written.push_back(train_cache_path(c, hz));
    written.push_back(test_cache_path(c, hz));
  }
  return written;
}

inline data::WindowedDataset load_matching_cache(const ExperimentConfig& c, const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("missing dataset cache " + path.string() + "; run preprocess first");
  auto ds = data::load_dataset(path.string());
  std::vector<std::string> diff;
  if (ds.window() != c.window) {
    diff.push_back("window: config " + std::to_string(c.window) + ", cache " + std::to_string(ds.window()));
  }
  if (!(ds.scaling() == c.scaling())) diff.push_back("scaling: config and cache factors differ");
  detail::throw_diff("dataset cache " + path.string() + " does not match the config", diff);
  return ds;
}

inline nn::Checkpoint load_matching_checkpoint(const ExperimentConfig& c) {
  const auto path = checkpoint_path(c);
  if (!fs::exists(path)) throw InvalidArgument("missing checkpoint " + path.string() + "; run train first");
  auto ck = nn::load_checkpoint(path.string());
  detail::throw_diff("checkpoint " + path.string() + " does not match the config", checkpoint_config_diff(c, ck));
  return ck;
}

inline std::vector<fs::path> cmd_train(const ExperimentConfig& c, std::ostream& out) {
  c.validate();
  const auto ds = load_matching_cache(c, train_cache_path(c, c.cutoff_hz));
  const auto [train_set, val_set] = data::split_dataset(ds, c.train_fraction, c.val_fraction);
  auto cfg = c.train;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  const auto result = train::fit(train_set, val_set, cfg, c.architecture, [&](const train::EpochRecord& e) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "epoch %4zu  train MAE %.6f  val MAE %.6f  %.1f s\n", e.epoch, e.train_mae,
                  e.val_mae, e.wall_seconds);
    out << buf << std::flush;
  });
  detail::make_dir(c.paths.model());
  nn::ModelMeta meta;
  meta.window = c.window;
  meta.scaling = c.scaling();
  meta.sample_rate_hz = c.synth.sample_rate_hz;
  meta.cutoff_hz = c.cutoff_hz;
  meta.provenance = provenance(c);
  nn::save_checkpoint(result.params, meta, checkpoint_path(c).string());
  std::ostringstream log;
  train::write_training_log(log, result.log, true);
  detail::write_text(training_log_path(c), log.str());
  out << "best epoch " << result.log.best_epoch << ", validation MAE " << result.log.best_val_mae
      << (result.log.stopped_early ? " (early stop)" : "") << '\n';
  return {checkpoint_path(c), training_log_path(c)};
}

inline std::vector<fs::path> cmd_eval(const ExperimentConfig& c, std::ostream& out) {
  c.validate();
  const auto ck = load_matching_checkpoint(c);
  const auto test = load_matching_cache(c, test_cache_path(c, c.cutoff_hz));
  const auto rep = eval::one_step_eval(ck, test, c.threads);
  const auto title = "One-step evaluation, trained and tested at " + cutoff_tag(c.cutoff_hz);
  eval::write_summary(out, rep, title);
  std::vector<fs::path> written;
  for (const auto& f : eval::write_eval_report(eval_dir(c), rep, title)) written.push_back(eval_dir(c) / f);
  return written;
}

inline std::vector<fs::path> cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
  c.validate();
  const auto ck = load_matching_checkpoint(c);
  const auto raw = detail::read_run_file(c.paths.data() / "test.csv", c.synth.sample_rate_hz);
  const auto cutoffs = eval::admissible_cutoffs(c.sweep_cutoffs, ck.meta.cutoff_hz);
  const auto m = eval::noise_sweep(ck, raw, cutoffs, ck.meta.cutoff_hz, c.threads);
  eval::write_sweep_summary(out, m);
  std::vector<fs::path> written;
  for (const auto& f : eval::write_sweep_report(sweep_dir(c), m)) written.push_back(sweep_dir(c) / f);
  return written;
}

/// 0 success, 2 input error, 3 validation error, 4 artifact mismatch,
/// 1 anything else.
inline int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ValidationError&) {
    return 3;
  } catch (const MismatchError&) {
    return 4;
  } catch (const FormatError&) {
    return 4;
  } catch (const InvalidArgument&) {
    return 2;
  } catch (...) {
    return 1;
  }
}

}  // namespace vemo::cli
