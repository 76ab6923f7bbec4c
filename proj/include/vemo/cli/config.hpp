// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vemo/channels.hpp"
#include "vemo/error.hpp"
#include "vemo/nn/activations.hpp"
#include "vemo/nn/vemo.hpp"
#include "vemo/signal/scaling.hpp"
#include "vemo/train/adam.hpp"

namespace vemo::cli {

struct Paths {
  std::string root = ".";
  std::string data_dir = "data";
  std::string cache_dir = "cache";
  std::string model_dir = "model";
  std::string reports_dir = "reports";

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : std::filesystem::path(root) / path;
  }
  std::filesystem::path data() const { return resolve(data_dir); }
  std::filesystem::path cache() const { return resolve(cache_dir); }
  std::filesystem::path model() const { return resolve(model_dir); }
  std::filesystem::path reports() const { return resolve(reports_dir); }
};

struct SynthConfig {
  std::size_t train_runs = 3;
  double train_duration_s = 60.0;
  double test_duration_s = 40.0;
  double sample_rate_hz = 100.0;
  StateArray noise_std = {0.3, 0.3, 0.5, 0.2};  // a_x, a_y m/s^2; yaw deg/s; v_x km/h
};

struct ExperimentConfig {
  Paths paths;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  SynthConfig synth;
  std::vector<double> preprocess_cutoffs = {45.0, 25.0, 5.0, 0.5};
  double cutoff_hz = 5.0;  // training cutoff
  std::size_t window = 100;
  std::map<std::string, double> scaling_overrides;
  double train_fraction = 0.8;
  double val_fraction = 0.2;
  nn::Architecture architecture;
  train::TrainConfig train;
  std::vector<double> sweep_cutoffs = {45.0, 25.0, 15.0, 5.0, 1.0};

  signal::ScalingTable scaling() const {
    auto f = signal::ScalingTable::standard().factors();
    for (const auto& [name, value] : scaling_overrides) {
      bool found = false;
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        if (kChannelNames[c] == name) {
          f[c] = value;
          found = true;
        }
      }
      if (!found) throw InvalidArgument("scaling override names unknown channel '" + name + "'");
    }
    return signal::ScalingTable(f);
  }

  void check_cutoff(double c, const char* what) const {
    if (!(c > 0.0) || !(c < synth.sample_rate_hz / 2.0)) {
      throw InvalidArgument(std::string(what) + " " + std::to_string(c) + " Hz must lie in (0, " +
                            std::to_string(synth.sample_rate_hz / 2.0) + ") Hz");
    }
  }

  void validate() const {
    if (window == 0) throw InvalidArgument("window must be at least 1");
    if (!(synth.sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
    if (synth.train_runs == 0) throw InvalidArgument("at least one training run is required");
    for (double s : synth.noise_std) {
      if (!(s >= 0.0)) throw InvalidArgument("noise standard deviations must be non-negative");
    }
    check_cutoff(cutoff_hz, "training cutoff");
    for (double c : preprocess_cutoffs) check_cutoff(c, "preprocess cutoff");
    for (double c : sweep_cutoffs) check_cutoff(c, "sweep cutoff");
    if (threads == 0) throw InvalidArgument("threads must be at least 1");
    (void)scaling();
    train.validate();
  }
};

// JSON layout --------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

inline std::string activation_name(nn::Activation a) { return std::string(nn::to_string(a)); }

inline nn::Activation activation_from(const std::string& s) {
  if (s == "linear") return nn::Activation::linear;
  if (s == "logistic") return nn::Activation::logistic;
  if (s == "tanh") return nn::Activation::tanh;
  if (s == "elu") return nn::Activation::elu;
  throw InvalidArgument("unknown activation '" + s + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Everything that influences results. Paths and thread count are left out.
inline nlohmann::json result_fields(const ExperimentConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["synth"] = {{"train_runs", c.synth.train_runs},
                {"train_duration_s", c.synth.train_duration_s},
                {"test_duration_s", c.synth.test_duration_s},
                {"sample_rate_hz", c.synth.sample_rate_hz},
                {"noise_std", c.synth.noise_std}};
  j["preprocess_cutoffs"] = c.preprocess_cutoffs;
  j["cutoff_hz"] = c.cutoff_hz;
  j["window"] = c.window;
  j["scaling"] = c.scaling_overrides;
  j["split"] = {{"train_fraction", c.train_fraction}, {"val_fraction", c.val_fraction}};
  j["architecture"] = {{"encoder_units", c.architecture.encoder_units},
                       {"branch_hidden", c.architecture.branch_hidden},
                       {"encoder_gate", detail::activation_name(c.architecture.encoder_gate)},
                       {"branch_activation", detail::activation_name(c.architecture.branch_activation)},
                       {"elu_alpha", c.architecture.elu_alpha}};
  j["train"] = {{"batch_size", c.train.batch_size}, {"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},           {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},       {"epochs", c.train.epochs},
                {"patience", c.train.patience},     {"clip_norm", c.train.clip_norm},
                {"chunk_size", c.train.chunk_size}};
  j["sweep_cutoffs"] = c.sweep_cutoffs;
  return j;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = result_fields(c);
  j["threads"] = c.threads;
  j["paths"] = {{"root", c.paths.root},
                {"data_dir", c.paths.data_dir},
                {"cache_dir", c.paths.cache_dir},
                {"model_dir", c.paths.model_dir},
                {"reports_dir", c.paths.reports_dir}};
  return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::read;
  ExperimentConfig c;
  detail::reject_unknown(j,
                         {"paths", "seed", "threads", "synth", "preprocess_cutoffs", "cutoff_hz", "window", "scaling",
                          "split", "architecture", "train", "sweep_cutoffs"},
                         "config");
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  read(j, "preprocess_cutoffs", c.preprocess_cutoffs);
  read(j, "cutoff_hz", c.cutoff_hz);
  read(j, "window", c.window);
  read(j, "scaling", c.scaling_overrides);
  read(j, "sweep_cutoffs", c.sweep_cutoffs);
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::reject_unknown(p, {"root", "data_dir", "cache_dir", "model_dir", "reports_dir"}, "paths");
    read(p, "root", c.paths.root);
    read(p, "data_dir", c.paths.data_dir);
    read(p, "cache_dir", c.paths.cache_dir);
    read(p, "model_dir", c.paths.model_dir);
    read(p, "reports_dir", c.paths.reports_dir);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    detail::reject_unknown(s, {"train_runs", "train_duration_s", "test_duration_s", "sample_rate_hz", "noise_std"},
                           "synth");
    read(s, "train_runs", c.synth.train_runs);
    read(s, "train_duration_s", c.synth.train_duration_s);
    read(s, "test_duration_s", c.synth.test_duration_s);
    read(s, "sample_rate_hz", c.synth.sample_rate_hz);
    read(s, "noise_std", c.synth.noise_std);
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    detail::reject_unknown(s, {"train_fraction", "val_fraction"}, "split");
    read(s, "train_fraction", c.train_fraction);
    read(s, "val_fraction", c.val_fraction);
  }
  if (j.contains("architecture")) {
    const auto& a = j["architecture"];
    detail::reject_unknown(a, {"encoder_units", "branch_hidden", "encoder_gate", "branch_activation", "elu_alpha"},
                           "architecture");
    read(a, "encoder_units", c.architecture.encoder_units);
    read(a, "branch_hidden", c.architecture.branch_hidden);
    read(a, "elu_alpha", c.architecture.elu_alpha);
    if (a.contains("encoder_gate")) c.architecture.encoder_gate = detail::activation_from(a["encoder_gate"].get<std::string>());
    if (a.contains("branch_activation")) {
      c.architecture.branch_activation = detail::activation_from(a["branch_activation"].get<std::string>());
    }
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(t,
                           {"batch_size", "learning_rate", "beta1", "beta2", "epsilon", "epochs", "patience",
                            "clip_norm", "chunk_size"},
                           "train");
    read(t, "batch_size", c.train.batch_size);
    read(t, "learning_rate", c.train.learning_rate);
    read(t, "beta1", c.train.beta1);
    read(t, "beta2", c.train.beta2);
    read(t, "epsilon", c.train.epsilon);
    read(t, "epochs", c.train.epochs);
    read(t, "patience", c.train.patience);
    read(t, "clip_norm", c.train.clip_norm);
    read(t, "chunk_size", c.train.chunk_size);
  }
  c.train.seed = c.seed;
  c.train.threads = c.threads;
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(result_fields(c).dump())));
  return buf;
}

inline std::string provenance(const ExperimentConfig& c) {
  return "config=" + config_hash(c) + " seed=" + std::to_string(c.seed);
}

}  // namespace vemo::cli
