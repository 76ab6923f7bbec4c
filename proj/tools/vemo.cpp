// SPDX-License-Identifier: Apache-2.0
// vemo: synthetic telemetry, preprocessing, training and evaluation of the
// GRU state-transition model.
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vemo/cli/commands.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> workdir;
  std::optional<double> cutoff;
  std::optional<std::size_t> window;
  std::optional<std::size_t> epochs;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "experiment config (JSON); defaults when omitted");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--workdir", o.workdir, "root for relative artifact paths");
  sub->add_option("--cutoff", o.cutoff, "training cutoff frequency [Hz]");
  sub->add_option("--window", o.window, "window length k [samples]");
  sub->add_option("--epochs", o.epochs, "maximum training epochs");
}

vemo::cli::ExperimentConfig resolve(const Overrides& o) {
  auto c = o.config.empty() ? vemo::cli::ExperimentConfig{} : vemo::cli::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.workdir) c.paths.root = *o.workdir;
  if (o.cutoff) c.cutoff_hz = *o.cutoff;
  if (o.window) c.window = *o.window;
  if (o.epochs) c.train.epochs = *o.epochs;
  c.train.seed = c.seed;
  c.train.threads = c.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle state-transition model: generate, preprocess, train, eval, sweep"};
  app.require_subcommand(1);
  Overrides o;

  using Command = std::function<void(const vemo::cli::ExperimentConfig&)>;
  std::map<CLI::App*, Command> commands;
  auto add = [&](const char* name, const char* help, Command fn) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    commands[sub] = std::move(fn);
  };
  add("generate", "simulate training and test telemetry CSVs",
      [](const auto& c) { vemo::cli::cmd_generate(c, std::cout); });
  add("preprocess", "filter, scale and window runs into dataset caches",
      [](const auto& c) { vemo::cli::cmd_preprocess(c, std::cout); });
  add("train", "fit the model on the training-cutoff cache", [](const auto& c) { vemo::cli::cmd_train(c, std::cout); });
  add("eval", "one-step evaluation on the held-out test cache",
      [](const auto& c) { vemo::cli::cmd_eval(c, std::cout); });
  add("sweep", "evaluate on inputs filtered at other cutoffs", [](const auto& c) { vemo::cli::cmd_sweep(c, std::cout); });
  add("config", "print the effective configuration as JSON",
      [](const auto& c) { std::cout << vemo::cli::to_json(c).dump(2) << '\n'; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = resolve(o);
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) fn(cfg);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vemo::cli::exit_code_for(std::current_exception());
  } catch (...) {
    std::cerr << "error: unknown failure\n";
    return 1;
  }
}
