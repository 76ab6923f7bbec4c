// SPDX-License-Identifier: Apache-2.0
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "vemo/cli/commands.hpp"

namespace {

namespace fs = std::filesystem;
using namespace vemo::cli;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

// Small, fast experiment rooted in a fresh temporary directory.
ExperimentConfig small_config(const std::string& name) {
  ExperimentConfig c;
  c.paths.root = (fs::temp_directory_path() / ("vemo_cli_" + name)).string();
  fs::remove_all(c.paths.root);
  c.synth.train_runs = 2;
  c.synth.train_duration_s = 30.0;
  c.synth.test_duration_s = 30.0;
  c.window = 20;
  c.architecture.encoder_units = {6, 6};
  c.architecture.branch_hidden = {4};
  c.train.epochs = 2;
  return c;
}

template <typename F>
int code_of(F&& fn) {
  try {
    fn();
  } catch (...) {
    return exit_code_for(std::current_exception());
  }
  return 0;
}

TEST(Config, JsonRoundTripAndDefaults) {
  ExperimentConfig c;
  c.seed = 42;
  c.cutoff_hz = 25.0;
  c.scaling_overrides["a_x"] = 30.0;
  c.architecture.encoder_gate = vemo::nn::Activation::elu;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.scaling().factors()[4], 30.0);
  EXPECT_EQ(back.train.seed, 42u);
  const auto d = config_from_json(nlohmann::json::object());
  EXPECT_EQ(d.window, 100u);
  EXPECT_EQ(d.preprocess_cutoffs, (std::vector<double>{45, 25, 5, 0.5}));
  EXPECT_EQ(d.sweep_cutoffs, (std::vector<double>{45, 25, 15, 5, 1}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json({{"windw", 10}}), vemo::InvalidArgument);
  EXPECT_THROW(config_from_json({{"train", {{"lr", 0.1}}}}), vemo::InvalidArgument);
  EXPECT_THROW(config_from_json({{"window", "long"}}), vemo::InvalidArgument);
  EXPECT_THROW(config_from_json({{"scaling", {{"speed", 3.0}}}}).validate(), vemo::InvalidArgument);
  EXPECT_THROW(config_from_json({{"cutoff_hz", 60.0}}).validate(), vemo::InvalidArgument);
  EXPECT_THROW(config_from_json({{"window", 0}}).validate(), vemo::InvalidArgument);
}

TEST(Config, HashCoversResultFieldsOnly) {
  ExperimentConfig a, b;
  b.paths.root = "/elsewhere";
  b.threads = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(provenance(b).substr(0, 7), "config=");
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(code_of([] {}), 0);
  EXPECT_EQ(code_of([] { throw vemo::InvalidArgument("x"); }), 2);
  EXPECT_EQ(code_of([] { throw vemo::ValidationError("x", 3); }), 3);
  EXPECT_EQ(code_of([] { throw vemo::MismatchError("x"); }), 4);
  EXPECT_EQ(code_of([] { throw vemo::FormatError("x"); }), 4);
  EXPECT_EQ(code_of([] { throw vemo::NumericError("x"); }), 1);
  EXPECT_EQ(code_of([] { throw std::runtime_error("x"); }), 1);
}

TEST(Generate, WritesValidRunsDeterministically) {
  auto c = small_config("gen");
  std::ostringstream log;
  const auto files = cmd_generate(c, log);
  ASSERT_EQ(files.size(), 3u);
  for (const auto& f : files) {
    std::ifstream in(f);
    EXPECT_NO_THROW(vemo::data::load_run(in)) << f;
  }
  EXPECT_NE(log.str().find("train_01"), std::string::npos);
  EXPECT_NE(log.str().find("30.00 s"), std::string::npos);

  auto again = c;
  again.paths.root += "_again";
  fs::remove_all(again.paths.root);
  cmd_generate(again, log);
  for (const char* name : {"train_00.csv", "train_01.csv", "test.csv", "train_00.script.json"}) {
    EXPECT_EQ(slurp(c.paths.data() / name), slurp(again.paths.data() / name)) << name;
  }
  again.seed = 2;
  cmd_generate(again, log);
  EXPECT_NE(slurp(c.paths.data() / "train_00.csv"), slurp(again.paths.data() / "train_00.csv"));
  EXPECT_NE(slurp(c.paths.data() / "train_00.csv"), slurp(c.paths.data() / "train_01.csv"));
  fs::remove_all(again.paths.root);
}

TEST(Generate, ShortDurationIsInputError) {
  auto c = small_config("gen_short");
  c.synth.train_duration_s = 10.0;
  std::ostringstream log;
  EXPECT_EQ(code_of([&] { cmd_generate(c, log); }), 2);
}

TEST(Preprocess, DefaultCutoffsAndShapes) {
  auto c = small_config("pre");
  c.synth.train_runs = 1;
  c.synth.train_duration_s = 60.0;
  c.window = 100;
  std::ostringstream log;
  cmd_generate(c, log);
  const auto files = cmd_preprocess(c, log);
  EXPECT_EQ(files.size(), 8u);
  for (double hz : {45.0, 25.0, 5.0, 0.5}) {
    const auto ds = vemo::data::load_dataset(train_cache_path(c, hz).string());
    EXPECT_EQ(ds.size(), 5900u);
    EXPECT_EQ(ds.window(), 100u);
    EXPECT_EQ(ds.cutoff_hz, hz);
    EXPECT_EQ(ds.provenance, provenance(c));
  }
  c.preprocess_cutoffs = {60.0};
  EXPECT_EQ(code_of([&] { cmd_preprocess(c, log); }), 2);
}

TEST(Preprocess, ValidationFailureNamesRow) {
  auto c = small_config("pre_bad");
  std::ostringstream log;
  cmd_generate(c, log);
  // push a throttle value out of its domain on data row 7
  const auto path = c.paths.data() / "train_01.csv";
  std::istringstream in(slurp(path));
  std::ostringstream out;
  std::string line;
  for (int row = 0; std::getline(in, line); ++row) {
    if (row == 7) line = line.substr(0, line.find(',')) + ",140" + line.substr(line.find(',', line.find(',') + 1));
    out << line << '\n';
  }
  std::ofstream(path) << out.str();
  try {
    cmd_preprocess(c, log);
    FAIL() << "expected ValidationError";
  } catch (const vemo::ValidationError& e) {
    EXPECT_EQ(e.row(), 7u);
    EXPECT_EQ(exit_code_for(std::current_exception()), 3);
  }
}

TEST(Pipeline, TrainEvalSweepAndMismatch) {
  auto c = small_config("pipe");
  c.preprocess_cutoffs = {45.0, 5.0, 0.5};
  std::ostringstream log;
  cmd_generate(c, log);
  cmd_preprocess(c, log);
  cmd_train(c, log);
  EXPECT_TRUE(fs::exists(checkpoint_path(c)));
  EXPECT_NE(slurp(training_log_path(c)).find("epoch,train_mae,val_mae,wall_time_s"), std::string::npos);

  std::ostringstream summary;
  const auto files = cmd_eval(c, summary);
  EXPECT_EQ(files.size(), 16u);
  const std::string stamp = provenance(c);
  for (const std::string& row : {std::string("RMSE"), std::string("Mean eps_rel [%]"), std::string("E_max"), stamp}) {
    EXPECT_NE(summary.str().find(row), std::string::npos) << row;
  }
  const auto first = slurp(eval_dir(c) / "series.csv");
  cmd_eval(c, log);
  EXPECT_EQ(slurp(eval_dir(c) / "series.csv"), first);

  cmd_sweep(c, log);
  EXPECT_NE(slurp(sweep_dir(c) / "sweep.txt").find("45.00 Hz"), std::string::npos);

  // a model trained at 0.5 Hz sweeps every default cutoff
  auto low = c;
  low.cutoff_hz = 0.5;
  cmd_train(low, log);
  cmd_sweep(low, log);
  std::vector<double> rows;
  std::istringstream csv(slurp(sweep_dir(low) / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    if (line.find(",a_x,") != std::string::npos) rows.push_back(std::stod(line));
  }
  EXPECT_EQ(rows, (std::vector<double>{45, 25, 15, 5, 1, 0.5}));

  auto other_k = c;
  other_k.window = 10;
  try {
    cmd_eval(other_k, log);
    FAIL() << "expected MismatchError";
  } catch (const vemo::MismatchError& e) {
    EXPECT_NE(std::string(e.what()).find("window: config 10, checkpoint 20"), std::string::npos);
    EXPECT_EQ(exit_code_for(std::current_exception()), 4);
  }
  auto other_arch = c;
  other_arch.architecture.encoder_units = {8, 6};
  EXPECT_EQ(code_of([&] { cmd_eval(other_arch, log); }), 4);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VEMO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  const auto root = fs::temp_directory_path() / "vemo_cli_binary";
  fs::remove_all(root);
  fs::create_directories(root);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("train --workdir " + root.string()), 2);  // no caches yet
  EXPECT_EQ(run_cli("preprocess --cutoff 60 --workdir " + root.string()), 2);
  EXPECT_EQ(run_cli("generate --config " + (root / "missing.json").string()), 2);

  std::ofstream(root / "cfg.json") << R"({"synth": {"train_runs": 2, "train_duration_s": 30, "test_duration_s": 30},
                                         "window": 20, "preprocess_cutoffs": [5],
                                         "architecture": {"encoder_units": [4, 4], "branch_hidden": [3]},
                                         "train": {"epochs": 1}})";
  const std::string cfg = " --config " + (root / "cfg.json").string() + " --workdir " + root.string();
  EXPECT_EQ(run_cli("generate" + cfg), 0);
  EXPECT_EQ(run_cli("preprocess" + cfg), 0);
  EXPECT_EQ(run_cli("train --threads 2" + cfg), 0);
  EXPECT_EQ(run_cli("eval" + cfg), 0);
  EXPECT_EQ(run_cli("eval --window 25" + cfg), 4);
  EXPECT_TRUE(fs::exists(root / "reports" / "eval_5hz" / "summary.txt"));
  std::ofstream(root / "cache" / "test_5hz.vemods") << "garbage";
  EXPECT_EQ(run_cli("eval" + cfg), 4);
  fs::remove_all(root);
}

}  // namespace
