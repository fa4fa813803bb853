// Copyright 2026 The dynsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dynsim/cli/cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dynsim/data/dataset.h"
#include "dynsim/dynamics/model.h"
#include "dynsim/io/binary.h"
#include "dynsim/io/json_schema.h"
#include "dynsim/nn/checkpoint.h"
#include "json.hpp"

namespace dynsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dynsim");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dynsim_cli_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }
  std::string WriteConfig(const std::string& name, const json& doc) const {
    std::ofstream(Path(name)) << doc.dump();
    return Path(name);
  }
  // Small random-action pendulum dataset.
  std::string GenRandom(const std::string& name, int n_traj, int steps) {
    const CliRun r = Cli({"gen-data", "--env", "pendulum", "--n-traj",
                          std::to_string(n_traj), "--steps",
                          std::to_string(steps), "--out", Path(name)});
    EXPECT_EQ(r.code, 0) << r.err;
    return Path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpListsFlags) {
  const CliRun r = Cli({"train", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--config", "--data", "--stage-steps", "--lr",
                           "--threads", "--seed", "--out", "--solver"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  const CliRun top = Cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* cmd : {"gen-data", "train", "benchmark", "plan", "lce",
                          "fit-flow", "few-shot"}) {
    EXPECT_NE(top.out.find(cmd), std::string::npos) << cmd;
  }
}

TEST_F(CliTest, RejectsUnknownFlagsKeysAndCommands) {
  EXPECT_EQ(Cli({"train", "--no-such-flag", "1"}).code, kExitConfig);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(Cli({}).code, kExitConfig);
  const std::string cfg =
      WriteConfig("bad.json", {{"train", {{"learning_rate", 0.1}}}});
  const CliRun r = Cli({"gen-data", "--config", cfg});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("learning_rate"), std::string::npos);
  EXPECT_EQ(Cli({"gen-data", "--env", "pendulum", "--n-traj", "x", "--out",
                 Path("d")})
                .code,
            kExitConfig);
}

TEST_F(CliTest, InvalidCombinationsRejected) {
  // A penalty width without a density model.
  EXPECT_EQ(Cli({"plan", "--env", "pendulum", "--tau", "1.0"}).code,
            kExitConfig);
  EXPECT_EQ(Cli({"gen-data", "--env", "pendulum", "--mode", "q", "--out",
                 Path("d")})
                .code,
            kExitConfig);
  EXPECT_EQ(Cli({"gen-data", "--env", "nowhere", "--out", Path("d")}).code,
            kExitConfig);
}

TEST_F(CliTest, ZeroTrajectoriesGiveValidEmptyFile) {
  const std::string path = GenRandom("empty.trj", 0, 10);
  const Dataset d = ReadDataset(path);
  EXPECT_EQ(d.env, "pendulum");
  EXPECT_TRUE(d.segments.empty());
  EXPECT_NE(d.config_hash, 0u);
}

TEST_F(CliTest, GenDataIsByteReproducible) {
  const std::string a = GenRandom("a.trj", 3, 20);
  const std::string b = GenRandom("b.trj", 3, 20);
  EXPECT_TRUE(ReadFileBytes(a) == ReadFileBytes(b));
  const CliRun r = Cli({"gen-data", "--env", "pendulum", "--n-traj", "3",
                        "--steps", "20", "--out", Path("c.trj")});
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary["trajectories"], 3);
  EXPECT_EQ(summary["steps"], 60);
  EXPECT_EQ(summary["env_constants_hash"].get<std::string>().size(), 16u);
}

TEST_F(CliTest, ModeFlagMapsToSourceTags) {
  const std::string r = GenRandom("r.trj", 2, 6);
  const CliRun p = Cli({"gen-data", "--env", "pendulum", "--mode", "p",
                        "--n-traj", "2", "--steps", "6", "--horizon", "4",
                        "--population", "8", "--iterations", "1", "--out",
                        Path("p.trj")});
  ASSERT_EQ(p.code, 0) << p.err;
  for (const TrajectorySegment& s : ReadDataset(r).segments) {
    EXPECT_EQ(s.tag, SourceTag::kRandom);
  }
  for (const TrajectorySegment& s : ReadDataset(Path("p.trj")).segments) {
    EXPECT_EQ(s.tag, SourceTag::kPolicy);
  }
}

TEST_F(CliTest, OracleBenchmarkIsNearZeroAndValidates) {
  const std::string data = GenRandom("d.trj", 4, 130);
  const CliRun r = Cli({"benchmark", "--model", "oracle", "--data", data,
                        "--n-eval", "8", "--solver", "rk4",
                        "--warm-in", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(r.out);
  std::ifstream schema_file(std::string(DYNSIM_SOURCE_DIR) +
                            "/schemas/benchmark_report.schema.json");
  const json schema = json::parse(schema_file);
  EXPECT_TRUE(ValidateJsonSchema(schema, report).empty());
  ASSERT_EQ(report.size(), 3u);
  for (const json& rec : report) {
    EXPECT_LT(rec["mse"].get<double>(), 1e-20);
    EXPECT_EQ(rec["model"], "oracle");
  }
}

TEST_F(CliTest, MissingCheckpointIsACleanError) {
  const std::string data = GenRandom("d.trj", 1, 130);
  const CliRun r = Cli({"benchmark", "--model", Path("nope.msnn"), "--data",
                        data});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("nope.msnn"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, CorruptDatasetIsAFormatError) {
  WriteFileBytes(Path("bad.trj"), "MOSIMTRJ garbage");
  EXPECT_EQ(Cli({"benchmark", "--model", "oracle", "--data", Path("bad.trj")})
                .code,
            kExitFormat);
}

TEST_F(CliTest, FlagsOverrideConfig) {
  const std::string cfg = WriteConfig(
      "c.json", {{"env", "pendulum"}, {"data", {{"n_traj", 5}, {"steps", 4}}}});
  const CliRun r = Cli({"gen-data", "--config", cfg, "--n-traj", "2", "--out",
                        Path("d.trj")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadDataset(Path("d.trj")).segments.size(), 2u);
}

class CliTrainTest : public CliTest {
 protected:
  std::vector<std::string> TrainArgs(const std::string& out,
                                     const std::string& steps) {
    return {"train", "--data", data_, "--n-val", "2", "--stage-steps", steps,
            "--batch-size", "2", "--segment-length", "2",
            "--segment-length-max", "4", "--size", "desk", "--solver", "rk4",
            "--rk4-substeps", "2", "--log", out + ".jsonl", "--out", out};
  }
  void SetUp() override {
    CliTest::SetUp();
    data_ = GenRandom("train.trj", 10, 110);
    const std::string cfg = WriteConfig(
        "train.json", {{"train", {{"val_every", 2}, {"n_val_windows", 2},
                                  {"val_horizons", {2}}}}});
    config_ = cfg;
  }
  CliRun Train(const std::string& out, const std::string& steps) {
    std::vector<std::string> args = TrainArgs(out, steps);
    args.push_back("--config");
    args.push_back(config_);
    return Cli(args);
  }

  std::string data_, config_;
};

TEST_F(CliTrainTest, RerunReproducesCheckpointAndLossSequence) {
  const CliRun a = Train(Path("a.msnn"), "3");
  const CliRun b = Train(Path("b.msnn"), "3");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(ReadFileBytes(Path("a.msnn")) == ReadFileBytes(Path("b.msnn")));
  EXPECT_FALSE(ReadFileBytes(Path("a.msnn.jsonl")).empty());
  std::vector<double> la, lb;
  for (const auto& [path, losses] :
       {std::pair{Path("a.msnn.jsonl"), &la}, {Path("b.msnn.jsonl"), &lb}}) {
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
      const json rec = json::parse(line);
      if (rec.contains("loss")) losses->push_back(rec["loss"]);
    }
  }
  EXPECT_EQ(la.size(), 3u);
  EXPECT_EQ(la, lb);
  EXPECT_NE(CheckpointConfigHash(ReadCheckpoint(Path("a.msnn"))), 0u);
}

TEST_F(CliTrainTest, ZeroBudgetAndResume) {
  ASSERT_EQ(Train(Path("init.msnn"), "0").code, 0);
  const DynamicsParams init = LoadDynamics(Path("init.msnn"));

  // Resuming with no further steps keeps the parameters.
  std::vector<std::string> args = TrainArgs(Path("again.msnn"), "0");
  args.insert(args.end(), {"--init", Path("init.msnn"), "--config", config_});
  ASSERT_EQ(Cli(args).code, 0);
  EXPECT_EQ(LoadDynamics(Path("again.msnn")).values, init.values);

  args = TrainArgs(Path("more.msnn"), "2");
  args.insert(args.end(), {"--init", Path("init.msnn"), "--config", config_});
  const CliRun more = Cli(args);
  ASSERT_EQ(more.code, 0) << more.err;
  const DynamicsParams trained = LoadDynamics(Path("more.msnn"));
  EXPECT_EQ(trained.arch, init.arch);
  EXPECT_EQ(trained.norm, init.norm);
  EXPECT_NE(trained.values, init.values);
}

TEST_F(CliTrainTest, PipelineSmoke) {
  ASSERT_EQ(Train(Path("m.msnn"), "2").code, 0);
  const CliRun bench = Cli({"benchmark", "--model", Path("m.msnn"), "--data",
                            data_, "--horizons", "3,5", "--n-eval", "4", "--warm-in", "0",
                            "--out", Path("report.json")});
  ASSERT_EQ(bench.code, 0) << bench.err;
  std::ifstream report_file(Path("report.json"));
  EXPECT_EQ(json::parse(report_file).size(), 2u);

  const CliRun plan = Cli({"plan", "--env", "pendulum", "--model",
                           Path("m.msnn"), "--episodes", "1",
                           "--episode-steps", "3", "--horizon", "4",
                           "--population", "8", "--iterations", "1"});
  ASSERT_EQ(plan.code, 0) << plan.err;
  const json pr = json::parse(plan.out);
  EXPECT_EQ(pr["planning_oracle_calls"], 0);

  const CliRun lce = Cli({"lce", "--env", "pendulum", "--model",
                          Path("m.msnn"), "--steps", "5", "--n-traj", "3",
                          "--solver", "rk4", "--rk4-substeps", "2"});
  ASSERT_EQ(lce.code, 0) << lce.err;
  EXPECT_EQ(json::parse(lce.out)["n_used"].get<int>() +
                json::parse(lce.out)["n_dropped"].get<int>(),
            3);

  const CliRun flow = Cli({"fit-flow", "--data", data_, "--steps", "3",
                           "--out", Path("f.flow")});
  ASSERT_EQ(flow.code, 0) << flow.err;
  const CliRun penalized = Cli(
      {"plan", "--env", "pendulum", "--model", Path("m.msnn"), "--flow",
       Path("f.flow"), "--data", data_, "--episodes", "1", "--episode-steps",
       "2", "--horizon", "3", "--population", "8", "--iterations", "1",
       "--oracle-reference", "false"});
  ASSERT_EQ(penalized.code, 0) << penalized.err;
  EXPECT_TRUE(json::parse(penalized.out)["penalty"].contains("tau"));

  const CliRun few = Cli({"few-shot", "--model", Path("m.msnn"), "--data",
                          data_, "--virtual-steps", "4",
                          "--virtual-per-collect", "4", "--real-per-collect",
                          "3", "--horizon", "3", "--population", "8",
                          "--iterations", "1", "--out", Path("fs.msnn"),
                          "--config", WriteConfig("fs.json",
                          {{"few_shot", {{"update_every", 2},
                                         {"grad_steps_per_update", 1},
                                         {"virtual_episode_steps", 4},
                                         {"real_episode_steps", 3}}},
                           {"train", {{"segment_length", 2},
                                      {"batch_size", 2}, {"warm_in", 0}}}})});
  ASSERT_EQ(few.code, 0) << few.err;
  const json fr = json::parse(few.out);
  EXPECT_EQ(fr["virtual_steps"], 4);
  EXPECT_EQ(fr["real_steps"], 3);
  EXPECT_EQ(fr["updates"], 2);
}

}  // namespace
}  // namespace dynsim
