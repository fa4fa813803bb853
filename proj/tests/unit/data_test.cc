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

#include <cmath>
#include <fstream>
#include <vector>

#include "dynsim/data/benchmark.h"
#include "dynsim/data/dataset.h"
#include "dynsim/data/lce.h"
#include "dynsim/io/binary.h"
#include "dynsim/io/json_schema.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dynsim {
namespace {

using testing::RandomVector;

// ds/dt = rate * s, action ignored.
class LinearSystem : public ControlledSystem {
 public:
  LinearSystem(std::size_t n, double rate) : n_(n), rate_(rate) {}
  std::size_t state_dim() const override { return n_; }
  std::size_t action_dim() const override { return 1; }
  void Derivative(std::span<const double> s, std::span<const double>,
                  std::span<double> ds) const override {
    for (std::size_t i = 0; i < n_; ++i) ds[i] = rate_ * s[i];
  }

 private:
  std::size_t n_;
  double rate_;
};

Dataset SmallDataset(std::size_t n_traj, std::size_t steps, std::uint64_t seed) {
  auto env = MakeEnv("pendulum");
  return GenerateDataset(*env, {}, n_traj, steps, seed);
}

TEST(DatasetFormatTest, EmptyRoundTrip) {
  Dataset d;
  d.env = "pendulum";
  d.dims = {1, 1, 1};
  d.dt = 0.05;
  EXPECT_EQ(DecodeDataset(EncodeDataset(d)), d);
}

TEST(DatasetFormatTest, SingleStepSegmentBitExact) {
  Dataset d = SmallDataset(1, 1, 3);
  d.segments[0].states[1] = -0.0;
  d.segments[0].states[2] = 5e-324;  // denormal
  const Dataset back = DecodeDataset(EncodeDataset(d));
  EXPECT_EQ(EncodeDataset(back), EncodeDataset(d));
  EXPECT_TRUE(std::signbit(back.segments[0].states[1]));
}

TEST(DatasetFormatTest, ThousandSegmentsReserializeIdentically) {
  Dataset d = SmallDataset(1000, 5, 4);
  d.config_hash = 0x1234;
  const std::string bytes = EncodeDataset(d);
  EXPECT_EQ(Fnv1a(EncodeDataset(DecodeDataset(bytes))), Fnv1a(bytes));
}

TEST(DatasetFormatTest, MagicVersionAndTruncation) {
  const std::string bytes = EncodeDataset(SmallDataset(3, 4, 5));
  std::string bad = bytes;
  bad[3] = 'x';
  EXPECT_THROW(DecodeDataset(bad), FormatError);
  bad = bytes;
  bad[8] = 7;
  try {
    DecodeDataset(bad);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
  for (std::size_t cut : {bytes.size() - 1, bytes.size() / 2, std::size_t{20}}) {
    EXPECT_THROW(DecodeDataset(bytes.substr(0, cut)), FormatError) << cut;
  }
}

TEST(DatasetTest, GenerationIndependentOfExecution) {
  auto env = MakeEnv("reacher2");
  const ActionSamplerSpec s{SamplerMode::kPoissonHold, 2.0};
  EXPECT_EQ(GenerateDataset(*env, s, 8, 30, 11, Execution::kSerial),
            GenerateDataset(*env, s, 8, 30, 11, Execution::kParallel));
}

TEST(DatasetTest, WindowsRespectWarmIn) {
  const Dataset d = SmallDataset(4, 130, 6);
  Rng rng(1);
  const auto refs = SampleWindows(d, 16, 200, rng);
  for (const WindowRef& r : refs) {
    EXPECT_GE(r.start, kWarmInSteps);
    EXPECT_LE(r.start + 16, d.segments[r.segment].steps());
  }
  EXPECT_THROW(SampleWindows(d, 31, 1, rng), ConfigError);
}

TEST(NoiseTest, ZeroSigmaIsIdentity) {
  const Dataset d = SmallDataset(3, 10, 7);
  EXPECT_EQ(AddObservationNoise(d, 0.0, 1), d);
}

TEST(NoiseTest, VarianceAndDeterminism) {
  Dataset d = SmallDataset(1, 0, 8);
  TrajectorySegment& s = d.segments[0];
  // A long constant segment: 1e6 state entries.
  s.actions.assign(499999, 0.0);
  s.states.assign(2 * 500000, 0.25);
  const Dataset a = AddObservationNoise(d, 0.01, 42);
  EXPECT_EQ(a, AddObservationNoise(d, 0.01, 42));
  EXPECT_EQ(a.segments[0].actions, s.actions);
  double sum = 0, sq = 0;
  for (double v : a.segments[0].states) {
    sum += v - 0.25;
    sq += (v - 0.25) * (v - 0.25);
  }
  const double n = static_cast<double>(a.segments[0].states.size());
  const double var = sq / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var, 1e-4, 1e-5);
}

TEST(BenchmarkTest, OracleSelfPredictionNearZero) {
  auto env = MakeEnv("pendulum");
  const Dataset d = GenerateDataset(*env, {}, 8, 200, 9);
  BenchmarkOptions opts;
  opts.n_eval = 16;
  opts.rollout.integrator.rtol = opts.rollout.integrator.atol = 1e-9;
  const BenchmarkResult r = BenchmarkDataset(*env, d, opts);
  ASSERT_EQ(r.scores.size(), 3u);
  EXPECT_EQ(r.scores[0].horizon, 3u);
  EXPECT_EQ(r.scores[1].horizon, 16u);
  EXPECT_EQ(r.scores[2].horizon, 100u);
  EXPECT_LT(r.scores[2].mse, 1e-8);
  EXPECT_EQ(r.n_failed, 0u);
}

TEST(BenchmarkTest, FrozenModelMatchesClosedForm) {
  const Dataset d = SmallDataset(6, 130, 10);
  Rng rng(2);
  const auto refs = SampleWindows(d, 20, 10, rng);
  const auto windows = MaterializeWindows(d, refs, 20);
  const std::vector<double> ones(2, 1.0);
  const BenchmarkResult r =
      RolloutMse(LinearSystem(2, 0.0), windows, ones, {20}, {});
  double want = 0.0;
  for (const TrajectorySegment& w : windows)
    for (std::size_t k = 1; k <= 20; ++k)
      for (std::size_t i = 0; i < 2; ++i)
        want += std::pow(w.state(k)[i] - w.state(0)[i], 2);
  want /= 10.0 * 20.0 * 2.0;
  EXPECT_NEAR(r.scores[0].mse, want, 1e-12 * want);
}

TEST(BenchmarkProperty, PrefixMeansMatchStepCurve) {
  const Dataset d = SmallDataset(6, 200, 12);
  BenchmarkOptions opts;
  opts.n_eval = 8;
  opts.horizons = {3, 16, 100};
  const BenchmarkResult r = BenchmarkDataset(LinearSystem(2, -0.3), d, opts);
  for (const HorizonScore& s : r.scores) {
    double m = 0;
    for (std::size_t k = 0; k < s.horizon; ++k) m += r.step_mse[k];
    EXPECT_DOUBLE_EQ(s.mse, m / s.horizon);
  }
}

TEST(BenchmarkTest, FailedWindowsCounted) {
  const Dataset d = SmallDataset(4, 130, 13);
  BenchmarkOptions opts;
  opts.n_eval = 4;
  opts.horizons = {30};
  opts.rollout.integrator.max_steps = 5;
  // Fast growth forces many rejected steps so every window fails.
  const BenchmarkResult r = BenchmarkDataset(LinearSystem(2, 400.0), d, opts);
  EXPECT_EQ(r.n_failed, 4u);
  EXPECT_EQ(r.n_segments, 0u);
  EXPECT_TRUE(std::isnan(r.scores[0].mse));
}

TEST(BenchmarkTest, ReportValidatesAgainstSchema) {
  std::ifstream in(std::string(DYNSIM_SOURCE_DIR) +
                   "/schemas/benchmark_report.schema.json");
  const nlohmann::json schema = nlohmann::json::parse(in);
  const Dataset d = SmallDataset(4, 200, 14);
  BenchmarkOptions opts;
  opts.n_eval = 4;
  const nlohmann::json report = BenchmarkReportJson(
      BenchmarkDataset(LinearSystem(2, 0.0), d, opts), "pendulum", "frozen", 77);
  EXPECT_TRUE(ValidateJsonSchema(schema, report).empty()) << report.dump();
  nlohmann::json broken = report;
  broken[0]["mse"] = -1.0;
  broken[1].erase("horizon");
  broken[2]["extra"] = 1;
  EXPECT_EQ(ValidateJsonSchema(schema, broken).size(), 3u);
}

TEST(LceTest, LinearDecayExponent) {
  LceConfig cfg;
  cfg.steps = 200;
  cfg.n_traj = 8;
  const LinearSystem sys(3, -1.0);
  const LceResult r = EstimateLce(
      sys, [](Rng& rng) { return RandomVector(rng, 3); },
      std::vector<double>{0.0}, cfg);
  EXPECT_NEAR(r.lambda, -1.0, 0.01);
  EXPECT_EQ(r.n_used, 8u);
}

TEST(LceTest, SerialAndParallelIdentical) {
  auto env = MakeEnv("acrobot");
  LceConfig cfg;
  cfg.steps = 40;
  cfg.n_traj = 6;
  cfg.rollout.solver = Solver::kRk4;
  auto s0 = [&](Rng& rng) { return env->SampleInitialState(rng); };
  const std::vector<double> a = {0.0};
  cfg.exec = Execution::kSerial;
  const LceResult serial = EstimateLce(*env, s0, a, cfg);
  cfg.exec = Execution::kParallel;
  const LceResult parallel = EstimateLce(*env, s0, a, cfg);
  EXPECT_EQ(serial.per_trajectory, parallel.per_trajectory);
}

}  // namespace
}  // namespace dynsim
