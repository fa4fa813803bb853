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
#include <vector>

#include "dynsim/ode/integrator.h"
#include "dynsim/ode/rollout.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dynsim {
namespace {

using testing::Close;
using testing::RandomVector;

class ZeroField : public VectorField {
 public:
  explicit ZeroField(std::size_t n) : n_(n) {}
  std::size_t dim() const override { return n_; }
  void Eval(double, std::span<const double>, std::span<double> dy) const override {
    std::fill(dy.begin(), dy.end(), 0.0);
  }

 private:
  std::size_t n_;
};

// z' = theta * z (component-wise, shared theta).
class LinearField : public DifferentiableField {
 public:
  explicit LinearField(double theta, std::size_t n = 1) : theta_(theta), n_(n) {}
  std::size_t dim() const override { return n_; }
  std::size_t param_count() const override { return 1; }
  void Eval(double, std::span<const double> y, std::span<double> dy) const override {
    for (std::size_t i = 0; i < n_; ++i) dy[i] = theta_ * y[i];
  }
  void Vjp(double, std::span<const double> y, std::span<const double> u,
           std::span<double> gy, std::span<double> gt) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!gy.empty()) gy[i] += theta_ * u[i];
      if (!gt.empty()) gt[0] += y[i] * u[i];
    }
  }

 private:
  double theta_;
  std::size_t n_;
};

class Oscillator : public VectorField {
 public:
  std::size_t dim() const override { return 2; }
  void Eval(double, std::span<const double> y, std::span<double> dy) const override {
    dy[0] = y[1];
    dy[1] = -y[0];
  }
};

class BlowUp : public VectorField {
 public:
  std::size_t dim() const override { return 1; }
  void Eval(double, std::span<const double> y, std::span<double> dy) const override {
    dy[0] = y[0] * y[0];
  }
};

TEST(Dopri5Test, ZeroFieldOneStep) {
  IntegratorConfig cfg;
  cfg.h_init = 1.0;
  const std::vector<double> y0 = {1.5, -2.0};
  IntegrationResult r = Dopri5Integrate(ZeroField(2), y0, 0.0, 1.0, cfg, true);
  EXPECT_EQ(r.y, y0);
  EXPECT_EQ(r.stats.accepted, 1);
  EXPECT_EQ(r.records.size(), 1u);
}

TEST(Dopri5Test, ExponentialDecay) {
  IntegratorConfig cfg;
  IntegrationResult r =
      Dopri5Integrate(LinearField(-1.0), std::vector<double>{1.0}, 0, 1, cfg);
  EXPECT_NEAR(r.y[0], std::exp(-1.0), 10 * cfg.rtol);
}

TEST(Dopri5Test, BackwardDirection) {
  IntegratorConfig cfg;
  IntegrationResult r =
      Dopri5Integrate(LinearField(-1.0), std::vector<double>{1.0}, 1, 0, cfg);
  EXPECT_NEAR(r.y[0], std::exp(1.0), 10 * cfg.rtol * std::exp(1.0));
}

TEST(Dopri5Test, OscillatorReturnsAfterOnePeriod) {
  IntegratorConfig cfg;
  cfg.rtol = cfg.atol = 1e-8;
  IntegrationResult r = Dopri5Integrate(Oscillator(), std::vector<double>{1, 0},
                                        0, 2 * M_PI, cfg);
  EXPECT_NEAR(r.y[0], 1.0, 1e-6);
  EXPECT_NEAR(r.y[1], 0.0, 1e-6);
}

TEST(Dopri5Test, BlowUpReportsLastGoodState) {
  IntegratorConfig cfg;
  cfg.max_steps = 2000;
  try {
    Dopri5Integrate(BlowUp(), std::vector<double>{1.0}, 0, 2, cfg);
    FAIL();
  } catch (const IntegrationError& e) {
    EXPECT_NEAR(e.t(), 1.0, 0.05);
    ASSERT_EQ(e.state().size(), 1u);
    EXPECT_TRUE(std::isfinite(e.state()[0]));
  }
}

TEST(Dopri5Test, RejectsBadConfig) {
  IntegratorConfig cfg;
  cfg.rtol = 0;
  EXPECT_THROW(Dopri5Integrate(LinearField(-1), std::vector<double>{1}, 0, 1, cfg),
               ConfigError);
}

TEST(Dopri5Property, TighterToleranceNeverWorse) {
  double prev = INFINITY;
  for (double tol = 1e-3; tol >= 1e-11; tol /= 10) {
    IntegratorConfig cfg;
    cfg.rtol = cfg.atol = tol;
    const double err = std::abs(
        Dopri5Integrate(LinearField(-1.0), std::vector<double>{1.0}, 0, 1, cfg)
            .y[0] -
        std::exp(-1.0));
    EXPECT_LE(err, prev) << tol;
    prev = err;
  }
}

TEST(Dopri5Property, BitReproducible) {
  IntegratorConfig cfg;
  const std::vector<double> y0 = {0.3, -0.9};
  const IntegrationResult a = Dopri5Integrate(Oscillator(), y0, 0, 7.3, cfg);
  for (int i = 0; i < 5; ++i)
    EXPECT_EQ(Dopri5Integrate(Oscillator(), y0, 0, 7.3, cfg).y, a.y);
}

TEST(Rk4Test, ZeroFieldConstant) {
  const auto traj = Rk4Integrate(ZeroField(3), std::vector<double>{1, 2, 3}, 0,
                                 0.1, 10);
  ASSERT_EQ(traj.size(), 11u);
  for (const auto& s : traj) EXPECT_EQ(s, (std::vector<double>{1, 2, 3}));
}

TEST(Rk4Test, ExponentialDecay) {
  const auto traj =
      Rk4Integrate(LinearField(-1.0), std::vector<double>{1.0}, 0, 1e-3, 1000);
  EXPECT_LT(std::abs(traj.back()[0] - std::exp(-1.0)), 1e-10);
}

TEST(Rk4Test, FourthOrderConvergence) {
  auto err = [](std::int64_t n) {
    return std::abs(FixedStepIntegrate(LinearField(-1.0), RkMethod::kRk4,
                                       std::vector<double>{1.0}, 0, 1, n)
                        .y[0] -
                    std::exp(-1.0));
  };
  const double ratio = err(20) / err(40);
  EXPECT_NEAR(ratio, 16.0, 1.0);
}

TEST(BackpropTest, ZeroCotangent) {
  LinearField f(0.7);
  IntegrationResult r =
      Dopri5Integrate(f, std::vector<double>{1.0}, 0, 1, {}, true);
  std::vector<double> gt(1, 0.0);
  const std::vector<double> gy =
      BackpropThroughSteps(f, r.records, std::vector<double>{0.0}, gt);
  EXPECT_EQ(gy[0], 0.0);
  EXPECT_EQ(gt[0], 0.0);
}

TEST(BackpropTest, SingleEulerStepChainRule) {
  const double theta = 0.7, h = 0.1, z0 = 2.0, u = 3.0;
  LinearField f(theta);
  IntegrationResult r = FixedStepIntegrate(f, RkMethod::kEuler,
                                           std::vector<double>{z0}, 0, h, 1, true);
  std::vector<double> gt(1, 0.0);
  const std::vector<double> gy =
      BackpropThroughSteps(f, r.records, std::vector<double>{u}, gt);
  EXPECT_DOUBLE_EQ(gt[0], h * z0 * u);
  EXPECT_DOUBLE_EQ(gy[0], (1 + h * theta) * u);
}

TEST(BackpropTest, ExactForFixedStepMap) {
  // z1 = (1 + x + x^2/2 + x^3/6 + x^4/24)^n z0 with x = h theta.
  const double theta = 0.5, z0 = 1.0;
  const int n = 10;
  const double h = 1.0 / n, x = h * theta;
  const double g = 1 + x + x * x / 2 + x * x * x / 6 + x * x * x * x / 24;
  const double dg = h * (1 + x + x * x / 2 + x * x * x / 6);
  LinearField f(theta);
  IntegrationResult r = FixedStepIntegrate(f, RkMethod::kRk4,
                                           std::vector<double>{z0}, 0, 1, n, true);
  std::vector<double> gt(1, 0.0);
  BackpropThroughSteps(f, r.records, std::vector<double>{1.0}, gt);
  EXPECT_NEAR(gt[0], n * std::pow(g, n - 1) * dg * z0, 1e-14);
}

TEST(AdjointTest, ZeroCotangent) {
  LinearField f(0.5);
  std::vector<double> gt(1, 0.0);
  const std::vector<double> gy = AdjointBackward(
      f, std::vector<double>{std::exp(0.5)}, 0, 1, std::vector<double>{0.0}, {},
      gt);
  EXPECT_EQ(gy[0], 0.0);
  EXPECT_EQ(gt[0], 0.0);
}

TEST(AdjointTest, LinearClosedForm) {
  LinearField f(0.5);
  IntegratorConfig cfg;
  cfg.rtol = cfg.atol = 1e-8;
  const IntegrationResult fwd =
      Dopri5Integrate(f, std::vector<double>{1.0}, 0, 1, cfg);
  std::vector<double> gt(1, 0.0);
  const std::vector<double> gy =
      AdjointBackward(f, fwd.y, 0, 1, std::vector<double>{1.0}, cfg, gt);
  EXPECT_NEAR(gt[0], std::exp(0.5), 1e-4);
  EXPECT_NEAR(gy[0], std::exp(0.5), 1e-4);
}

DynamicsParams TinyModel(std::uint64_t seed, std::size_t correctors) {
  ModelSize size;
  size.position_hidden = size.state_hidden = size.corrector_hidden = 6;
  size.action_hidden = 4;
  size.position_blocks = size.state_blocks = size.corrector_blocks = 1;
  size.correctors = correctors;
  size.corrector_activation = Activation::kTanh;
  Rng rng(seed);
  DynamicsParams p =
      InitDynamicsParams(MakeStructuredArchitecture({2, 2, 1}, size), rng);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (double& v : p.values) v += u(rng);
  p.active_correctors = correctors;
  return p;
}

TEST(RolloutTest, GridStatesAndStats) {
  DynamicsParams p = TinyModel(1, 0);
  ModelSystem sys(p);
  RolloutOptions opts;
  const std::vector<double> actions = {0.5, -0.5, 0.2};
  Rollout r = IntegrateControlled(sys, std::vector<double>{0.1, 0.2, 0.0, 0.0},
                                  actions, 0.05, opts);
  EXPECT_EQ(r.states.size(), 4u);
  EXPECT_GE(r.stats.accepted, 3);
  EXPECT_THROW(IntegrateControlled(sys, std::vector<double>{0, 0, 0}, actions,
                                   0.05, opts),
               DimensionError);
}

TEST(RolloutProperty, BackpropAndAdjointAgree) {
  Rng rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    DynamicsParams p = TinyModel(trial, trial % 2);
    ModelSystem sys(p);
    RolloutOptions opts;
    opts.integrator.rtol = opts.integrator.atol = 1e-9;
    opts.record = true;
    const std::size_t n = 4;
    const std::vector<double> s0 = RandomVector(rng, 4),
                              actions = RandomVector(rng, n),
                              dl = RandomVector(rng, (n + 1) * 4);
    Rollout r = IntegrateControlled(sys, s0, actions, 0.05, opts);
    std::vector<double> g_bp(p.ParamCount(), 0.0), g_adj(p.ParamCount(), 0.0);
    const auto s_bp = BackpropRollout(sys, r, actions, dl, g_bp);
    const auto s_adj =
        AdjointRollout(sys, r, actions, 0.05, dl, opts.integrator, g_adj);
    double scale = 0.0;
    for (double v : g_bp) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < g_bp.size(); ++i)
      ASSERT_TRUE(Close(g_adj[i], g_bp[i], 1e-3, 1e-6 * scale)) << trial << " " << i << " " << g_adj[i] << " " << g_bp[i];
    for (std::size_t i = 0; i < 4; ++i)
      ASSERT_TRUE(Close(s_adj[i], s_bp[i], 1e-3, 1e-9)) << s_adj[i] << " " << s_bp[i];
  }
}

}  // namespace
}  // namespace dynsim
