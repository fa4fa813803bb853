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

#include "dynsim/envs/env.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

namespace dynsim {
namespace {

std::atomic<std::int64_t> g_oracle_calls{0};

constexpr double kPi = std::numbers::pi;

EnvSpec Spec(std::string name, std::size_t n, std::size_t da, double a_max,
             std::vector<double> init_low, std::vector<double> init_high,
             std::vector<std::uint8_t> periodic) {
  EnvSpec s;
  s.name = std::move(name);
  s.periodic = std::move(periodic);
  s.dims = {n, n, da};
  s.action_low.assign(da, -a_max);
  s.action_high.assign(da, a_max);
  s.init_low = std::move(init_low);
  s.init_high = std::move(init_high);
  return s;
}

// Solves [[a, b], [b, d]] x = r for symmetric 2x2 systems.
void Solve2(double a, double b, double d, double r0, double r1, double& x0,
            double& x1) {
  const double det = a * d - b * b;
  x0 = (d * r0 - b * r1) / det;
  x1 = (a * r1 - b * r0) / det;
}

class Pendulum : public Env {
 public:
  explicit Pendulum(const EnvOptions& o,
                    EnvSpec spec = Spec("pendulum", 1, 1, 2.0, {-kPi, -2.0},
                                        {kPi, 2.0}, {1}))
      : Env(std::move(spec)), damping_(o.damping.value_or(0.1)) {}

  double Energy(std::span<const double> s) const override {
    return 0.5 * s[1] * s[1] + kGravity * (1.0 - std::cos(s[0]));
  }

 protected:
  void Eval(std::span<const double> s, std::span<const double> a,
            std::span<double> ds) const override {
    ds[0] = s[1];
    ds[1] = a[0] - damping_ * s[1] - kGravity * std::sin(s[0]);
  }

  double damping_;
};

class WallPendulum : public Pendulum {
 public:
  explicit WallPendulum(const EnvOptions& o)
      : Pendulum(o, Spec("wallpendulum", 1, 1, 2.0,
                         {kWallAngle - 2.0 * kPi + 0.2, -2.0},
                         {kWallAngle - 0.2, 2.0}, {0})) {}

  double Energy(std::span<const double> s) const override {
    const double pen = Penetration(s[0]);
    return Pendulum::Energy(s) + 0.5 * kWallStiffness * pen * pen;
  }

 protected:
  void Eval(std::span<const double> s, std::span<const double> a,
            std::span<double> ds) const override {
    Pendulum::Eval(s, a, ds);
    ds[1] += WallTorque(s[0], s[1]);
  }

 private:
  static double Penetration(double theta) {
    if (theta > kWallAngle) return theta - kWallAngle;
    const double back = kWallAngle - 2.0 * kPi;
    if (theta < back) return back - theta;
    return 0.0;
  }

  // Pushes out only; never pulls the pendulum back into the wall.
  static double WallTorque(double theta, double omega) {
    if (theta > kWallAngle) {
      return -std::max(0.0, kWallStiffness * (theta - kWallAngle) +
                                kWallDamping * omega);
    }
    const double back = kWallAngle - 2.0 * kPi;
    if (theta < back) {
      return std::max(0.0, kWallStiffness * (back - theta) -
                               kWallDamping * omega);
    }
    return 0.0;
  }
};

class CartPole : public Env {
 public:
  explicit CartPole(const EnvOptions& o)
      : Env(Spec("cartpole", 2, 1, 10.0, {-1.0, -kPi, -1.0, -2.0},
                 {1.0, kPi, 1.0, 2.0}, {0, 1})),
        damping_(o.damping.value_or(0.0)) {}

  double Energy(std::span<const double> s) const override {
    const double xd = s[2], td = s[3], c = std::cos(s[1]);
    return 0.5 * (kCart + kPole) * xd * xd + kPole * kLen * xd * td * c +
           0.5 * kPole * kLen * kLen * td * td + kPole * kGravity * kLen * c;
  }

 protected:
  void Eval(std::span<const double> s, std::span<const double> a,
            std::span<double> ds) const override {
    const double th = s[1], xd = s[2], td = s[3];
    const double sn = std::sin(th), c = std::cos(th);
    // (M + m) xdd + m l c tdd = F + m l s td^2
    // m l c xdd + m l^2 tdd = m g l s
    const double r0 = a[0] + kPole * kLen * sn * td * td - damping_ * xd;
    const double r1 = kPole * kGravity * kLen * sn - damping_ * td;
    ds[0] = xd;
    ds[1] = td;
    Solve2(kCart + kPole, kPole * kLen * c, kPole * kLen * kLen, r0, r1, ds[2],
           ds[3]);
  }

 private:
  static constexpr double kCart = 1.0, kPole = 0.1, kLen = 0.5;
  double damping_;
};

// Two-link chain with generic inertia terms:
//   M11 = A + 2 B cos(q2), M12 = C + B cos(q2), M22 = C,
//   h = B sin(q2), Coriolis (-h (2 q1d q2d + q2d^2), h q1d^2).
struct TwoLink {
  double a, b, c;

  void Inertia(double q2, double& m11, double& m12, double& m22) const {
    const double cb = b * std::cos(q2);
    m11 = a + 2.0 * cb;
    m12 = c + cb;
    m22 = c;
  }
  double Kinetic(std::span<const double> s) const {
    double m11, m12, m22;
    Inertia(s[1], m11, m12, m22);
    return 0.5 * (m11 * s[2] * s[2] + 2.0 * m12 * s[2] * s[3] +
                  m22 * s[3] * s[3]);
  }
  // Accelerations for generalized forces (tau0, tau1) excluding Coriolis.
  void Accel(std::span<const double> s, double tau0, double tau1,
             std::span<double> ds) const {
    double m11, m12, m22;
    Inertia(s[1], m11, m12, m22);
    const double h = b * std::sin(s[1]);
    const double q1d = s[2], q2d = s[3];
    ds[0] = q1d;
    ds[1] = q2d;
    Solve2(m11, m12, m22, tau0 + h * (2.0 * q1d * q2d + q2d * q2d),
           tau1 - h * q1d * q1d, ds[2], ds[3]);
  }
};

class Reacher2 : public Env {
 public:
  explicit Reacher2(const EnvOptions& o)
      : Env(Spec("reacher2", 2, 2, 1.0, {-kPi, -kPi, -1.0, -1.0},
                 {kPi, kPi, 1.0, 1.0}, {1, 1})),
        damping_(o.damping.value_or(0.2)) {
    // Point masses m at the tips of links of length l.
    const double m = 1.0, l = 0.5;
    links_ = {m * l * l + m * (l * l + l * l), m * l * l, m * l * l};
  }

  double Energy(std::span<const double> s) const override {
    return links_.Kinetic(s);
  }

 protected:
  void Eval(std::span<const double> s, std::span<const double> a,
            std::span<double> ds) const override {
    links_.Accel(s, a[0] - damping_ * s[2], a[1] - damping_ * s[3], ds);
  }

 private:
  double damping_;
  TwoLink links_;
};

class Acrobot : public Env {
 public:
  explicit Acrobot(const EnvOptions& o)
      : Env(Spec("acrobot", 2, 1, 1.0, {-kPi, -kPi, -2.0, -2.0},
                 {kPi, kPi, 2.0, 2.0}, {1, 1})),
        damping_(o.damping.value_or(0.0)) {
    constexpr double m = 1.0, l = 1.0, lc = 0.5, inertia = m * l * l / 12.0;
    links_ = {m * lc * lc + inertia + m * (l * l + lc * lc) + inertia,
              m * l * lc, m * lc * lc + inertia};
  }

  double Energy(std::span<const double> s) const override {
    constexpr double m = 1.0, l = 1.0, lc = 0.5;
    const double potential =
        -m * kGravity * lc * std::cos(s[0]) -
        m * kGravity * (l * std::cos(s[0]) + lc * std::cos(s[0] + s[1]));
    return links_.Kinetic(s) + potential;
  }

 protected:
  void Eval(std::span<const double> s, std::span<const double> a,
            std::span<double> ds) const override {
    constexpr double m = 1.0, l = 1.0, lc = 0.5;
    const double g12 = m * lc * kGravity * std::sin(s[0] + s[1]);
    const double g1 = (m * lc + m * l) * kGravity * std::sin(s[0]) + g12;
    links_.Accel(s, -g1 - damping_ * s[2], a[0] - g12 - damping_ * s[3], ds);
  }

 private:
  double damping_;
  TwoLink links_;
};

class OracleField : public VectorField {
 public:
  OracleField(const Env& env, std::span<const double> a) : env_(env), a_(a) {}
  std::size_t dim() const override { return env_.state_dim(); }
  void Eval(double, std::span<const double> y,
            std::span<double> dy) const override {
    env_.Derivative(y, a_, dy);
  }

 private:
  const Env& env_;
  std::span<const double> a_;
};

}  // namespace

void Env::Derivative(std::span<const double> s, std::span<const double> a,
                     std::span<double> ds) const {
  if (s.size() != state_dim() || ds.size() != state_dim())
    throw DimensionError(spec_.name + ": state length");
  if (a.size() != action_dim()) throw DimensionError(spec_.name + ": action length");
  g_oracle_calls.fetch_add(1, std::memory_order_relaxed);
  Eval(s, a, ds);
}

std::vector<double> Env::SampleInitialState(Rng& rng) const {
  std::vector<double> s(state_dim());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::uniform_real_distribution<double>(spec_.init_low[i],
                                                  spec_.init_high[i])(rng);
  }
  return s;
}

std::vector<double> Env::ClampAction(std::span<const double> a) const {
  std::vector<double> out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(out[i], spec_.action_low[i], spec_.action_high[i]);
  return out;
}

std::unique_ptr<Env> MakeEnv(const std::string& name, const EnvOptions& o) {
  if (name == "pendulum") return std::make_unique<Pendulum>(o);
  if (name == "cartpole") return std::make_unique<CartPole>(o);
  if (name == "reacher2") return std::make_unique<Reacher2>(o);
  if (name == "acrobot") return std::make_unique<Acrobot>(o);
  if (name == "wallpendulum") return std::make_unique<WallPendulum>(o);
  throw ConfigError("unknown env '" + name + "'");
}

const std::vector<std::string>& EnvNames() {
  static const std::vector<std::string> names = {
      "pendulum", "cartpole", "reacher2", "acrobot", "wallpendulum"};
  return names;
}

std::uint64_t EnvConstantsHash(const Env& env) {
  const EnvSpec& sp = env.spec();
  std::uint64_t h = Fnv1a(sp.name);
  const double header[] = {static_cast<double>(sp.dims.dq),
                           static_cast<double>(sp.dims.dv),
                           static_cast<double>(sp.dims.da), sp.dt,
                           static_cast<double>(kOracleSubsteps)};
  h = Fnv1a(header, h);
  for (const auto* v : {&sp.action_low, &sp.action_high, &sp.init_low,
                        &sp.init_high}) {
    h = Fnv1a(*v, h);
  }
  // Derivatives at fixed probe points cover the physical constants.
  const std::size_t n = sp.dims.state();
  std::vector<double> s(n), a(sp.dims.da), ds(n);
  for (int probe = 0; probe < 3; ++probe) {
    for (std::size_t i = 0; i < n; ++i) s[i] = 0.3 * (probe + 1) * (i + 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = 0.5 * (sp.action_low[i] + sp.action_high[i]) + 0.1 * probe;
    }
    env.Derivative(s, a, ds);
    h = Fnv1a(ds, h);
  }
  return h;
}

std::int64_t OracleCallCount() {
  return g_oracle_calls.load(std::memory_order_relaxed);
}
void ResetOracleCallCount() { g_oracle_calls.store(0); }

SamplerMode ParseSamplerMode(const std::string& name) {
  if (name == "uniform_per_step") return SamplerMode::kUniformPerStep;
  if (name == "poisson_hold") return SamplerMode::kPoissonHold;
  throw ConfigError("unknown action sampler '" + name + "'");
}

std::vector<double> SampleActions(const ActionSamplerSpec& sampler,
                                  std::span<const double> low,
                                  std::span<const double> high,
                                  std::size_t n_steps, double dt, Rng& rng) {
  const std::size_t da = low.size();
  if (high.size() != da) throw DimensionError("action bound lengths differ");
  std::vector<double> out(n_steps * da);
  auto draw = [&](std::size_t k) {
    for (std::size_t i = 0; i < da; ++i) {
      out[k * da + i] =
          std::uniform_real_distribution<double>(low[i], high[i])(rng);
    }
  };
  if (sampler.mode == SamplerMode::kUniformPerStep) {
    for (std::size_t k = 0; k < n_steps; ++k) draw(k);
    return out;
  }
  if (!(sampler.rate > 0)) throw ConfigError("poisson_hold rate must be > 0");
  std::exponential_distribution<double> hold(sampler.rate);
  std::size_t k = 0;
  while (k < n_steps) {
    const double d = hold(rng);
    const auto len =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(d / dt)));
    draw(k);
    const std::size_t end = std::min(n_steps, k + len);
    for (std::size_t j = k + 1; j < end; ++j)
      std::copy_n(out.begin() + k * da, da, out.begin() + j * da);
    k = end;
  }
  return out;
}

TrajectorySegment GenerateTrajectory(const Env& env, std::span<const double> s0,
                                     std::span<const double> actions,
                                     std::size_t n_steps, SourceTag tag) {
  const std::size_t ds = env.state_dim(), da = env.action_dim();
  if (s0.size() != ds) throw DimensionError("initial state length");
  if (actions.size() < n_steps * da)
    throw DimensionError("action sequence shorter than n_steps");
  TrajectorySegment seg;
  seg.dt = env.spec().dt;
  seg.state_dim = ds;
  seg.action_dim = da;
  seg.tag = tag;
  seg.actions.assign(actions.begin(), actions.begin() + n_steps * da);
  seg.states.reserve((n_steps + 1) * ds);
  seg.states.assign(s0.begin(), s0.end());
  std::vector<double> s(s0.begin(), s0.end());
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t0 = static_cast<double>(k) * seg.dt;
    OracleField f(env, seg.action(k));
    try {
      s = FixedStepIntegrate(f, RkMethod::kRk4, s, t0, t0 + seg.dt,
                             kOracleSubsteps)
              .y;
    } catch (const IntegrationError& e) {
      throw IntegrationError(env.spec().name + " rollout failed at step " +
                                 std::to_string(k) + ": " + e.what(),
                             e.t(), e.state());
    }
    seg.states.insert(seg.states.end(), s.begin(), s.end());
  }
  return seg;
}

}  // namespace dynsim
