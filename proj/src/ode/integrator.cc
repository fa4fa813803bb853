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

#include "dynsim/ode/integrator.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynsim/common.h"

namespace dynsim {
namespace {

constexpr int kMaxStages = 7;

struct Tableau {
  int stages;  // stages contributing to the solution
  double c[kMaxStages];
  double a[kMaxStages][kMaxStages];
  double b[kMaxStages];
};

constexpr Tableau kEuler = {1, {0}, {{0}}, {1}};

constexpr Tableau kRk4 = {4,
                          {0, 0.5, 0.5, 1},
                          {{0}, {0.5}, {0, 0.5}, {0, 0, 1}},
                          {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}};

// Dormand-Prince 5(4). The seventh stage (FSAL) only enters the error
// estimate, so the solution uses six stages.
constexpr Tableau kDopri5 = {
    6,
    {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1},
    {{0},
     {1.0 / 5},
     {3.0 / 40, 9.0 / 40},
     {44.0 / 45, -56.0 / 15, 32.0 / 9},
     {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
     {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
      -5103.0 / 18656},
     {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0}};

// b - b_hat of the embedded fourth-order solution.
constexpr double kDopri5Err[kMaxStages] = {
    71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
    22.0 / 525,   -1.0 / 40};

const Tableau& TableauFor(RkMethod m) {
  switch (m) {
    case RkMethod::kEuler:
      return kEuler;
    case RkMethod::kRk4:
      return kRk4;
    case RkMethod::kDopri5:
      return kDopri5;
  }
  return kDopri5;
}

// Stage input y + h sum_{j<i} a_ij k_j.
void StageInput(const Tableau& tab, int i, std::span<const double> y, double h,
                const std::vector<std::vector<double>>& k,
                std::span<double> out) {
  std::copy(y.begin(), y.end(), out.begin());
  for (int j = 0; j < i; ++j) {
    const double coef = h * tab.a[i][j];
    if (coef == 0.0) continue;
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += coef * k[j][d];
  }
}

// Fills k[0..stages) given k[0] = f(t, y) already set, and the new state.
void TakeStages(const VectorField& f, const Tableau& tab, double t,
                std::span<const double> y, double h,
                std::vector<std::vector<double>>& k, std::vector<double>& tmp,
                std::vector<double>& y_new, IntegrationStats& stats) {
  for (int i = 1; i < tab.stages; ++i) {
    StageInput(tab, i, y, h, k, tmp);
    f.Eval(t + tab.c[i] * h, tmp, k[i]);
    ++stats.f_evals;
  }
  std::copy(y.begin(), y.end(), y_new.begin());
  for (int i = 0; i < tab.stages; ++i) {
    const double coef = h * tab.b[i];
    if (coef == 0.0) continue;
    for (std::size_t d = 0; d < y_new.size(); ++d) y_new[d] += coef * k[i][d];
  }
}

void CheckDims(const VectorField& f, std::size_t n) {
  if (n != f.dim()) {
    throw DimensionError("state length " + std::to_string(n) +
                         " != field dimension " + std::to_string(f.dim()));
  }
}

// z' = f(z), alpha' = -J^T alpha, g' = -(df/dtheta)^T alpha.
class AugmentedField : public VectorField {
 public:
  explicit AugmentedField(const DifferentiableField& f)
      : f_(f), n_(f.dim()), p_(f.param_count()) {}

  std::size_t dim() const override { return 2 * n_ + p_; }

  void Eval(double t, std::span<const double> y,
            std::span<double> dy) const override {
    std::span<const double> z = y.first(n_), alpha = y.subspan(n_, n_);
    f_.Eval(t, z, dy.first(n_));
    std::span<double> da = dy.subspan(n_, n_), dg = dy.subspan(2 * n_, p_);
    std::fill(da.begin(), da.end(), 0.0);
    std::fill(dg.begin(), dg.end(), 0.0);
    f_.Vjp(t, z, alpha, da, dg);
    for (double& v : da) v = -v;
    for (double& v : dg) v = -v;
  }

 private:
  const DifferentiableField& f_;
  std::size_t n_, p_;
};

}  // namespace

void IntegratorConfig::Validate() const {
  if (!(rtol > 0) || !(atol > 0)) throw ConfigError("rtol and atol must be > 0");
  if (!(h_min > 0)) throw ConfigError("h_min must be > 0");
  if (h_init > 0 && (h_init < h_min || h_init > h_max))
    throw ConfigError("h_init must lie in [h_min, h_max]");
  if (!(h_max >= h_min)) throw ConfigError("h_max must be >= h_min");
  if (max_steps <= 0) throw ConfigError("max_steps must be > 0");
}

IntegrationResult Dopri5Integrate(const VectorField& f,
                                  std::span<const double> y0, double t0,
                                  double t1, const IntegratorConfig& cfg,
                                  bool record) {
  cfg.Validate();
  const std::size_t n = y0.size();
  CheckDims(f, n);
  IntegrationResult res;
  res.y.assign(y0.begin(), y0.end());
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return res;
  const double dir = t1 > t0 ? 1.0 : -1.0;

  // Hairer's PI controller constants.
  constexpr double kBeta = 0.04, kSafe = 0.9;
  constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  constexpr double kFacMinInv = 5.0, kFacMaxInv = 0.1;  // 1/0.2, 1/10

  std::vector<std::vector<double>> k(kMaxStages, std::vector<double>(n));
  std::vector<double> tmp(n), y_new(n), err(n);
  double t = t0;
  double h = std::min(cfg.h_init > 0 ? cfg.h_init : span / 10.0, cfg.h_max);
  double facold = 1e-4;
  bool last_rejected = false;
  std::int64_t attempts = 0;
  f.Eval(t, res.y, k[0]);
  ++res.stats.f_evals;

  while (true) {
    if (++attempts > cfg.max_steps) {
      throw IntegrationError("DOPRI5 exceeded max_steps", t, res.y);
    }
    if (h < cfg.h_min) {
      throw IntegrationError("DOPRI5 step size underflow", t, res.y);
    }
    const double remaining = std::abs(t1 - t);
    const bool last = h >= remaining;
    const double hh = last ? remaining : h;
    const double hs = dir * hh;
    TakeStages(f, kDopri5, t, res.y, hs, k, tmp, y_new, res.stats);
    f.Eval(t + hs, y_new, k[6]);
    ++res.stats.f_evals;

    double err_norm = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      double e = 0.0;
      for (int i = 0; i < kMaxStages; ++i) e += kDopri5Err[i] * k[i][d];
      const double sc =
          cfg.atol + cfg.rtol * std::max(std::abs(res.y[d]), std::abs(y_new[d]));
      err_norm = std::max(err_norm, std::abs(hs * e) / sc);
    }
    if (!std::isfinite(err_norm) || !AllFinite(y_new)) {
      err_norm = std::numeric_limits<double>::infinity();
    }

    const double fac11 = std::pow(err_norm, kExpo1);
    if (err_norm <= 1.0) {
      if (record) {
        StepRecord r;
        r.method = RkMethod::kDopri5;
        r.t = t;
        r.h = hs;
        r.y = res.y;
        r.k.assign(k.begin(), k.begin() + kDopri5.stages);
        res.records.push_back(std::move(r));
      }
      ++res.stats.accepted;
      t = last ? t1 : t + hs;
      res.y.swap(y_new);
      k[0].swap(k[6]);
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafe, kFacMaxInv, kFacMinInv);
      double h_new = hh / fac;
      if (last_rejected) h_new = std::min(h_new, hh);
      facold = std::max(err_norm, 1e-4);
      last_rejected = false;
      h = std::min(h_new, cfg.h_max);
      res.h_next = h;
      if (last) break;
    } else {
      ++res.stats.rejected;
      last_rejected = true;
      h = hh / std::min(kFacMinInv, fac11 / kSafe);
    }
  }
  return res;
}

IntegrationResult FixedStepIntegrate(const VectorField& f, RkMethod method,
                                     std::span<const double> y0, double t0,
                                     double t1, std::int64_t n_steps,
                                     bool record) {
  if (n_steps <= 0) throw ConfigError("n_steps must be > 0");
  const std::size_t n = y0.size();
  CheckDims(f, n);
  const Tableau& tab = TableauFor(method);
  IntegrationResult res;
  res.y.assign(y0.begin(), y0.end());
  const double h = (t1 - t0) / static_cast<double>(n_steps);
  std::vector<std::vector<double>> k(tab.stages, std::vector<double>(n));
  std::vector<double> tmp(n), y_new(n);
  for (std::int64_t s = 0; s < n_steps; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    f.Eval(t, res.y, k[0]);
    ++res.stats.f_evals;
    TakeStages(f, tab, t, res.y, h, k, tmp, y_new, res.stats);
    if (!AllFinite(y_new)) {
      throw IntegrationError("non-finite state in fixed-step integration", t,
                             res.y);
    }
    if (record) res.records.push_back({method, t, h, res.y, k});
    res.y.swap(y_new);
    ++res.stats.accepted;
  }
  return res;
}

std::vector<std::vector<double>> Rk4Integrate(const VectorField& f,
                                              std::span<const double> y0,
                                              double t0, double dt,
                                              std::int64_t n_steps) {
  if (!(dt > 0)) throw ConfigError("dt must be > 0");
  std::vector<std::vector<double>> traj;
  traj.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.emplace_back(y0.begin(), y0.end());
  for (std::int64_t s = 0; s < n_steps; ++s) {
    const double t = t0 + static_cast<double>(s) * dt;
    traj.push_back(
        FixedStepIntegrate(f, RkMethod::kRk4, traj.back(), t, t + dt, 1).y);
  }
  return traj;
}

std::vector<double> BackpropThroughSteps(const DifferentiableField& f,
                                         const std::vector<StepRecord>& records,
                                         std::span<const double> dl_dy1,
                                         std::span<double> grad_theta) {
  const std::size_t n = f.dim();
  if (dl_dy1.size() != n) throw DimensionError("cotangent length");
  if (!grad_theta.empty() && grad_theta.size() != f.param_count())
    throw DimensionError("grad_theta length");
  std::vector<double> ybar(dl_dy1.begin(), dl_dy1.end());
  std::vector<std::vector<double>> stage_bar(kMaxStages, std::vector<double>(n));
  std::vector<double> kbar(n), yi(n);
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const StepRecord& r = *it;
    const Tableau& tab = TableauFor(r.method);
    if (r.y.size() != n || static_cast<int>(r.k.size()) != tab.stages)
      throw DimensionError("step record does not match the field");
    for (int i = tab.stages - 1; i >= 0; --i) {
      for (std::size_t d = 0; d < n; ++d) kbar[d] = r.h * tab.b[i] * ybar[d];
      for (int m = i + 1; m < tab.stages; ++m) {
        const double coef = r.h * tab.a[m][i];
        if (coef == 0.0) continue;
        for (std::size_t d = 0; d < n; ++d) kbar[d] += coef * stage_bar[m][d];
      }
      std::fill(stage_bar[i].begin(), stage_bar[i].end(), 0.0);
      StageInput(tab, i, r.y, r.h, r.k, yi);
      f.Vjp(r.t + tab.c[i] * r.h, yi, kbar, stage_bar[i], grad_theta);
    }
    for (int i = 0; i < tab.stages; ++i)
      for (std::size_t d = 0; d < n; ++d) ybar[d] += stage_bar[i][d];
  }
  return ybar;
}

std::vector<double> AdjointBackward(const DifferentiableField& f,
                                    std::span<const double> y1, double t0,
                                    double t1, std::span<const double> dl_dy1,
                                    const IntegratorConfig& cfg,
                                    std::span<double> grad_theta,
                                    IntegrationStats* stats) {
  const std::size_t n = f.dim(), p = f.param_count();
  if (y1.size() != n || dl_dy1.size() != n)
    throw DimensionError("adjoint state length");
  if (!grad_theta.empty() && grad_theta.size() != p)
    throw DimensionError("grad_theta length");
  AugmentedField aug(f);
  std::vector<double> init(2 * n + p, 0.0);
  std::copy(y1.begin(), y1.end(), init.begin());
  std::copy(dl_dy1.begin(), dl_dy1.end(), init.begin() + n);
  IntegrationResult back = Dopri5Integrate(aug, init, t1, t0, cfg);
  if (stats != nullptr) *stats += back.stats;
  if (!grad_theta.empty()) {
    for (std::size_t i = 0; i < p; ++i) grad_theta[i] += back.y[2 * n + i];
  }
  return {back.y.begin() + n, back.y.begin() + 2 * n};
}

}  // namespace dynsim
