/* Copyright 2026 The stablab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "stablab/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stablab/errors.hpp"
#include "stablab/seeding.hpp"

namespace stablab {
namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(name) + " must be finite and >= 0");
  }
}

void require_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw InvalidArgument("theta must lie in [0, 1]");
  }
}

// Shared SGD recursion. next(t) returns the 0-based example index of step t;
// post(w, eta) applies the projection or proximal map.
template <class Next, class Post>
Trajectory run_core(const LossSpec& loss, const Dataset& S,
                    const StepSchedule& sched, std::uint64_t T,
                    std::uint64_t seed, const RunOptions& opts, Next&& next,
                    Post&& post) {
  if (S.empty()) throw InvalidArgument("SGD on an empty dataset");
  sched.check_horizon(T);
  const auto d = static_cast<Eigen::Index>(S.dim());

  Trajectory tr;
  tr.index_sequence_seed = seed;
  tr.steps = T;
  Vector w = Vector::Zero(d);
  Vector step(d);
  Vector acc_eta = Vector::Zero(d);
  Vector acc_lin = Vector::Zero(d);
  double sum_eta = 0.0;
  double sum_lin = 0.0;
  const double offset = static_cast<double>(sched.linear_offset());

  std::uint64_t stride = 0;
  std::vector<std::uint64_t> check_t;
  std::vector<double> check_v;
  if (opts.risk_checkpoints > 0 && T > 0) {
    stride = std::max<std::uint64_t>(
        1, (T + opts.risk_checkpoints - 1) / opts.risk_checkpoints);
  }
  if (opts.record_step_losses) tr.per_step_risk.reserve(T);

  for (std::uint64_t t = 1; t <= T; ++t) {
    const std::size_t i = next(t);
    const double eta = sched.eta(t);
    if (opts.record_every > 0 && (t - 1) % opts.record_every == 0) {
      tr.iterates.push_back(w);
      tr.iterate_steps.push_back(t);
    }
    if (stride > 0 && ((t - 1) % stride == 0 || t == T)) {
      check_t.push_back(t);
      check_v.push_back(empirical_risk(loss, S, w));
    }
    const double lin = static_cast<double>(t) + offset - 1.0;
    acc_eta.noalias() += eta * w;
    acc_lin.noalias() += lin * w;
    sum_eta += eta;
    sum_lin += lin;

    const Example& z = S[i];
    if (opts.record_step_losses) tr.per_step_risk.push_back(loss_value(loss, w, z));
    step.setZero();
    add_scaled_subgradient(loss, w, z, -eta, step);
    w += step;
    post(w, eta);
  }

  tr.avg_eta = sum_eta > 0.0 ? Vector(acc_eta / sum_eta) : Vector::Zero(d);
  tr.avg_linear = sum_lin > 0.0 ? Vector(acc_lin / sum_lin) : Vector::Zero(d);
  tr.final = std::move(w);

  if (stride > 0) {
    tr.full_risk.resize(T);
    std::size_t k = 0;
    for (std::uint64_t t = 1; t <= T; ++t) {
      while (check_t[k] < t) ++k;
      tr.full_risk[t - 1] =
          check_t[k] == t ? check_v[k] : std::max(check_v[k - 1], check_v[k]);
    }
  }
  return tr;
}

}  // namespace

StepSchedule StepSchedule::horizon_constant(double c, std::uint64_t T) {
  require_nonnegative(c, "c");
  if (T == 0) throw InvalidArgument("horizon must be >= 1");
  StepSchedule s;
  s.kind = Kind::kHorizonConstant;
  s.c = c;
  s.horizon = T;
  return s;
}

StepSchedule StepSchedule::poly_decay(double eta1, double theta) {
  require_nonnegative(eta1, "eta1");
  require_theta(theta);
  StepSchedule s;
  s.kind = Kind::kPolyDecay;
  s.eta1 = eta1;
  s.theta = theta;
  return s;
}

StepSchedule StepSchedule::horizon_poly(double c, double theta, std::uint64_t T) {
  require_nonnegative(c, "c");
  require_theta(theta);
  if (T == 0) throw InvalidArgument("horizon must be >= 1");
  StepSchedule s;
  s.kind = Kind::kHorizonPoly;
  s.c = c;
  s.theta = theta;
  s.horizon = T;
  return s;
}

StepSchedule StepSchedule::strongly_convex(double sigma, std::uint64_t t0) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("sigma must be finite and > 0");
  }
  StepSchedule s;
  s.kind = Kind::kStronglyConvex;
  s.sigma = sigma;
  s.t0 = t0;
  return s;
}

StepSchedule StepSchedule::fixed_constant(double eta1) {
  require_nonnegative(eta1, "eta1");
  StepSchedule s;
  s.kind = Kind::kFixedConstant;
  s.eta1 = eta1;
  return s;
}

double StepSchedule::eta(std::uint64_t t) const {
  if (t == 0) throw InvalidArgument("steps are counted from 1");
  const auto td = static_cast<double>(t);
  switch (kind) {
    case Kind::kHorizonConstant:
      return c / std::sqrt(static_cast<double>(horizon));
    case Kind::kPolyDecay:
      return eta1 * std::pow(td, -theta);
    case Kind::kHorizonPoly:
      return c * std::pow(static_cast<double>(horizon), -theta);
    case Kind::kStronglyConvex:
      return 2.0 / ((td + static_cast<double>(t0)) * sigma);
    case Kind::kFixedConstant:
      return eta1;
  }
  return 0.0;
}

std::vector<double> StepSchedule::etas(std::uint64_t T) const {
  std::vector<double> out(T);
  for (std::uint64_t t = 1; t <= T; ++t) out[t - 1] = eta(t);
  return out;
}

void StepSchedule::check_horizon(std::uint64_t T) const {
  if (has_horizon() && T != 0 && T != horizon) {
    throw InvalidArgument("schedule horizon " + std::to_string(horizon) +
                          " does not match run length " + std::to_string(T));
  }
}

std::string_view to_string(StepSchedule::Kind kind) {
  switch (kind) {
    case StepSchedule::Kind::kHorizonConstant:
      return "horizon-constant";
    case StepSchedule::Kind::kPolyDecay:
      return "poly-decay";
    case StepSchedule::Kind::kHorizonPoly:
      return "horizon-poly";
    case StepSchedule::Kind::kStronglyConvex:
      return "strongly-convex";
    case StepSchedule::Kind::kFixedConstant:
      return "fixed-constant";
  }
  return "unknown";
}

StepSchedule::Kind schedule_kind_from_string(std::string_view name) {
  if (name == "horizon-constant") return StepSchedule::Kind::kHorizonConstant;
  if (name == "poly-decay") return StepSchedule::Kind::kPolyDecay;
  if (name == "horizon-poly") return StepSchedule::Kind::kHorizonPoly;
  if (name == "strongly-convex") return StepSchedule::Kind::kStronglyConvex;
  if (name == "fixed-constant") return StepSchedule::Kind::kFixedConstant;
  throw InvalidArgument("unknown schedule kind '" + std::string(name) + "'");
}

Domain Domain::ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("ball radius must be finite and > 0");
  }
  Domain d;
  d.kind = Kind::kBall;
  d.radius = radius;
  return d;
}

bool Domain::contains(const Vector& w, double tol) const {
  return kind == Kind::kUnconstrained || w.norm() <= radius * (1.0 + tol);
}

void project_in_place(const Domain& domain, Vector& w) {
  if (domain.kind == Domain::Kind::kUnconstrained) return;
  const double norm = w.norm();
  if (norm > domain.radius) w *= domain.radius / norm;
}

Vector project(const Domain& domain, const Vector& w) {
  Vector out = w;
  project_in_place(domain, out);
  return out;
}

Regularizer Regularizer::l2(double lambda) {
  require_nonnegative(lambda, "lambda");
  return {Kind::kL2, lambda};
}

Regularizer Regularizer::l1(double lambda) {
  require_nonnegative(lambda, "lambda");
  return {Kind::kL1, lambda};
}

std::string_view to_string(Regularizer::Kind kind) {
  switch (kind) {
    case Regularizer::Kind::kNone:
      return "none";
    case Regularizer::Kind::kL2:
      return "l2";
    case Regularizer::Kind::kL1:
      return "l1";
  }
  return "unknown";
}

Regularizer::Kind regularizer_kind_from_string(std::string_view name) {
  if (name == "none") return Regularizer::Kind::kNone;
  if (name == "l2") return Regularizer::Kind::kL2;
  if (name == "l1") return Regularizer::Kind::kL1;
  throw InvalidArgument("unknown regularizer '" + std::string(name) + "'");
}

namespace {

void prox_in_place(const Regularizer& reg, double eta, Vector& v) {
  switch (reg.kind) {
    case Regularizer::Kind::kNone:
      return;
    case Regularizer::Kind::kL2:
      v /= 1.0 + eta * reg.lambda;
      return;
    case Regularizer::Kind::kL1: {
      const double k = eta * reg.lambda;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double a = std::abs(v[j]) - k;
        v[j] = a > 0.0 ? std::copysign(a, v[j]) : 0.0;
      }
      return;
    }
  }
}

}  // namespace

Vector prox(const Regularizer& reg, double eta, const Vector& v) {
  Vector out = v;
  prox_in_place(reg, eta, out);
  return out;
}

std::string_view to_string(OutputKind kind) {
  switch (kind) {
    case OutputKind::kFinal:
      return "final";
    case OutputKind::kAvgEta:
      return "avg-eta";
    case OutputKind::kAvgLinear:
      return "avg-linear";
  }
  return "unknown";
}

OutputKind output_kind_from_string(std::string_view name) {
  if (name == "final") return OutputKind::kFinal;
  if (name == "avg-eta") return OutputKind::kAvgEta;
  if (name == "avg-linear") return OutputKind::kAvgLinear;
  throw InvalidArgument("unknown output kind '" + std::string(name) + "'");
}

const Vector& select_output(const Trajectory& traj, OutputKind kind) {
  switch (kind) {
    case OutputKind::kFinal:
      return traj.final;
    case OutputKind::kAvgEta:
      return traj.avg_eta;
    case OutputKind::kAvgLinear:
      return traj.avg_linear;
  }
  return traj.final;
}

OutputKind default_output(const StepSchedule& sched) {
  return sched.kind == StepSchedule::Kind::kStronglyConvex ? OutputKind::kAvgLinear
                                                           : OutputKind::kAvgEta;
}

Trajectory sgd_run(const LossSpec& loss, const Dataset& S,
                   const StepSchedule& sched, const Domain& dom,
                   std::uint64_t T, std::uint64_t rng_seed,
                   const RunOptions& opts) {
  const IndexStream stream(rng_seed);
  const std::size_t n = S.size();
  return run_core(
      loss, S, sched, T, rng_seed, opts,
      [&](std::uint64_t t) { return stream.uniform(t, n); },
      [&](Vector& w, double) { project_in_place(dom, w); });
}

Trajectory sgd_run_indices(const LossSpec& loss, const Dataset& S,
                           const StepSchedule& sched, const Domain& dom,
                           std::span<const std::size_t> indices,
                           const RunOptions& opts) {
  for (std::size_t i : indices) {
    if (i >= S.size()) throw InvalidArgument("index sequence out of range");
  }
  return run_core(
      loss, S, sched, indices.size(), 0, opts,
      [&](std::uint64_t t) { return indices[t - 1]; },
      [&](Vector& w, double) { project_in_place(dom, w); });
}

Trajectory spgd_run(const LossSpec& loss, const Regularizer& reg,
                    const Dataset& S, const StepSchedule& sched,
                    std::uint64_t T, std::uint64_t rng_seed,
                    const RunOptions& opts) {
  const IndexStream stream(rng_seed);
  const std::size_t n = S.size();
  return run_core(
      loss, S, sched, T, rng_seed, opts,
      [&](std::uint64_t t) { return stream.uniform(t, n); },
      [&](Vector& w, double eta) { prox_in_place(reg, eta, w); });
}

Trajectory sgd_permutations_run(const LossSpec& loss, const Dataset& S,
                                const StepSchedule& sched,
                                std::span<const std::vector<std::size_t>> perms,
                                const RunOptions& opts) {
  const std::size_t n = S.size();
  for (const auto& p : perms) {
    std::vector<bool> seen(n, false);
    if (p.size() != n) throw InvalidArgument("permutation has the wrong length");
    for (std::size_t i : p) {
      if (i >= n || seen[i]) throw InvalidArgument("not a permutation");
      seen[i] = true;
    }
  }
  return run_core(
      loss, S, sched, static_cast<std::uint64_t>(perms.size() * n), 0, opts,
      [&](std::uint64_t s) { return perms[(s - 1) / n][(s - 1) % n]; },
      [](Vector&, double) {});
}

Trajectory sgd_without_replacement_run(const LossSpec& loss, const Dataset& S,
                                       const StepSchedule& sched,
                                       std::uint64_t K, std::uint64_t rng_seed,
                                       const RunOptions& opts) {
  if (S.empty()) throw InvalidArgument("SGD on an empty dataset");
  const IndexStream stream(rng_seed);
  const std::size_t n = S.size();
  std::vector<std::size_t> perm;
  std::uint64_t epoch = 0;
  return run_core(
      loss, S, sched, K * n, rng_seed, opts,
      [&](std::uint64_t s) {
        const std::uint64_t k = (s - 1) / n + 1;
        if (k != epoch) {
          perm = stream.permutation(k, n);
          epoch = k;
        }
        return perm[(s - 1) % n];
      },
      [](Vector&, double) {});
}

std::uint64_t t0_for_strong_convexity(double L, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (!(L > 0.0)) throw InvalidArgument("L must be > 0");
  const double v = std::ceil(4.0 * L * L / (sigma * sigma));
  if (!(v < 1e18)) throw InvalidArgument("t0 overflows");
  return static_cast<std::uint64_t>(v);
}

}  // namespace stablab
