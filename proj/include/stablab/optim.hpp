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

#ifndef STABLAB_OPTIM_HPP_
#define STABLAB_OPTIM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stablab/data.hpp"
#include "stablab/linalg.hpp"
#include "stablab/losses.hpp"

namespace stablab {

// Step sizes eta_t for t = 1, 2, ...
//   horizon-constant  c / sqrt(T)
//   poly-decay        eta1 t^-theta
//   horizon-poly      c T^-theta
//   strongly-convex   2 / ((t + t0) sigma)
//   fixed-constant    eta1
// Horizon schedules remember T and refuse runs of a different length.
struct StepSchedule {
  enum class Kind { kHorizonConstant, kPolyDecay, kHorizonPoly, kStronglyConvex, kFixedConstant };

  Kind kind = Kind::kFixedConstant;
  double c = 0.0;
  double eta1 = 0.0;
  double theta = 0.0;
  double sigma = 0.0;
  std::uint64_t t0 = 0;
  std::uint64_t horizon = 0;  // horizon kinds only

  static StepSchedule horizon_constant(double c, std::uint64_t T);
  static StepSchedule poly_decay(double eta1, double theta);
  static StepSchedule horizon_poly(double c, double theta, std::uint64_t T);
  static StepSchedule strongly_convex(double sigma, std::uint64_t t0);
  static StepSchedule fixed_constant(double eta1);

  bool has_horizon() const {
    return kind == Kind::kHorizonConstant || kind == Kind::kHorizonPoly;
  }
  double eta(std::uint64_t t) const;
  std::vector<double> etas(std::uint64_t T) const;
  // Throws InvalidArgument when a horizon schedule is run for T' != T.
  void check_horizon(std::uint64_t T) const;
  // Offset of the linear averaging weights (t + offset - 1).
  std::uint64_t linear_offset() const {
    return kind == Kind::kStronglyConvex ? t0 : 1;
  }
};

std::string_view to_string(StepSchedule::Kind kind);
StepSchedule::Kind schedule_kind_from_string(std::string_view name);

struct Domain {
  enum class Kind { kUnconstrained, kBall };
  Kind kind = Kind::kUnconstrained;
  double radius = 0.0;

  static Domain unconstrained() { return {}; }
  static Domain ball(double radius);
  bool contains(const Vector& w, double tol = 0.0) const;
};

Vector project(const Domain& domain, const Vector& w);
void project_in_place(const Domain& domain, Vector& w);

struct Regularizer {
  enum class Kind { kNone, kL2, kL1 };
  Kind kind = Kind::kNone;
  double lambda = 0.0;

  static Regularizer none() { return {}; }
  static Regularizer l2(double lambda);
  static Regularizer l1(double lambda);
};

std::string_view to_string(Regularizer::Kind kind);
Regularizer::Kind regularizer_kind_from_string(std::string_view name);

// prox of eta * r evaluated at v.
Vector prox(const Regularizer& reg, double eta, const Vector& v);

struct RunOptions {
  // Keep w_t for t = 1, 1 + k, 1 + 2k, ... (0 keeps none).
  std::uint64_t record_every = 0;
  // f(w_t; z_{i_t}) for every step.
  bool record_step_losses = true;
  // Full empirical risk F_S(w_t) for t = 1..T, evaluated at no more than
  // this many checkpoints (0 disables). Between checkpoints the larger of
  // the two neighbouring values is used.
  std::size_t risk_checkpoints = 0;
};

inline constexpr std::size_t kDefaultRiskCheckpoints = 512;

struct Trajectory {
  std::vector<Vector> iterates;
  std::vector<std::uint64_t> iterate_steps;
  Vector final;       // w_{T+1}
  Vector avg_eta;     // sum eta_t w_t / sum eta_t
  Vector avg_linear;  // sum (t + t0 - 1) w_t / sum (t + t0 - 1)
  std::vector<double> per_step_risk;
  std::vector<double> full_risk;  // F_S(w_t), t = 1..T
  std::uint64_t index_sequence_seed = 0;
  std::uint64_t steps = 0;
};

enum class OutputKind { kFinal, kAvgEta, kAvgLinear };
std::string_view to_string(OutputKind kind);
OutputKind output_kind_from_string(std::string_view name);
const Vector& select_output(const Trajectory& traj, OutputKind kind);
// avg-linear for strongly convex schedules, avg-eta otherwise.
OutputKind default_output(const StepSchedule& sched);

// Projected SGD from w_1 = 0 with indices drawn uniformly with replacement
// from the stream seeded by rng_seed.
Trajectory sgd_run(const LossSpec& loss, const Dataset& S,
                   const StepSchedule& sched, const Domain& dom,
                   std::uint64_t T, std::uint64_t rng_seed,
                   const RunOptions& opts = {});

// Same recursion with a caller-supplied index sequence (0-based).
Trajectory sgd_run_indices(const LossSpec& loss, const Dataset& S,
                           const StepSchedule& sched, const Domain& dom,
                           std::span<const std::size_t> indices,
                           const RunOptions& opts = {});

// Proximal SGD, unconstrained. Regularizer none reproduces sgd_run on the
// unconstrained domain bit for bit.
Trajectory spgd_run(const LossSpec& loss, const Regularizer& reg,
                    const Dataset& S, const StepSchedule& sched,
                    std::uint64_t T, std::uint64_t rng_seed,
                    const RunOptions& opts = {});

// K epochs, each over a fresh permutation; step sizes follow the global step
// counter (k - 1) n + t.
Trajectory sgd_without_replacement_run(const LossSpec& loss, const Dataset& S,
                                       const StepSchedule& sched,
                                       std::uint64_t K, std::uint64_t rng_seed,
                                       const RunOptions& opts = {});

// Same, with caller-supplied permutations (one per epoch, 0-based).
Trajectory sgd_permutations_run(const LossSpec& loss, const Dataset& S,
                                const StepSchedule& sched,
                                std::span<const std::vector<std::size_t>> perms,
                                const RunOptions& opts = {});

// ceil(4 L^2 / sigma^2).
std::uint64_t t0_for_strong_convexity(double L, double sigma);

}  // namespace stablab

#endif  // STABLAB_OPTIM_HPP_
