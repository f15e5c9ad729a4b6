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

#ifndef STABLAB_STABILITY_HPP_
#define STABLAB_STABILITY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stablab/data.hpp"
#include "stablab/optim.hpp"

namespace stablab {

// Mean and standard error of a replicate-level sample.
struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

// Pairwise-summed mean and sample standard error (0 for a single value).
MeanStderr mean_stderr(const std::vector<double>& values);

struct CouplingConfig {
  std::size_t replicates = 100;
  // Neighbors per replicate; 0 means all n.
  std::size_t neighbor_subsample = 0;
  bool record_risks = true;
  std::size_t risk_checkpoints = kDefaultRiskCheckpoints;
  std::size_t threads = 1;
  OutputKind output = OutputKind::kFinal;
  // Monte Carlo samples for F(A(S)) when no closed form exists (0 skips the
  // population statistics in that case).
  std::size_t mc_pop = 0;
  // Test hook: use S itself as the ghost sample.
  bool ghost_equals_base = false;

  void validate(std::size_t n) const;
};

struct StabilityReport {
  double l1_mean = 0.0;
  double l1_stderr = 0.0;
  double l2_sq_mean = 0.0;
  double l2_sq_stderr = 0.0;

  // Per step t = 1..T of the base trajectories: E F_S(w_t), E sqrt(F_S(w_t))
  // and E F_S(w_t)^risk_exponent with their standard errors.
  std::vector<double> risk_path;
  std::vector<double> risk_path_stderr;
  std::vector<double> sqrt_risk_path;
  std::vector<double> sqrt_risk_path_stderr;
  std::vector<double> frac_risk_path;
  std::vector<double> frac_risk_path_stderr;
  double risk_exponent = 1.0;  // 2 alpha / (1 + alpha)

  // Statistics of the output A(S) on the base sample.
  MeanStderr emp_risk;   // F_S(A(S))
  bool has_population = false;
  MeanStderr pop_risk;   // F(A(S))
  MeanStderr gap;        // F(A(S)) - F_S(A(S))
  MeanStderr pop_frac;   // F(A(S))^risk_exponent

  std::size_t n = 0;
  std::uint64_t T = 0;
  std::size_t replicates = 0;
  std::size_t neighbor_subsample = 0;
  OutputKind output = OutputKind::kFinal;
};

struct CoupledPair {
  Vector w_final;
  Vector w_i_final;
  std::vector<double> base_risks;
};

// Samples S and its ghost from seeds derived from master_seed and runs SGD on
// S and on S^(i) (i is 1-based) with one shared index sequence.
CoupledPair coupled_pair_run(const LossSpec& loss, const Distribution& dist,
                             std::size_t n, std::uint64_t T,
                             const StepSchedule& sched, const Domain& dom,
                             std::size_t i, std::uint64_t master_seed,
                             bool ghost_equals_base = false);

// Monte Carlo estimate of the l1 / l2 on-average model stability over fresh
// (S, S~, index sequence) per replicate.
StabilityReport estimate_on_average_stability(const LossSpec& loss,
                                              const Distribution& dist,
                                              std::size_t n, std::uint64_t T,
                                              const StepSchedule& sched,
                                              const Domain& dom,
                                              const CouplingConfig& cfg,
                                              std::uint64_t master_seed);

// Same estimator for one fixed pair (S, S~); only the index sequence varies.
// Population statistics are not available here.
StabilityReport estimate_on_average_stability_fixed(
    const LossSpec& loss, const Dataset& S, const Dataset& S_tilde,
    std::uint64_t T, const StepSchedule& sched, const Domain& dom,
    const CouplingConfig& cfg, std::uint64_t master_seed);

struct ExactStability {
  double l1 = 0.0;
  double l2_sq = 0.0;
};

inline constexpr double kMaxEnumeration = 1e6;

// Exact expectation over all n^T index sequences for fixed (S, S~).
ExactStability brute_force_stability(const LossSpec& loss, const Dataset& S,
                                     const Dataset& S_tilde, std::uint64_t T,
                                     const StepSchedule& sched,
                                     const Domain& dom);

// max over eval_points of |E_A[f(A(S); z) - f(A(S~); z)]| with E_A over
// `replicates` shared index sequences. A lower bound on uniform stability.
double uniform_stability_proxy(const LossSpec& loss, const Dataset& S,
                               const Dataset& S_tilde, std::uint64_t T,
                               const StepSchedule& sched, const Domain& dom,
                               const std::vector<Example>& eval_points,
                               std::size_t replicates, std::uint64_t seed,
                               std::size_t threads = 1);

// ||A(S) - A(S~)|| for `count` index sequences seeded from master_seed.
std::vector<double> coupled_distances(const LossSpec& loss, const Dataset& S,
                                      const Dataset& S_tilde, std::uint64_t T,
                                      const StepSchedule& sched,
                                      const Domain& dom, std::size_t count,
                                      std::uint64_t master_seed,
                                      std::size_t threads = 1);

struct GapConfig {
  std::size_t replicates = 100;
  std::size_t mc_pop = 0;
  std::size_t threads = 1;
  std::optional<OutputKind> output;  // default_output(sched) when empty
  // Test hook: evaluate this model instead of the SGD output.
  std::optional<Vector> fixed_output;
};

struct GapReport {
  MeanStderr gap;     // F(A(S)) - F_S(A(S))
  bool has_excess = false;
  MeanStderr excess;  // F(A(S)) - inf F
  MeanStderr emp_risk;
  MeanStderr pop_risk;
  OutputKind output = OutputKind::kFinal;
};

GapReport estimate_generalization_gap(const LossSpec& loss,
                                      const Distribution& dist, std::size_t n,
                                      std::uint64_t T, const StepSchedule& sched,
                                      const Domain& dom, const GapConfig& cfg,
                                      std::uint64_t master_seed);

// Coupled without-replacement runs sharing the permutation of every epoch;
// reports statistics of ||w_1^{K+1} - w~_1^{K+1}||.
StabilityReport estimate_epoch_stability_without_replacement(
    const LossSpec& loss, const Distribution& dist, std::size_t n,
    std::uint64_t K, const StepSchedule& sched, const CouplingConfig& cfg,
    std::uint64_t master_seed);

StabilityReport estimate_epoch_stability_fixed(const LossSpec& loss,
                                               const Dataset& S,
                                               const Dataset& S_tilde,
                                               std::uint64_t K,
                                               const StepSchedule& sched,
                                               const CouplingConfig& cfg,
                                               std::uint64_t master_seed);

}  // namespace stablab

#endif  // STABLAB_STABILITY_HPP_
