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

#include "stablab/stability.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "parallel.hpp"
#include "stablab/errors.hpp"
#include "stablab/seeding.hpp"

namespace stablab {
namespace {

using Runner = std::function<Trajectory(const Dataset&, std::uint64_t,
                                        const RunOptions&)>;

struct ReplicateOut {
  double l1 = 0.0;
  double l2 = 0.0;
  std::vector<double> risk;
  double emp = 0.0;
  double pop = 0.0;
};

double frac_power(double f, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(std::max(f, 0.0), exponent);
}

double risk_exponent(const LossSpec& loss) {
  return 2.0 * loss.alpha / (1.0 + loss.alpha);
}

std::vector<std::size_t> all_positions(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

std::vector<std::size_t> pick_neighbors(const CouplingConfig& cfg, std::size_t n,
                                        std::uint64_t seed) {
  const std::size_t m = cfg.neighbor_subsample == 0 ? n : cfg.neighbor_subsample;
  if (m >= n) return all_positions(n);
  return sample_without_replacement(seed, n, m);
}

ReplicateOut run_replicate(const LossSpec& loss, const Dataset& S,
                           const Dataset& S_tilde,
                           const std::vector<std::size_t>& picks,
                           std::uint64_t index_seed, const Runner& run,
                           const CouplingConfig& cfg, const Distribution* dist,
                           std::uint64_t pop_seed) {
  RunOptions base_opts;
  base_opts.record_step_losses = false;
  base_opts.risk_checkpoints = cfg.record_risks ? cfg.risk_checkpoints : 0;
  RunOptions lite;
  lite.record_step_losses = false;

  ReplicateOut out;
  Trajectory base = run(S, index_seed, base_opts);
  const Vector& a = select_output(base, cfg.output);
  std::vector<double> d1(picks.size());
  std::vector<double> d2(picks.size());
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const std::size_t i = picks[k];
    const Dataset nb = S.with_replacement(i, S_tilde[i]);
    const Trajectory tr = run(nb, index_seed, lite);
    const double dist_sq = (a - select_output(tr, cfg.output)).squaredNorm();
    d2[k] = dist_sq;
    d1[k] = std::sqrt(dist_sq);
  }
  const auto m = static_cast<double>(picks.size());
  out.l1 = pairwise_sum(d1) / m;
  out.l2 = pairwise_sum(d2) / m;
  out.risk = std::move(base.full_risk);
  out.emp = empirical_risk(loss, S, a);
  if (dist != nullptr) {
    out.pop = population_risk(loss, *dist, a, cfg.mc_pop, pop_seed).value;
  }
  return out;
}

void fill_report(StabilityReport& rep, const std::vector<ReplicateOut>& outs,
                 bool with_population) {
  const std::size_t R = outs.size();
  std::vector<double> col(R);
  auto stat = [&](auto&& get) {
    for (std::size_t r = 0; r < R; ++r) col[r] = get(outs[r]);
    return mean_stderr(col);
  };
  const MeanStderr l1 = stat([](const ReplicateOut& o) { return o.l1; });
  const MeanStderr l2 = stat([](const ReplicateOut& o) { return o.l2; });
  rep.l1_mean = l1.mean;
  rep.l1_stderr = l1.std_error;
  rep.l2_sq_mean = l2.mean;
  rep.l2_sq_stderr = l2.std_error;
  rep.emp_risk = stat([](const ReplicateOut& o) { return o.emp; });
  rep.has_population = with_population;
  if (with_population) {
    const double e = rep.risk_exponent;
    rep.pop_risk = stat([](const ReplicateOut& o) { return o.pop; });
    rep.gap = stat([](const ReplicateOut& o) { return o.pop - o.emp; });
    rep.pop_frac = stat([e](const ReplicateOut& o) { return frac_power(o.pop, e); });
  }
  const std::size_t steps = R > 0 ? outs[0].risk.size() : 0;
  const double e = rep.risk_exponent;
  for (std::size_t t = 0; t < steps; ++t) {
    const MeanStderr f = stat([t](const ReplicateOut& o) { return o.risk[t]; });
    const MeanStderr s =
        stat([t](const ReplicateOut& o) { return std::sqrt(std::max(o.risk[t], 0.0)); });
    const MeanStderr p =
        stat([t, e](const ReplicateOut& o) { return frac_power(o.risk[t], e); });
    rep.risk_path.push_back(f.mean);
    rep.risk_path_stderr.push_back(f.std_error);
    rep.sqrt_risk_path.push_back(s.mean);
    rep.sqrt_risk_path_stderr.push_back(s.std_error);
    rep.frac_risk_path.push_back(p.mean);
    rep.frac_risk_path_stderr.push_back(p.std_error);
  }
}

void check_pair(const Dataset& S, const Dataset& S_tilde) {
  if (S.empty()) throw InvalidArgument("empty dataset");
  if (S_tilde.size() != S.size() || S_tilde.dim() != S.dim()) {
    throw InvalidArgument("S and S~ must have equal size and dimension");
  }
}

bool same_example(const Example& a, const Example& b) {
  return a.y == b.y && a.x == b.x;
}

StabilityReport distribution_estimator(const LossSpec& loss,
                                       const Distribution& dist, std::size_t n,
                                       std::uint64_t steps,
                                       const CouplingConfig& cfg,
                                       std::uint64_t master_seed,
                                       const Runner& run) {
  cfg.validate(n);
  dist.validate();
  const bool with_pop = cfg.mc_pop > 0 || has_closed_form_risk(loss, dist);
  std::vector<ReplicateOut> outs(cfg.replicates);
  detail::parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const std::uint64_t rep = derive_seed(master_seed, seed_tag::kReplicate, r);
    NeighborFamily fam = make_neighbor_family(dist, n, rep);
    if (cfg.ghost_equals_base) fam.ghost = fam.base;
    const auto picks =
        pick_neighbors(cfg, n, derive_seed(rep, seed_tag::kNeighborPick));
    outs[r] = run_replicate(loss, fam.base, fam.ghost, picks,
                            derive_seed(rep, seed_tag::kIndexStream), run, cfg,
                            with_pop ? &dist : nullptr,
                            derive_seed(rep, seed_tag::kPopulation));
  });
  StabilityReport rep;
  rep.risk_exponent = risk_exponent(loss);
  rep.n = n;
  rep.T = steps;
  rep.replicates = cfg.replicates;
  rep.neighbor_subsample = cfg.neighbor_subsample == 0 ? n : std::min(n, cfg.neighbor_subsample);
  rep.output = cfg.output;
  fill_report(rep, outs, with_pop);
  return rep;
}

StabilityReport fixed_estimator(const LossSpec& loss, const Dataset& S,
                                const Dataset& S_tilde, std::uint64_t steps,
                                const CouplingConfig& cfg,
                                std::uint64_t master_seed, const Runner& run) {
  check_pair(S, S_tilde);
  const std::size_t n = S.size();
  cfg.validate(n);
  const Dataset& ghost = cfg.ghost_equals_base ? S : S_tilde;
  std::vector<ReplicateOut> outs(cfg.replicates);
  detail::parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const std::uint64_t rep = derive_seed(master_seed, seed_tag::kReplicate, r);
    const auto picks =
        pick_neighbors(cfg, n, derive_seed(rep, seed_tag::kNeighborPick));
    outs[r] = run_replicate(loss, S, ghost, picks,
                            derive_seed(rep, seed_tag::kIndexStream), run, cfg,
                            nullptr, 0);
  });
  StabilityReport rep;
  rep.risk_exponent = risk_exponent(loss);
  rep.n = n;
  rep.T = steps;
  rep.replicates = cfg.replicates;
  rep.neighbor_subsample = cfg.neighbor_subsample == 0 ? n : std::min(n, cfg.neighbor_subsample);
  rep.output = cfg.output;
  fill_report(rep, outs, false);
  return rep;
}

Runner with_replacement_runner(const LossSpec& loss, const StepSchedule& sched,
                               const Domain& dom, std::uint64_t T) {
  return [&loss, sched, dom, T](const Dataset& D, std::uint64_t seed,
                                const RunOptions& opts) {
    return sgd_run(loss, D, sched, dom, T, seed, opts);
  };
}

Runner epoch_runner(const LossSpec& loss, const StepSchedule& sched,
                    std::uint64_t K) {
  return [&loss, sched, K](const Dataset& D, std::uint64_t seed,
                           const RunOptions& opts) {
    return sgd_without_replacement_run(loss, D, sched, K, seed, opts);
  };
}

}  // namespace

MeanStderr mean_stderr(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("mean of an empty sample");
  const auto m = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / m;
  if (values.size() < 2) return {mean, 0.0};
  std::vector<double> sq(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    sq[k] = (values[k] - mean) * (values[k] - mean);
  }
  return {mean, std::sqrt(pairwise_sum(sq) / (m - 1.0) / m)};
}

void CouplingConfig::validate(std::size_t n) const {
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (neighbor_subsample > n) {
    throw InvalidArgument("neighbor subsample exceeds n");
  }
}

CoupledPair coupled_pair_run(const LossSpec& loss, const Distribution& dist,
                             std::size_t n, std::uint64_t T,
                             const StepSchedule& sched, const Domain& dom,
                             std::size_t i, std::uint64_t master_seed,
                             bool ghost_equals_base) {
  NeighborFamily fam = make_neighbor_family(dist, n, master_seed);
  if (ghost_equals_base) fam.ghost = fam.base;
  const Dataset nb = neighbor(fam, i);
  const std::uint64_t seed = derive_seed(master_seed, seed_tag::kIndexStream);
  RunOptions opts;
  Trajectory a = sgd_run(loss, fam.base, sched, dom, T, seed, opts);
  opts.record_step_losses = false;
  Trajectory b = sgd_run(loss, nb, sched, dom, T, seed, opts);
  return {std::move(a.final), std::move(b.final), std::move(a.per_step_risk)};
}

StabilityReport estimate_on_average_stability(const LossSpec& loss,
                                              const Distribution& dist,
                                              std::size_t n, std::uint64_t T,
                                              const StepSchedule& sched,
                                              const Domain& dom,
                                              const CouplingConfig& cfg,
                                              std::uint64_t master_seed) {
  sched.check_horizon(T);
  return distribution_estimator(loss, dist, n, T, cfg, master_seed,
                                with_replacement_runner(loss, sched, dom, T));
}

StabilityReport estimate_on_average_stability_fixed(
    const LossSpec& loss, const Dataset& S, const Dataset& S_tilde,
    std::uint64_t T, const StepSchedule& sched, const Domain& dom,
    const CouplingConfig& cfg, std::uint64_t master_seed) {
  sched.check_horizon(T);
  return fixed_estimator(loss, S, S_tilde, T, cfg, master_seed,
                         with_replacement_runner(loss, sched, dom, T));
}

ExactStability brute_force_stability(const LossSpec& loss, const Dataset& S,
                                     const Dataset& S_tilde, std::uint64_t T,
                                     const StepSchedule& sched,
                                     const Domain& dom) {
  check_pair(S, S_tilde);
  const std::size_t n = S.size();
  double count = 1.0;
  for (std::uint64_t t = 0; t < T; ++t) {
    count *= static_cast<double>(n);
    if (count > kMaxEnumeration) {
      throw ResourceLimit("n^T = " + std::to_string(n) + "^" + std::to_string(T) +
                          " exceeds the enumeration limit of 1e6 sequences");
    }
  }
  std::vector<Dataset> neighbors;
  neighbors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors.push_back(S.with_replacement(i, S_tilde[i]));
  }
  RunOptions opts;
  opts.record_step_losses = false;
  const auto total = static_cast<std::size_t>(count);
  std::vector<double> l1(total);
  std::vector<double> l2(total);
  std::vector<std::size_t> seq(T, 0);
  std::vector<double> d1(n);
  std::vector<double> d2(n);
  for (std::size_t s = 0; s < total; ++s) {
    const Trajectory base = sgd_run_indices(loss, S, sched, dom, seq, opts);
    for (std::size_t i = 0; i < n; ++i) {
      const Trajectory tr = sgd_run_indices(loss, neighbors[i], sched, dom, seq, opts);
      d2[i] = (base.final - tr.final).squaredNorm();
      d1[i] = std::sqrt(d2[i]);
    }
    l1[s] = pairwise_sum(d1) / static_cast<double>(n);
    l2[s] = pairwise_sum(d2) / static_cast<double>(n);
    // Odometer over {0..n-1}^T, last position fastest.
    for (std::size_t k = T; k-- > 0;) {
      if (++seq[k] < n) break;
      seq[k] = 0;
    }
  }
  return {pairwise_sum(l1) / count, pairwise_sum(l2) / count};
}

double uniform_stability_proxy(const LossSpec& loss, const Dataset& S,
                               const Dataset& S_tilde, std::uint64_t T,
                               const StepSchedule& sched, const Domain& dom,
                               const std::vector<Example>& eval_points,
                               std::size_t replicates, std::uint64_t seed,
                               std::size_t threads) {
  check_pair(S, S_tilde);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (!same_example(S[i], S_tilde[i])) ++differing;
  }
  if (differing > 1) {
    throw InvalidArgument("S and S~ differ in " + std::to_string(differing) +
                          " positions; uniform stability needs at most one");
  }
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  if (eval_points.empty()) {
    std::fprintf(stderr,
                 "warning: uniform stability proxy over an empty evaluation "
                 "set is 0 by convention\n");
    return 0.0;
  }
  // Per replicate, the loss difference at every evaluation point.
  std::vector<std::vector<double>> diffs(replicates);
  RunOptions opts;
  opts.record_step_losses = false;
  detail::parallel_for(replicates, threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, seed_tag::kIndexStream, r);
    const Trajectory a = sgd_run(loss, S, sched, dom, T, s, opts);
    const Trajectory b = sgd_run(loss, S_tilde, sched, dom, T, s, opts);
    auto& row = diffs[r];
    row.resize(eval_points.size());
    for (std::size_t k = 0; k < eval_points.size(); ++k) {
      row[k] = loss_value(loss, a.final, eval_points[k]) -
               loss_value(loss, b.final, eval_points[k]);
    }
  });
  double best = 0.0;
  std::vector<double> col(replicates);
  for (std::size_t k = 0; k < eval_points.size(); ++k) {
    for (std::size_t r = 0; r < replicates; ++r) col[r] = diffs[r][k];
    best = std::max(best, std::abs(pairwise_sum(col) / static_cast<double>(replicates)));
  }
  return best;
}

std::vector<double> coupled_distances(const LossSpec& loss, const Dataset& S,
                                      const Dataset& S_tilde, std::uint64_t T,
                                      const StepSchedule& sched,
                                      const Domain& dom, std::size_t count,
                                      std::uint64_t master_seed,
                                      std::size_t threads) {
  check_pair(S, S_tilde);
  std::vector<double> out(count);
  RunOptions opts;
  opts.record_step_losses = false;
  detail::parallel_for(count, threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(master_seed, seed_tag::kIndexStream, r);
    const Trajectory a = sgd_run(loss, S, sched, dom, T, s, opts);
    const Trajectory b = sgd_run(loss, S_tilde, sched, dom, T, s, opts);
    out[r] = (a.final - b.final).norm();
  });
  return out;
}

GapReport estimate_generalization_gap(const LossSpec& loss,
                                      const Distribution& dist, std::size_t n,
                                      std::uint64_t T, const StepSchedule& sched,
                                      const Domain& dom, const GapConfig& cfg,
                                      std::uint64_t master_seed) {
  if (cfg.replicates < 2) throw InvalidArgument("replicates must be >= 2");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  sched.check_horizon(T);
  dist.validate();
  if (!has_closed_form_risk(loss, dist) && cfg.mc_pop == 0) {
    throw InvalidArgument("population risk needs Monte Carlo samples (mc_pop)");
  }
  GapReport rep;
  rep.output = cfg.output.value_or(default_output(sched));
  std::optional<double> opt;
  try {
    opt = optimal_risk(loss, dist).value;
  } catch (const InvalidArgument&) {
  }
  std::vector<double> emp(cfg.replicates);
  std::vector<double> pop(cfg.replicates);
  RunOptions opts;
  opts.record_step_losses = false;
  detail::parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(master_seed, seed_tag::kReplicate, r);
    const Dataset S =
        sample_dataset(dist, n, derive_seed(rep_seed, seed_tag::kBaseSample));
    Vector w;
    if (cfg.fixed_output) {
      w = *cfg.fixed_output;
    } else {
      const Trajectory tr = sgd_run(loss, S, sched, dom, T,
                                    derive_seed(rep_seed, seed_tag::kIndexStream), opts);
      w = select_output(tr, rep.output);
    }
    emp[r] = empirical_risk(loss, S, w);
    pop[r] = population_risk(loss, dist, w, cfg.mc_pop,
                             derive_seed(rep_seed, seed_tag::kPopulation))
                 .value;
  });
  std::vector<double> gap(cfg.replicates);
  for (std::size_t r = 0; r < cfg.replicates; ++r) gap[r] = pop[r] - emp[r];
  rep.gap = mean_stderr(gap);
  rep.emp_risk = mean_stderr(emp);
  rep.pop_risk = mean_stderr(pop);
  if (opt) {
    rep.has_excess = true;
    std::vector<double> ex(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) ex[r] = pop[r] - *opt;
    rep.excess = mean_stderr(ex);
  }
  return rep;
}

StabilityReport estimate_epoch_stability_without_replacement(
    const LossSpec& loss, const Distribution& dist, std::size_t n,
    std::uint64_t K, const StepSchedule& sched, const CouplingConfig& cfg,
    std::uint64_t master_seed) {
  sched.check_horizon(K * n);
  return distribution_estimator(loss, dist, n, K * n, cfg, master_seed,
                                epoch_runner(loss, sched, K));
}

StabilityReport estimate_epoch_stability_fixed(const LossSpec& loss,
                                               const Dataset& S,
                                               const Dataset& S_tilde,
                                               std::uint64_t K,
                                               const StepSchedule& sched,
                                               const CouplingConfig& cfg,
                                               std::uint64_t master_seed) {
  sched.check_horizon(K * S.size());
  return fixed_estimator(loss, S, S_tilde, K * S.size(), cfg, master_seed,
                         epoch_runner(loss, sched, K));
}

}  // namespace stablab
