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

// Runs the shipped experiment configs and prints one PASS/FAIL line per
// acceptance criterion. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stablab/config.hpp"
#include "stablab/data.hpp"
#include "stablab/harness.hpp"
#include "stablab/optim.hpp"
#include "stablab/seeding.hpp"
#include "stablab/stability.hpp"

using namespace stablab;

namespace {

struct Run {
  ExperimentConfig cfg;
  ExperimentResult result;
  double seconds = 0.0;
  std::string error;
};

Run run_config(const std::string& stem, std::size_t threads) {
  Run r;
  const auto start = std::chrono::steady_clock::now();
  try {
    r.cfg = load_config(std::string(STABLAB_CONFIG_DIR) + "/" + stem + ".ini");
    r.cfg.threads = threads;
    r.result = run_experiment(r.cfg);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Every gate row whose metric starts with one of the prefixes passed, and
// each prefix matched at least `min_rows` gate rows.
bool gates_pass(const Run& r, const std::vector<std::string>& prefixes,
                std::size_t min_rows, std::string& why) {
  if (!r.error.empty()) {
    why = r.error;
    return false;
  }
  for (const auto& p : prefixes) {
    std::size_t seen = 0;
    for (const auto& row : r.result.rows) {
      if (row.metric.rfind(p, 0) != 0 || !row.satisfied) continue;
      ++seen;
      if (!*row.satisfied) {
        why = row.metric + " failed at n = " + std::to_string(row.n) + ": " +
              std::to_string(row.value) + " vs " +
              std::to_string(row.bound_rhs.value_or(0.0));
        return false;
      }
    }
    if (seen < min_rows) {
      why = "expected " + std::to_string(min_rows) + " gate rows for " + p + ", found " +
            std::to_string(seen);
      return false;
    }
  }
  return true;
}

const CsvRow* find_row(const Run& r, const std::string& metric) {
  for (const auto& row : r.result.rows) {
    if (row.metric == metric) return &row;
  }
  return nullptr;
}

bool expect(bool cond, const std::string& what, std::string& why) {
  if (!cond && why.empty()) why = "config mismatch: " + what;
  return cond;
}

// Final iterates of least squares SGD for every index sequence, by direct
// recursion rather than the library runner.
void enumerate(const Dataset& S, const Dataset& St, std::size_t T, const StepSchedule& sched,
               std::vector<std::size_t>& seq, double& l1, double& l2) {
  const std::size_t n = S.size();
  if (seq.size() == T) {
    auto final_of = [&](std::size_t replaced) {
      Vector w = Vector::Zero(static_cast<Eigen::Index>(S.dim()));
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t i = seq[t];
        const Example& z = (i == replaced) ? St[i] : S[i];
        w = w - sched.eta(t + 1) * (w.dot(z.x) - z.y) * z.x;
      }
      return w;
    };
    const Vector base = final_of(n);
    const double weight = std::pow(static_cast<double>(n), -static_cast<double>(T)) / n;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (base - final_of(i)).norm();
      l1 += weight * d;
      l2 += weight * d * d;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    seq.push_back(i);
    enumerate(S, St, T, sched, seq, l1, l2);
    seq.pop_back();
  }
}

bool hand_enumeration_matches(const ExperimentConfig& cfg, std::string& why) {
  const Distribution dist = build_distribution(cfg.distribution);
  const LossSpec loss = build_loss(cfg.loss, dist);
  if (loss.kind != LossKind::kLeastSquares) {
    why = "hand enumeration covers least squares only";
    return false;
  }
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const Dataset S = sample_dataset(dist, n, derive_seed(cfg.seed, seed_tag::kBaseSample, n));
    const Dataset St = sample_dataset(dist, n, derive_seed(cfg.seed, seed_tag::kGhostSample, n));
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    const ExactStability lib =
        brute_force_stability(loss, S, St, T, sched, build_domain(cfg.sweep));
    double l1 = 0.0;
    double l2 = 0.0;
    std::vector<std::size_t> seq;
    enumerate(S, St, T, sched, seq, l1, l2);
    const double e1 = std::abs(lib.l1 - l1) / std::max(1.0, std::abs(l1));
    const double e2 = std::abs(lib.l2_sq - l2) / std::max(1.0, std::abs(l2));
    if (e1 > 1e-12 || e2 > 1e-12) {
      why = "enumeration mismatch at n = " + std::to_string(n);
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  const std::vector<std::string> stems = {
      "properties",      "oracle",       "bound_smooth",    "bound_nonsmooth",
      "rate_realizable", "rate_noisy",   "rate_hinge",      "bound_auc",
      "bound_strong_ls", "bound_erm",    "bound_extensions"};
  std::map<std::string, Run> runs;
  for (const auto& s : stems) runs[s] = run_config(s, 1);

  int failed = 0;
  auto report = [&](int id, bool ok, double seconds, double limit, const std::string& what,
                    std::string why) {
    if (ok && seconds > limit) {
      ok = false;
      why = "runtime " + std::to_string(seconds) + " s exceeds " + std::to_string(limit) + " s";
    }
    if (!ok) ++failed;
    std::printf("Criterion %d [PRIMARY]: %s  %s (%.2f s)%s%s\n", id, ok ? "PASS" : "FAIL",
                what.c_str(), seconds, why.empty() ? "" : ": ", why.c_str());
    std::fflush(stdout);
  };

  {
    const Run& r = runs["properties"];
    std::string why;
    bool ok = expect(r.cfg.sweep.checks >= 10000, "checks >= 10000", why);
    ok = ok && gates_pass(r, {"self-bounding/", "cocoercivity/", "nonexpansive/",
                              "expansiveness-slack/", "smoothness-upper-bound/",
                              "monotonicity/"}, 1, why);
    for (const auto& row : r.result.rows) {
      if (ok && row.satisfied && row.value != 1.0) {
        ok = false;
        why = row.metric + " pass fraction " + std::to_string(row.value);
      }
    }
    report(1, ok, r.seconds, 10.0, "inequality suites on seeded random draws", why);
  }
  {
    const Run& r = runs["oracle"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{2, 3}, "n_grid 2, 3", why) &&
              expect(r.cfg.replicates == 10000, "R = 10000", why) &&
              expect(r.cfg.sweep.T_rule == "equal_n", "T = n", why);
    ok = ok && gates_pass(r, {"l1_stability_vs_enumeration", "l2_sq_stability_vs_enumeration"},
                          2, why);
    const auto start = std::chrono::steady_clock::now();
    ok = ok && hand_enumeration_matches(r.cfg, why);
    const double extra =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(2, ok, r.seconds + extra, 30.0, "Monte Carlo and hand enumeration agree with brute force",
           why);
  }
  {
    const Run& r = runs["bound_smooth"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{64, 256}, "n_grid 64, 256", why) &&
              expect(r.cfg.replicates == 200, "R = 200", why) &&
              expect(r.cfg.schedule.eta1 == 0.25 && r.cfg.schedule.relative_to_L, "eta = 1/(4L)", why);
    ok = ok && gates_pass(r, {"l1_stability", "l2_sq_stability"}, 2, why);
    report(3, ok, r.seconds, 300.0, "smooth stability bounds", why);
  }
  {
    const Run& r = runs["bound_nonsmooth"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{64}, "n = 64", why) &&
              expect(r.cfg.replicates == 200, "R = 200", why) &&
              expect(r.cfg.loss.q == 1.0, "hinge q = 1", why) &&
              expect(r.cfg.schedule.theta == 0.75, "theta = 3/4", why);
    ok = ok && gates_pass(r, {"l2_sq_stability"}, 1, why);
    report(4, ok, r.seconds, 300.0, "non-smooth stability bound", why);
  }
  {
    std::string why;
    bool ok = gates_pass(runs["bound_smooth"], {"generalization_gap"}, 2, why) &&
              gates_pass(runs["bound_nonsmooth"], {"generalization_gap"}, 1, why);
    report(5, ok, runs["bound_smooth"].seconds + runs["bound_nonsmooth"].seconds, 600.0,
           "generalization gap below the stability-based bounds", why);
  }
  const std::vector<std::size_t> rate_grid = {128, 256, 512, 1024, 2048, 4096};
  auto rate = [&](int id, const std::string& stem, const std::vector<std::size_t>& grid,
                  double slope_max, double limit, const std::string& what) {
    const Run& r = runs[stem];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == grid, "n_grid", why) &&
              expect(r.cfg.sweep.slope_max && *r.cfg.sweep.slope_max <= slope_max,
                     "slope gate", why);
    ok = ok && gates_pass(r, {"slope"}, 1, why);
    std::string label = what;
    if (const CsvRow* s = find_row(r, "slope")) {
      char buf[64];
      std::snprintf(buf, sizeof buf, ", slope %.3f", s->value);
      label += buf;
    }
    report(id, ok, r.seconds, limit, label, why);
  };
  rate(6, "rate_realizable", rate_grid, -0.6, 900.0, "realizable least squares rate");
  rate(7, "rate_noisy", rate_grid, -0.35, 900.0, "noisy least squares rate");
  rate(8, "rate_hinge", {32, 64, 128, 256}, -0.3, 1200.0, "hinge rate with T = n^2");
  {
    const Run& r = runs["bound_auc"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{64}, "n = 64", why) &&
              expect(r.cfg.schedule.theta == 0.6, "theta = 0.6", why);
    ok = ok && gates_pass(r, {"l1_stability", "rms_stability", "auc_surrogate_unbiased"}, 1, why);
    report(9, ok, r.seconds, 300.0, "relaxed convexity on the AUC surrogate", why);
  }
  {
    const Run& r = runs["bound_strong_ls"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{128}, "n = 128", why) &&
              expect(r.cfg.sweep.domain == "ball", "ball domain", why) &&
              expect(!r.cfg.schedule.sigma && !r.cfg.schedule.t0, "sigma and t0 from the data", why);
    ok = ok && gates_pass(r, {"zero_neighbor_stability"}, 1, why);
    report(10, ok, r.seconds, 300.0, "relaxed strong convexity for least squares", why);
  }
  {
    const Run& r = runs["bound_erm"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{64, 256}, "n_grid 64, 256", why) &&
              expect(r.cfg.replicates == 500, "R = 500", why);
    ok = ok && gates_pass(r, {"erm_generalization_gap"}, 2, why);
    report(11, ok, r.seconds, 120.0, "ridge ERM generalization bound", why);
  }
  {
    const Run& r = runs["bound_extensions"];
    std::string why;
    bool ok = expect(r.cfg.sweep.n_grid == std::vector<std::size_t>{32}, "n = 32", why) &&
              expect(r.cfg.sweep.K == 4, "K = 4", why) &&
              expect(r.cfg.sweep.hp_seeds >= 1000, "1000 seeds", why) &&
              expect(r.cfg.sweep.delta == 0.1, "delta = 0.1", why);
    ok = ok && gates_pass(r, {"spgd_none_equals_sgd", "without_replacement_stability",
                              "high_prob_exceedance_fraction"}, 1, why);
    report(12, ok, r.seconds, 600.0, "proximal, without-replacement and high-probability checks",
           why);
  }
  {
    std::string why;
    bool ok = true;
    double seconds = 0.0;
    for (const auto& s : stems) {
      const Run four = run_config(s, 4);
      seconds += four.seconds;
      if (!four.error.empty() || four.result.csv() != runs[s].result.csv()) {
        ok = false;
        why = s + " differs between 1 and 4 threads";
        break;
      }
    }
    report(13, ok, seconds, 7200.0, "identical CSV for 1 and 4 threads", why);
  }

  std::printf("%d of 13 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
