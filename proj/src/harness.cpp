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

#include "stablab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "parallel.hpp"
#include "stablab/bounds.hpp"
#include "stablab/errors.hpp"
#include "stablab/seeding.hpp"
#include "stablab/stability.hpp"

namespace stablab {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<double> theta_of(const ScheduleConfig& s) {
  if (s.kind == "poly-decay" || s.kind == "horizon-poly") return s.theta;
  return std::nullopt;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[k];
  return out;
}

Vector sized(const std::vector<double>& v, std::size_t d, const Vector& fallback,
             const char* name) {
  if (v.empty()) return fallback;
  if (v.size() != d) {
    throw ConfigError(std::string(name) + " must have dim = " + std::to_string(d) +
                      " entries");
  }
  return to_vector(v);
}

struct Context {
  const ExperimentConfig& cfg;
  ExperimentResult& out;
  std::optional<double> theta;

  void info(const std::string& metric, std::size_t n, std::uint64_t T,
            double value, double se = 0.0) {
    CsvRow r;
    r.metric = metric;
    r.n = n;
    r.T = T;
    r.theta = theta;
    r.value = value;
    r.std_error = se;
    out.rows.push_back(std::move(r));
  }

  void gate(const std::string& metric, std::size_t n, std::uint64_t T,
            double value, double se, double rhs, bool ok) {
    CsvRow r;
    r.metric = metric;
    r.n = n;
    r.T = T;
    r.theta = theta;
    r.value = value;
    r.std_error = se;
    r.bound_rhs = rhs;
    r.satisfied = ok;
    out.rows.push_back(std::move(r));
  }

  void bound(const BoundReport& b, std::size_t n, std::uint64_t T) {
    gate(b.name, n, T, b.measured, b.measured_stderr, b.rhs, b.satisfied);
  }
};

OutputKind stability_output(const ExperimentConfig& cfg) {
  return cfg.sweep.output == "auto" ? OutputKind::kFinal
                                    : output_kind_from_string(cfg.sweep.output);
}

CouplingConfig coupling(const ExperimentConfig& cfg) {
  CouplingConfig c;
  c.replicates = cfg.replicates;
  c.neighbor_subsample = cfg.neighbor_subsample;
  c.threads = cfg.threads;
  c.output = stability_output(cfg);
  c.mc_pop = cfg.sweep.mc_pop;
  return c;
}

// ---------------------------------------------------------------------------
// properties

struct PropertyCase {
  std::string label;
  LossSpec loss;
  bool classification = false;
};

std::string q_label(const char* kind, double q) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s(q=%g)", kind, q);
  return buf;
}

void run_properties(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::size_t d = cfg.distribution.dim;
  const double X = cfg.distribution.feature_bound.value_or(2.0);
  const std::size_t draws = cfg.sweep.checks;
  if (draws == 0) throw ConfigError("checks must be >= 1");

  std::vector<PropertyCase> cases;
  cases.push_back({"least-squares", LossSpec::least_squares(X * X), false});
  for (double q : {1.0, 1.5, 2.0}) {
    cases.push_back({q_label("qnorm-hinge", q), LossSpec::qnorm_hinge(q, X), true});
  }
  for (double q : {1.0, 1.5, 2.0}) {
    cases.push_back(
        {q_label("qpower-absolute", q), LossSpec::qpower_absolute(q, X, 3.0), false});
  }
  {
    std::mt19937_64 gen(derive_seed(cfg.seed, seed_tag::kProperty, 999));
    std::normal_distribution<double> normal;
    Vector a(static_cast<Eigen::Index>(d));
    Vector b(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = normal(gen);
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = normal(gen);
    a *= 0.4 * X / a.norm();
    b *= 0.4 * X / b.norm();
    const double p = cfg.distribution.p;
    cases.push_back({"auc-square", LossSpec::auc_square(p, a, b, X), true});
  }

  enum Check { kSelfBounding, kCocoercivity, kNonexpansive, kExpansiveness, kSmoothness, kMonotonicity, kHolder };
  const char* names[] = {"self-bounding", "cocoercivity", "nonexpansive",
                         "expansiveness-slack", "smoothness-upper-bound",
                         "monotonicity", "holder"};

  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const PropertyCase& pc = cases[ci];
    const LossSpec& loss = pc.loss;
    std::vector<Check> checks;
    if (loss.nonnegative()) checks.push_back(kSelfBounding);
    if (loss.convex_per_example) {
      checks.push_back(kCocoercivity);
      checks.push_back(kMonotonicity);
      if (loss.smooth_per_example) checks.push_back(kNonexpansive);
      if (loss.alpha < 1.0) checks.push_back(kExpansiveness);
    }
    if (loss.smooth_per_example) checks.push_back(kSmoothness);
    checks.push_back(kHolder);

    for (Check check : checks) {
      std::mt19937_64 gen(derive_seed(cfg.seed, seed_tag::kProperty, ci * 16 + check));
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      auto gaussian = [&](double scale) {
        Vector v(static_cast<Eigen::Index>(d));
        for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = scale * normal(gen);
        return v;
      };
      std::size_t passed = 0;
      for (std::size_t k = 0; k < draws; ++k) {
        const Vector w = gaussian(std::exp(-3.0 + 4.5 * unit(gen)));
        const Vector w2 = k % 20 == 0 ? w : gaussian(std::exp(-3.0 + 4.5 * unit(gen)));
        Example z;
        z.x = gaussian(1.0);
        z.x *= X * std::pow(unit(gen), 1.0 / static_cast<double>(d)) /
               std::max(z.x.norm(), 1e-300);
        z.y = pc.classification ? (unit(gen) < 0.5 ? -1.0 : 1.0) : 2.0 * normal(gen);
        bool ok = false;
        switch (check) {
          case kSelfBounding:
            ok = check_self_bounding(loss, w, z);
            break;
          case kCocoercivity:
            ok = check_cocoercivity(loss, w, w2, z);
            break;
          case kMonotonicity:
            ok = check_monotonicity(loss, w, w2, z);
            break;
          case kNonexpansive: {
            const double cap = 2.0 / example_holder_constant(loss, z);
            const double eta = k % 10 == 0 ? cap : cap * unit(gen);
            ok = check_nonexpansive(loss, w, w2, z, eta);
            break;
          }
          case kExpansiveness:
            ok = check_expansiveness_slack(loss, w, w2, z, 2.0 * unit(gen));
            break;
          case kSmoothness:
            ok = check_smoothness_upper_bound(loss, w, w2, z);
            break;
          case kHolder:
            ok = check_holder(loss, w, w2, z);
            break;
        }
        if (ok) ++passed;
      }
      ctx.gate(std::string(names[check]) + "/" + pc.label, 0, 0,
               static_cast<double>(passed) / static_cast<double>(draws), 0.0, 1.0,
               passed == draws);
    }
  }
}

// ---------------------------------------------------------------------------
// oracle

void agreement(Context& ctx, const std::string& metric, std::size_t n,
               std::uint64_t T, double mc, double se, double exact) {
  const double diff = std::abs(mc - exact);
  const bool ok = se > 0.0 ? diff <= 3.0 * se
                           : diff <= 1e-12 * std::max(1.0, std::abs(exact));
  ctx.gate(metric, n, T, mc, se, exact, ok);
}

void run_oracle(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const Dataset S = sample_dataset(dist, n, derive_seed(cfg.seed, seed_tag::kBaseSample, n));
    const Dataset St = sample_dataset(dist, n, derive_seed(cfg.seed, seed_tag::kGhostSample, n));
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    const Domain dom = build_domain(cfg.sweep);
    const ExactStability exact = brute_force_stability(loss, S, St, T, sched, dom);
    CouplingConfig cc = coupling(cfg);
    cc.neighbor_subsample = 0;
    cc.record_risks = false;
    const StabilityReport mc =
        estimate_on_average_stability_fixed(loss, S, St, T, sched, dom, cc, cfg.seed);
    agreement(ctx, "l1_stability_vs_enumeration", n, T, mc.l1_mean, mc.l1_stderr, exact.l1);
    agreement(ctx, "l2_sq_stability_vs_enumeration", n, T, mc.l2_sq_mean,
              mc.l2_sq_stderr, exact.l2_sq);
  }
}

// ---------------------------------------------------------------------------
// stability sweep and rate fit

void run_stability_sweep(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  const Domain dom = build_domain(cfg.sweep);
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    CouplingConfig cc = coupling(cfg);
    cc.record_risks = false;
    const StabilityReport rep =
        estimate_on_average_stability(loss, dist, n, T, sched, dom, cc, cfg.seed);
    ctx.info("l1_stability", n, T, rep.l1_mean, rep.l1_stderr);
    ctx.info("l2_sq_stability", n, T, rep.l2_sq_mean, rep.l2_sq_stderr);
    ctx.info("empirical_risk", n, T, rep.emp_risk.mean, rep.emp_risk.std_error);
    if (rep.has_population) {
      ctx.info("generalization_gap", n, T, rep.gap.mean, rep.gap.std_error);
    }
  }
}

void run_rate_fit(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  const Domain dom = build_domain(cfg.sweep);
  std::vector<std::pair<double, double>> points;
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    GapConfig gc;
    gc.replicates = cfg.replicates;
    gc.mc_pop = cfg.sweep.mc_pop;
    gc.threads = cfg.threads;
    if (cfg.sweep.output != "auto") gc.output = output_kind_from_string(cfg.sweep.output);
    const GapReport rep =
        estimate_generalization_gap(loss, dist, n, T, sched, dom, gc, cfg.seed);
    if (!rep.has_excess) {
      throw ConfigError("rate-fit needs a loss and distribution with a known optimal risk");
    }
    ctx.info("excess_risk", n, T, rep.excess.mean, rep.excess.std_error);
    ctx.info("generalization_gap", n, T, rep.gap.mean, rep.gap.std_error);
    points.emplace_back(static_cast<double>(n), rep.excess.mean);
  }
  const std::size_t n_max = cfg.sweep.n_grid.back();
  bool positive = true;
  for (const auto& p : points) positive = positive && p.second > 0.0;
  if (!positive) {
    ctx.gate("slope", n_max, cfg.horizon(n_max), std::nan(""), 0.0,
             cfg.sweep.slope_max.value_or(0.0), false);
    return;
  }
  const RateFit fit = fit_loglog_slope(points);
  if (cfg.sweep.slope_max) {
    ctx.gate("slope", n_max, cfg.horizon(n_max), fit.slope, 0.0, *cfg.sweep.slope_max,
             fit.slope <= *cfg.sweep.slope_max);
  } else {
    ctx.info("slope", n_max, cfg.horizon(n_max), fit.slope);
  }
  ctx.info("intercept", n_max, cfg.horizon(n_max), fit.intercept);
  ctx.info("r_squared", n_max, cfg.horizon(n_max), fit.r_squared);
}

// ---------------------------------------------------------------------------
// bound checks

double sqrt_with_stderr(double v, double se, double* out_se) {
  const double r = std::sqrt(std::max(v, 0.0));
  *out_se = r > 0.0 ? se / (2.0 * r) : std::sqrt(se);
  return r;
}

void bound_smooth(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  const Domain dom = build_domain(cfg.sweep);
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    const StabilityReport rep =
        estimate_on_average_stability(loss, dist, n, T, sched, dom, coupling(cfg), cfg.seed);
    BoundInputs in;
    in.n = n;
    in.etas = sched.etas(T);
    in.L = loss.holder_L;
    in.alpha = 1.0;
    in.c = regularity_constants(1.0, loss.holder_L);
    in.risk_path = upper_path(rep.risk_path, rep.risk_path_stderr);
    in.sqrt_risk_path = upper_path(rep.sqrt_risk_path, rep.sqrt_risk_path_stderr);
    ctx.bound(compare_to_bound("l1_stability", rep.l1_mean, rep.l1_stderr, smooth_l1_stability_bound(in)),
              n, T);
    ctx.bound(compare_to_bound("l2_sq_stability", rep.l2_sq_mean, rep.l2_sq_stderr,
                               smooth_l2_stability_bound(in)),
              n, T);
    if (rep.has_population) {
      const double l2 = rep.l2_sq_mean + rep.l2_sq_stderr;
      const double emp = rep.emp_risk.mean + rep.emp_risk.std_error;
      ctx.bound(compare_to_bound("generalization_gap", rep.gap.mean, rep.gap.std_error,
                                 smooth_generalization_bound(in, l2, emp)),
                n, T);
    }
  }
}

void bound_nonsmooth(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  if (!loss.convex_per_example || !loss.nonnegative() || loss.alpha >= 1.0) {
    throw ConfigError("nonsmooth bound check needs a convex loss with alpha < 1");
  }
  const Domain dom = build_domain(cfg.sweep);
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    const StabilityReport rep =
        estimate_on_average_stability(loss, dist, n, T, sched, dom, coupling(cfg), cfg.seed);
    BoundInputs in;
    in.n = n;
    in.etas = sched.etas(T);
    in.L = loss.holder_L;
    in.alpha = loss.alpha;
    in.c = regularity_constants(loss.alpha, loss.holder_L, loss.grad_at_zero);
    in.frac_risk_path = upper_path(rep.frac_risk_path, rep.frac_risk_path_stderr);
    ctx.info("l1_stability", n, T, rep.l1_mean, rep.l1_stderr);
    ctx.bound(compare_to_bound("l2_sq_stability", rep.l2_sq_mean, rep.l2_sq_stderr,
                               holder_l2_stability_bound(in)),
              n, T);
    if (rep.has_population) {
      const double l2 = rep.l2_sq_mean + rep.l2_sq_stderr;
      const double frac = rep.pop_frac.mean + rep.pop_frac.std_error;
      ctx.bound(compare_to_bound("generalization_gap", rep.gap.mean, rep.gap.std_error,
                                 holder_generalization_bound(in, l2, frac)),
                n, T);
    }
  }
}

void bound_auc(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  if (loss.kind != LossKind::kAucSquare) throw ConfigError("auc bound check needs auc-square");
  if (cfg.sweep.domain != "ball") throw ConfigError("auc bound check needs domain = ball");
  const Domain dom = build_domain(cfg.sweep);
  const double G = lipschitz_on_ball(loss, dom.radius, dist.feature_bound, 1.0);
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    CouplingConfig cc = coupling(cfg);
    cc.record_risks = false;
    const StabilityReport rep =
        estimate_on_average_stability(loss, dist, n, T, sched, dom, cc, cfg.seed);
    BoundInputs in;
    in.n = n;
    in.etas = sched.etas(T);
    in.L = loss.holder_L;
    in.G = G;
    const double rhs = convex_stability_bound(in);
    double rms_se = 0.0;
    const double rms = sqrt_with_stderr(rep.l2_sq_mean, rep.l2_sq_stderr, &rms_se);
    ctx.bound(compare_to_bound("l1_stability", rep.l1_mean, rep.l1_stderr, rhs), n, T);
    ctx.bound(compare_to_bound("rms_stability", rms, rms_se, rhs), n, T);

    // Smallest eigenvalue of the empirical Hessian over the base samples.
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      const NeighborFamily fam =
          make_neighbor_family(dist, n, derive_seed(cfg.seed, seed_tag::kReplicate, r));
      Matrix H = Matrix::Zero(static_cast<Eigen::Index>(dist.dim()),
                              static_cast<Eigen::Index>(dist.dim()));
      for (std::size_t i = 0; i < n; ++i) H += example_hessian(loss, fam.base[i]);
      H /= static_cast<double>(n);
      Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues()[0]);
    }
    ctx.info("min_empirical_hessian_eigenvalue", n, T, min_eig);
  }
  // Unbiasedness of the single-example surrogate at a fixed model.
  const std::size_t m = std::max<std::size_t>(cfg.sweep.mc_pop, 100000);
  const Vector diff = dist.mu_plus - dist.mu_minus;
  const Vector w = diff.norm() > 0.0 ? Vector(0.5 * diff / diff.norm())
                                     : Vector(Vector::Constant(diff.size(), 0.1));
  const RiskEstimate mc =
      population_risk_mc(loss, dist, w, m, derive_seed(cfg.seed, seed_tag::kPopulation));
  const double exact = population_risk(loss, dist, w, 0, 0).value;
  agreement(ctx, "auc_surrogate_unbiased", m, 0, mc.value, mc.std_error, exact);
}

void bound_strong_ls(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  if (loss.kind != LossKind::kLeastSquares) throw ConfigError("strong-ls needs least squares");
  if (cfg.schedule.kind != "strongly-convex") {
    throw ConfigError("strong-ls needs the strongly-convex schedule");
  }
  if (cfg.sweep.domain != "ball") throw ConfigError("strong-ls needs domain = ball");
  const Domain dom = build_domain(cfg.sweep);
  const double R = dom.radius;
  for (std::size_t n : cfg.sweep.n_grid) {
    const std::uint64_t T = cfg.horizon(n);
    std::vector<double> dist_v(cfg.replicates);
    std::vector<double> rhs_v(cfg.replicates);
    std::vector<double> sigma_v(cfg.replicates);
    detail::parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const std::uint64_t rep = derive_seed(cfg.seed, seed_tag::kReplicate, r);
      const Dataset S = sample_dataset(dist, n, derive_seed(rep, seed_tag::kBaseSample));
      Example zero;
      zero.x = Vector::Zero(static_cast<Eigen::Index>(S.dim()));
      zero.y = 0.0;
      const Dataset Sbar = S.with_replacement(0, zero);
      double L = 0.0;
      double G = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xn = S[i].x.norm();
        L = std::max(L, xn * xn);
        G = std::max(G, (R * xn + std::abs(S[i].y)) * xn);
      }
      const double sigma = cfg.schedule.sigma ? *cfg.schedule.sigma : min_positive_eigenvalue(S);
      const std::uint64_t t0 =
          cfg.schedule.t0 ? *cfg.schedule.t0 : t0_for_strong_convexity(L, sigma);
      const StepSchedule sched = StepSchedule::strongly_convex(sigma, t0);
      const LossSpec ls = LossSpec::least_squares(std::max(L, 1e-300));
      RunOptions opts;
      opts.record_step_losses = false;
      const std::uint64_t seed = derive_seed(rep, seed_tag::kIndexStream);
      const Trajectory a = sgd_run(ls, S, sched, dom, T, seed, opts);
      const Trajectory b = sgd_run(ls, Sbar, sched, dom, T, seed, opts);
      dist_v[r] = (a.final - b.final).norm();
      BoundInputs in;
      in.n = n;
      in.G = G;
      in.sigma = sigma;
      rhs_v[r] = strongly_convex_stability_bound(in, T, t0);
      sigma_v[r] = sigma;
    });
    const MeanStderr d = mean_stderr(dist_v);
    const MeanStderr rhs = mean_stderr(rhs_v);
    const MeanStderr sg = mean_stderr(sigma_v);
    ctx.info("min_positive_eigenvalue", n, T, sg.mean, sg.std_error);
    ctx.bound(compare_to_bound("zero_neighbor_stability", d.mean, d.std_error, rhs.mean), n, T);
  }
  (void)loss;
}

void bound_erm(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  if (loss.kind != LossKind::kLeastSquares ||
      (dist.kind != Distribution::Kind::kGaussLinReg &&
       dist.kind != Distribution::Kind::kRealizableLinReg)) {
    throw ConfigError("erm bound check needs least squares on linear regression data");
  }
  const double lambda = cfg.sweep.lambda;
  if (!(lambda > 0.0)) throw ConfigError("erm bound check needs lambda > 0");
  const double X = dist.feature_bound;
  const double c1 = std::sqrt(2.0 * (X * X + lambda));
  for (std::size_t n : cfg.sweep.n_grid) {
    std::vector<double> gap(cfg.replicates);
    std::vector<double> reg_risk(cfg.replicates);
    detail::parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const std::uint64_t rep = derive_seed(cfg.seed, seed_tag::kReplicate, r);
      const Dataset S = sample_dataset(dist, n, derive_seed(rep, seed_tag::kBaseSample));
      const Vector w = ridge_erm(S, lambda);
      const double pop = population_risk(loss, dist, w, 0, 0).value;
      gap[r] = pop - empirical_risk(loss, S, w);
      reg_risk[r] = pop + 0.5 * lambda * w.squaredNorm();
    });
    const MeanStderr g = mean_stderr(gap);
    const MeanStderr f = mean_stderr(reg_risk);
    ctx.bound(compare_to_bound("erm_generalization_gap", g.mean, g.std_error,
                               erm_generalization_bound(c1, n, lambda, f.mean + f.std_error)),
              n, 0);
  }
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

void bound_extensions(Context& ctx, const LossSpec& loss, const Distribution& dist) {
  const auto& cfg = ctx.cfg;
  const std::size_t n = cfg.sweep.n_grid.front();

  // Proximal SGD without a regularizer is plain SGD.
  {
    const std::uint64_t T = cfg.horizon(n);
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    const Dataset S = sample_dataset(dist, n, derive_seed(cfg.seed, seed_tag::kBaseSample));
    const std::uint64_t seed = derive_seed(cfg.seed, seed_tag::kIndexStream);
    const Trajectory a = sgd_run(loss, S, sched, Domain::unconstrained(), T, seed);
    const Trajectory b = spgd_run(loss, Regularizer::none(), S, sched, T, seed);
    const bool same = same_bits(a.final, b.final) && same_bits(a.avg_eta, b.avg_eta) &&
                      same_bits(a.avg_linear, b.avg_linear) &&
                      a.per_step_risk == b.per_step_risk;
    ctx.gate("spgd_none_equals_sgd", n, T, same ? 1.0 : 0.0, 0.0, 1.0, same);
  }

  if (!loss.lipschitz_G || loss.alpha >= 1.0 || !loss.convex_per_example) {
    throw ConfigError("extensions need a convex Lipschitz loss with alpha < 1 (q = 1)");
  }
  const double G = *loss.lipschitz_G;

  // Without-replacement stability over K epochs.
  {
    const std::uint64_t K = cfg.sweep.K;
    const std::uint64_t T = K * n;
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    CouplingConfig cc = coupling(cfg);
    cc.record_risks = false;
    const StabilityReport rep =
        estimate_epoch_stability_without_replacement(loss, dist, n, K, sched, cc, cfg.seed);
    std::vector<std::vector<double>> etas(K);
    for (std::uint64_t k = 0; k < K; ++k) {
      for (std::size_t t = 1; t <= n; ++t) etas[k].push_back(sched.eta(k * n + t));
    }
    const double rhs = without_replacement_stability_bound(etas, loss.alpha, loss.holder_L, G, n);
    ctx.bound(compare_to_bound("without_replacement_stability", rep.l1_mean, rep.l1_stderr, rhs),
              n, T);
  }

  // High-probability stability for one fixed neighboring pair.
  {
    const std::size_t hn = cfg.sweep.hp_n;
    const std::uint64_t T = cfg.sweep.hp_T;
    if (cfg.schedule.kind != "horizon-poly") {
      throw ConfigError("the high-probability check needs the horizon-poly schedule");
    }
    const StepSchedule sched = build_schedule(cfg.schedule, T, loss.holder_L);
    const Dataset S = sample_dataset(dist, hn, derive_seed(cfg.seed, seed_tag::kBaseSample, 1));
    const Dataset ghost =
        sample_dataset(dist, hn, derive_seed(cfg.seed, seed_tag::kGhostSample, 1));
    const Dataset St = S.with_replacement(0, ghost[0]);
    const std::vector<double> d = coupled_distances(
        loss, S, St, T, sched, Domain::unconstrained(), cfg.sweep.hp_seeds,
        derive_seed(cfg.seed, seed_tag::kIndexStream, 1), cfg.threads);
    const double rhs = high_prob_stability_bound(sched.c, sched.theta, loss.alpha, loss.holder_L,
                                              G, T, hn, cfg.sweep.delta);
    std::size_t exceed = 0;
    double worst = 0.0;
    for (double v : d) {
      if (v > rhs) ++exceed;
      worst = std::max(worst, v);
    }
    const double frac = static_cast<double>(exceed) / static_cast<double>(d.size());
    ctx.info("high_prob_bound_rhs", hn, T, rhs);
    ctx.info("max_coupled_distance", hn, T, worst);
    ctx.gate("high_prob_exceedance_fraction", hn, T, frac, 0.0, cfg.sweep.delta,
             frac <= cfg.sweep.delta);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t ExperimentResult::gates_total() const {
  std::size_t k = 0;
  for (const auto& r : rows) k += r.satisfied.has_value();
  return k;
}

std::size_t ExperimentResult::gates_failed() const {
  std::size_t k = 0;
  for (const auto& r : rows) k += r.satisfied.has_value() && !*r.satisfied;
  return k;
}

int ExperimentResult::exit_code() const {
  return gates_failed() > 0 ? kExitGateFailure : kExitPass;
}

std::string ExperimentResult::csv() const {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += name + "," + config_hash + "," + std::to_string(seed) + "," +
           std::to_string(r.n) + "," + std::to_string(r.T) + "," +
           (r.theta ? fmt(*r.theta) : std::string()) + "," + r.metric + "," +
           fmt(r.value) + "," + fmt(r.std_error) + "," +
           (r.bound_rhs ? fmt(*r.bound_rhs) : std::string()) + "," +
           (r.satisfied ? (*r.satisfied ? "true" : "false") : "") + "\n";
  }
  return out;
}

std::string write_csv(const ExperimentResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const std::string path =
      (std::filesystem::path(out_dir) / (result.name + ".csv")).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << result.csv();
  if (!f) throw IoError("failed writing '" + path + "'");
  return path;
}

RateFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InvalidArgument("a rate fit needs at least 3 points");
  RateFit fit;
  for (const auto& [n, m] : points) {
    if (!(n > 0.0)) throw InvalidArgument("sample sizes must be positive");
    if (!(m > 0.0)) throw InvalidArgument("metrics must be positive for a log-log fit");
    fit.points.emplace_back(std::log(n), std::log(m));
  }
  const double k = static_cast<double>(fit.points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("sample sizes must not all be equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

Distribution build_distribution(const DistributionConfig& c) {
  const std::size_t d = c.dim;
  const Vector ones = Vector::Ones(static_cast<Eigen::Index>(d)) / std::sqrt(static_cast<double>(d));
  auto cov_of = [&](double scale) -> Matrix {
    if (!c.cov_diag.empty()) {
      return sized(c.cov_diag, d, ones, "cov_diag").asDiagonal();
    }
    return scale * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  };
  const auto kind = distribution_kind_from_string(c.kind);
  const Vector w_star = sized(c.w_star, d, ones, "w_star");
  switch (kind) {
    case Distribution::Kind::kGaussLinReg:
      return Distribution::gauss_linreg(w_star, cov_of(c.cov_scale), c.noise_sd, c.feature_bound);
    case Distribution::Kind::kRealizableLinReg:
      return Distribution::realizable_linreg(w_star, cov_of(c.cov_scale), c.feature_bound);
    case Distribution::Kind::kMarginClassif:
      return Distribution::margin_classif(w_star, cov_of(c.cov_scale), c.flip_prob, c.margin,
                                          c.feature_bound);
    case Distribution::Kind::kImbalancedGauss:
      return Distribution::imbalanced_gauss(
          c.p, sized(c.mu_plus, d, Vector(0.5 * ones), "mu_plus"),
          sized(c.mu_minus, d, Vector(-0.5 * ones), "mu_minus"), cov_of(c.cov_plus_scale),
          cov_of(c.cov_minus_scale), c.feature_bound);
  }
  throw ConfigError("unknown distribution");
}

LossSpec build_loss(const LossConfig& c, const Distribution& dist) {
  const double X = dist.feature_bound;
  switch (loss_kind_from_string(c.kind)) {
    case LossKind::kLeastSquares:
      return LossSpec::least_squares(X * X);
    case LossKind::kQNormHinge:
      return LossSpec::qnorm_hinge(c.q, X);
    case LossKind::kQPowerAbsolute:
      return LossSpec::qpower_absolute(c.q, X, dist.label_bound());
    case LossKind::kAucSquare:
      if (dist.kind != Distribution::Kind::kImbalancedGauss) {
        throw ConfigError("auc-square needs the imbalanced-gauss distribution");
      }
      return LossSpec::auc_square(dist.p, dist.mu_plus, dist.mu_minus, X);
  }
  throw ConfigError("unknown loss");
}

StepSchedule build_schedule(const ScheduleConfig& c, std::uint64_t T, double L) {
  const double f = c.relative_to_L ? 1.0 / L : 1.0;
  switch (schedule_kind_from_string(c.kind)) {
    case StepSchedule::Kind::kHorizonConstant:
      return StepSchedule::horizon_constant(c.c * f, T);
    case StepSchedule::Kind::kPolyDecay:
      return StepSchedule::poly_decay(c.eta1 * f, c.theta);
    case StepSchedule::Kind::kHorizonPoly:
      return StepSchedule::horizon_poly(c.c * f, c.theta, T);
    case StepSchedule::Kind::kStronglyConvex: {
      if (!c.sigma) throw ConfigError("sigma = auto is only supported by strong-ls");
      const std::uint64_t t0 = c.t0 ? *c.t0 : t0_for_strong_convexity(L, *c.sigma);
      return StepSchedule::strongly_convex(*c.sigma, t0);
    }
    case StepSchedule::Kind::kFixedConstant:
      return StepSchedule::fixed_constant(c.eta1 * f);
  }
  throw ConfigError("unknown schedule");
}

Domain build_domain(const SweepConfig& c) {
  if (c.domain == "ball") return Domain::ball(c.radius);
  if (c.domain == "unconstrained") return Domain::unconstrained();
  throw ConfigError("unknown domain '" + c.domain + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.name = cfg.display_name();
  out.config_hash = config_hash_hex(cfg);
  out.seed = cfg.seed;
  Context ctx{cfg, out, theta_of(cfg.schedule)};
  if (cfg.experiment == "properties") {
    ctx.theta.reset();
    run_properties(ctx);
    return out;
  }
  const Distribution dist = build_distribution(cfg.distribution);
  const LossSpec loss = build_loss(cfg.loss, dist);
  if (cfg.experiment == "oracle") {
    run_oracle(ctx, loss, dist);
  } else if (cfg.experiment == "stability-sweep") {
    run_stability_sweep(ctx, loss, dist);
  } else if (cfg.experiment == "rate-fit") {
    run_rate_fit(ctx, loss, dist);
  } else if (cfg.bound == "smooth") {
    bound_smooth(ctx, loss, dist);
  } else if (cfg.bound == "nonsmooth") {
    bound_nonsmooth(ctx, loss, dist);
  } else if (cfg.bound == "auc") {
    bound_auc(ctx, loss, dist);
  } else if (cfg.bound == "strong-ls") {
    bound_strong_ls(ctx, loss, dist);
  } else if (cfg.bound == "erm") {
    bound_erm(ctx, loss, dist);
  } else if (cfg.bound == "extensions") {
    bound_extensions(ctx, loss, dist);
  }
  return out;
}

int exit_code_for_exception(const std::exception& e) {
  if (dynamic_cast<const ResourceLimit*>(&e) != nullptr) return kExitResourceLimit;
  return kExitConfigError;
}

}  // namespace stablab
