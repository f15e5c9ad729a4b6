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

#include "stablab/bounds.hpp"

#include <cmath>
#include <limits>

#include "stablab/errors.hpp"

namespace stablab {
namespace {

void require_path(const std::vector<double>& path, std::size_t t,
                  const char* name) {
  if (path.size() < t) {
    throw InvalidArgument(std::string(name) + " has " +
                          std::to_string(path.size()) + " entries, need " +
                          std::to_string(t));
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw InvalidArgument(std::string(name) + " must be > 0");
}

void require_alpha_below_one(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1); use the smooth bound at alpha = 1");
  }
}

double require_G(const BoundInputs& in) {
  if (!in.G || !std::isfinite(*in.G)) {
    throw InvalidArgument("a finite gradient bound G is required");
  }
  return *in.G;
}

double sum(const std::vector<double>& v, std::size_t t) {
  double s = 0.0;
  for (std::size_t j = 0; j < t; ++j) s += v[j];
  return s;
}

double sum_pow(const std::vector<double>& v, std::size_t t, double e) {
  double s = 0.0;
  for (std::size_t j = 0; j < t; ++j) s += std::pow(v[j], e);
  return s;
}

void require_nonincreasing(const std::vector<double>& etas) {
  for (std::size_t j = 1; j < etas.size(); ++j) {
    if (etas[j] > etas[j - 1]) {
      throw PreconditionViolation("step sizes must be nonincreasing");
    }
  }
}

double c3_of(double alpha, double L) {
  return *regularity_constants(alpha, L, 0.0).c3;
}

}  // namespace

double BoundInputs::p_or_default() const {
  if (p) {
    require_positive(*p, "p");
    return *p;
  }
  if (t() == 0) return 1.0;
  return static_cast<double>(n) / static_cast<double>(t());
}

BoundReport compare_to_bound(std::string name, double measured,
                             double measured_stderr, double rhs) {
  BoundReport r;
  r.name = std::move(name);
  r.rhs = rhs;
  r.measured = measured;
  r.measured_stderr = measured_stderr;
  r.satisfied = measured <= rhs + 3.0 * measured_stderr;
  if (measured_stderr > 0.0) {
    r.slack_sigma = (rhs - measured) / measured_stderr;
  } else {
    r.slack_sigma = measured <= rhs ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
  }
  return r;
}

std::vector<double> upper_path(const std::vector<double>& mean,
                               const std::vector<double>& std_error) {
  if (mean.size() != std_error.size()) {
    throw InvalidArgument("path and standard errors differ in length");
  }
  std::vector<double> out(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) out[j] = mean[j] + std_error[j];
  return out;
}

double smooth_l1_stability_bound(const BoundInputs& in) {
  const std::size_t t = in.t();
  require_path(in.sqrt_risk_path, t, "sqrt_risk_path");
  if (!(in.n >= 1)) throw InvalidArgument("n must be >= 1");
  double s = 0.0;
  for (std::size_t j = 0; j < t; ++j) s += in.etas[j] * in.sqrt_risk_path[j];
  return 2.0 * std::sqrt(2.0 * in.L) / static_cast<double>(in.n) * s;
}

double smooth_l2_stability_bound(const BoundInputs& in) {
  const std::size_t t = in.t();
  require_path(in.risk_path, t, "risk_path");
  const double p = in.p_or_default();
  const double n = static_cast<double>(in.n);
  const double grow = 1.0 + p / n;
  double s = 0.0;
  for (std::size_t j = 1; j <= t; ++j) {
    const double eta = in.etas[j - 1];
    s += std::pow(grow, static_cast<double>(t - j)) * eta * eta * in.risk_path[j - 1];
  }
  return 8.0 * (1.0 + 1.0 / p) * in.L / n * s;
}

double holder_l2_stability_bound(const BoundInputs& in) {
  require_alpha_below_one(in.alpha);
  const std::size_t t = in.t();
  if (in.alpha > 0.0) require_path(in.frac_risk_path, t, "frac_risk_path");
  const double c3 = in.c.c3 ? *in.c.c3 : c3_of(in.alpha, in.L);
  const double c1 = in.c.c1;
  const double p = in.p_or_default();
  const double n = static_cast<double>(in.n);
  const double grow = 1.0 + p / n;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t j = 1; j <= t; ++j) {
    const double eta = in.etas[j - 1];
    const double frac = in.alpha == 0.0 ? 1.0 : in.frac_risk_path[j - 1];
    first += std::pow(grow, static_cast<double>(t + 1 - j)) *
             std::pow(eta, 2.0 / (1.0 - in.alpha));
    second += std::pow(grow, static_cast<double>(t - j)) * eta * eta / n * frac;
  }
  return c3 * c3 * first + 4.0 * (1.0 + 1.0 / p) * c1 * c1 * second;
}

double default_gamma_smooth(double L, double emp_risk, double l2_sq) {
  if (!(l2_sq > 0.0)) return 1.0;
  return std::max(1.0, std::sqrt(2.0 * L * std::max(emp_risk, 0.0)) / std::sqrt(l2_sq));
}

double smooth_generalization_bound(const BoundInputs& in, double l2_sq,
                                   double emp_risk) {
  const double gamma =
      in.gamma ? *in.gamma : default_gamma_smooth(in.L, emp_risk, l2_sq);
  require_positive(gamma, "gamma");
  return in.L / gamma * emp_risk + (in.L + gamma) / 2.0 * l2_sq;
}

double default_gamma_holder(double c1, double pop_risk_frac, double l2_sq) {
  if (!(l2_sq > 0.0) || !(pop_risk_frac > 0.0) || !(c1 > 0.0)) return 1.0;
  return c1 * std::sqrt(pop_risk_frac) / std::sqrt(l2_sq);
}

double holder_generalization_bound(const BoundInputs& in, double l2_sq,
                                   double pop_risk_frac) {
  const double c1 = in.c.c1;
  const double gamma =
      in.gamma ? *in.gamma : default_gamma_holder(c1, pop_risk_frac, l2_sq);
  require_positive(gamma, "gamma");
  return c1 * c1 / (2.0 * gamma) * pop_risk_frac + gamma / 2.0 * l2_sq;
}

double lipschitz_opt_error_bound(const BoundInputs& in) {
  const double G = require_G(in);
  const std::size_t t = in.t();
  const double s1 = sum(in.etas, t);
  if (!(s1 > 0.0)) throw InvalidArgument("sum of step sizes must be > 0");
  const double s2 = sum_pow(in.etas, t, 2.0);
  return (G * G * s2 + in.reference_norm_sq) / (2.0 * s1);
}

double smooth_weighted_opt_error_bound(const BoundInputs& in) {
  const std::size_t t = in.t();
  if (t == 0) throw InvalidArgument("at least one step is required");
  require_nonincreasing(in.etas);
  const double cap = 1.0 / (2.0 * in.L);
  for (double eta : in.etas) {
    if (eta > cap * (1.0 + 1e-12)) {
      throw PreconditionViolation("step sizes must satisfy eta <= 1/(2L)");
    }
  }
  const double s2 = sum_pow(in.etas, t, 2.0);
  return (0.5 + in.L * in.etas[0]) * in.reference_norm_sq +
         2.0 * in.L * s2 * in.reference_risk;
}

double holder_opt_error_bound(const BoundInputs& in) {
  require_alpha_below_one(in.alpha);
  const std::size_t t = in.t();
  if (t == 0 || !(sum(in.etas, t) > 0.0)) {
    throw InvalidArgument("sum of step sizes must be > 0");
  }
  require_nonincreasing(in.etas);
  const double a = in.alpha;
  const double c1 = in.c.c1;
  const double c2 = in.c.c2 ? *in.c.c2 : c1 * c1;
  const double s2 = sum_pow(in.etas, t, 2.0);
  const double s3 = sum_pow(in.etas, t, (3.0 - a) / (1.0 - a));
  const double bracket =
      in.etas[0] * in.reference_norm_sq + 2.0 * s2 * in.reference_risk + c2 * s3;
  return in.reference_norm_sq +
         c1 * c1 * std::pow(s2, (1.0 - a) / (1.0 + a)) *
             std::pow(bracket, 2.0 * a / (1.0 + a));
}

double expansion_product(const std::vector<double>& etas, double L) {
  double c = 1.0;
  for (double eta : etas) c *= 1.0 + L * L * eta * eta;
  return c;
}

double convex_stability_bound(const BoundInputs& in) {
  const double G = require_G(in);
  const std::size_t t = in.t();
  const double n = static_cast<double>(in.n);
  const double ct = expansion_product(in.etas, in.L);
  return 4.0 * G * ct * sum(in.etas, t) / n +
         2.0 * G * std::sqrt(ct * sum_pow(in.etas, t, 2.0) / n);
}

double strongly_convex_stability_bound(const BoundInputs& in,
                                       std::uint64_t t, std::uint64_t t0) {
  const double G = require_G(in);
  require_positive(in.sigma, "sigma");
  const double n = static_cast<double>(in.n);
  const double tt = static_cast<double>(t) + static_cast<double>(t0);
  require_positive(tt, "t + t0");
  return 4.0 * G / in.sigma * (1.0 / std::sqrt(n * tt) + 1.0 / n);
}

double erm_generalization_bound(double c1, std::size_t n, double sigma,
                                double pop_risk_frac) {
  require_positive(sigma, "sigma");
  if (n == 0) throw InvalidArgument("n must be >= 1");
  return 2.0 * c1 * c1 / (static_cast<double>(n) * sigma) * pop_risk_frac;
}

double high_prob_stability_bound(double c, double theta, double alpha, double L,
                                 double G, std::uint64_t t, std::size_t n,
                                 double delta) {
  require_alpha_below_one(alpha);
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (t == 0 || n == 0) throw InvalidArgument("t and n must be >= 1");
  const double c3 = c3_of(alpha, L);
  const double td = static_cast<double>(t);
  const double nd = static_cast<double>(n);
  return c3 * std::pow(c, 1.0 / (1.0 - alpha)) *
             std::pow(td, 1.0 - theta / (1.0 - alpha)) +
         2.0 * G * c / nd *
             (1.0 + std::sqrt(3.0 * nd / td * std::log(1.0 / delta))) *
             std::pow(td, 1.0 - theta);
}

double without_replacement_stability_bound(
    const std::vector<std::vector<double>>& etas_per_epoch, double alpha,
    double L, double G, std::size_t n) {
  require_alpha_below_one(alpha);
  if (n == 0) throw InvalidArgument("n must be >= 1");
  const double c3 = c3_of(alpha, L);
  double s1 = 0.0;
  double sp = 0.0;
  for (const auto& epoch : etas_per_epoch) {
    for (double eta : epoch) {
      s1 += eta;
      sp += std::pow(eta, 1.0 / (1.0 - alpha));
    }
  }
  return 2.0 * G / static_cast<double>(n) * s1 + c3 * sp;
}

double nonconvex_l2_recurrence(double prev_l2_sq, double eta, double L,
                               double p, std::size_t n, double risk) {
  require_positive(p, "p");
  if (n == 0) throw InvalidArgument("n must be >= 1");
  const double nd = static_cast<double>(n);
  const double g = 1.0 + eta * L;
  return (1.0 + p / nd) * g * g * prev_l2_sq +
         8.0 * (1.0 + 1.0 / p) * L * eta * eta / nd * risk;
}

double nonconvex_l2_stability_bound(const std::vector<double>& etas, double L, double p,
                                    std::size_t n, const std::vector<double>& risk_path) {
  require_path(risk_path, etas.size(), "risk_path");
  double v = 0.0;
  for (std::size_t j = 0; j < etas.size(); ++j) {
    v = nonconvex_l2_recurrence(v, etas[j], L, p, n, risk_path[j]);
  }
  return v;
}

double chernoff_exceedance_threshold(double mu, double delta_tail) {
  require_positive(mu, "mu");
  if (!(delta_tail > 0.0 && delta_tail < 1.0)) {
    throw InvalidArgument("delta_tail must lie in (0, 1)");
  }
  const double dt = std::sqrt(3.0 * std::log(1.0 / delta_tail) / mu);
  return (1.0 + dt) * mu;
}

Vector ridge_erm(const Dataset& S, double lambda) {
  require_positive(lambda, "lambda");
  if (S.empty()) throw InvalidArgument("ERM on an empty dataset");
  const auto d = static_cast<Eigen::Index>(S.dim());
  Vector b = Vector::Zero(d);
  for (std::size_t i = 0; i < S.size(); ++i) b += S[i].y * S[i].x;
  b /= static_cast<double>(S.size());
  Matrix A = empirical_covariance(S);
  A.diagonal().array() += lambda;
  return A.ldlt().solve(b);
}

}  // namespace stablab
