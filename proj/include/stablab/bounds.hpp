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

#ifndef STABLAB_BOUNDS_HPP_
#define STABLAB_BOUNDS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablab/data.hpp"
#include "stablab/losses.hpp"

namespace stablab {

// Measured statistics and constants consumed by the calculators. Paths are
// indexed by step j = 1..t (element j - 1); t is etas.size().
struct BoundInputs {
  std::size_t n = 1;
  std::vector<double> etas;
  double L = 1.0;
  std::optional<double> G;
  double sigma = 0.0;
  double alpha = 1.0;
  RegularityConstants c;
  std::vector<double> risk_path;       // E F_S(w_j)
  std::vector<double> sqrt_risk_path;  // E sqrt(F_S(w_j))
  std::vector<double> frac_risk_path;  // E F_S(w_j)^(2 alpha / (1 + alpha))
  double reference_risk = 0.0;         // F_S(w) at the comparator w
  double reference_norm_sq = 0.0;      // |w|^2 of the comparator
  std::optional<double> gamma;
  std::optional<double> p;  // defaults to n / t

  std::size_t t() const { return etas.size(); }
  double p_or_default() const;
};

struct BoundReport {
  std::string name;
  double rhs = 0.0;
  double measured = 0.0;
  double measured_stderr = 0.0;
  bool satisfied = false;
  double slack_sigma = 0.0;
};

// measured <= rhs + 3 stderr; slack in units of stderr (infinite when the
// stderr is zero and the bound holds).
BoundReport compare_to_bound(std::string name, double measured,
                             double measured_stderr, double rhs);

// Path value plus one standard error, the conservative input for a bound.
std::vector<double> upper_path(const std::vector<double>& mean,
                               const std::vector<double>& std_error);

double smooth_l1_stability_bound(const BoundInputs& in);
double smooth_l2_stability_bound(const BoundInputs& in);
double holder_l2_stability_bound(const BoundInputs& in);

// Default gamma: max(1, sqrt(2 L emp_risk) / sqrt(l2_sq)).
double default_gamma_smooth(double L, double emp_risk, double l2_sq);
double smooth_generalization_bound(const BoundInputs& in, double l2_sq,
                                   double emp_risk);
// Default gamma: c1 pop_risk_frac^(1/2) / sqrt(l2_sq), the minimizer of the
// right-hand side (1 when l2_sq = 0).
double default_gamma_holder(double c1, double pop_risk_frac, double l2_sq);
double holder_generalization_bound(const BoundInputs& in, double l2_sq,
                                   double pop_risk_frac);

double lipschitz_opt_error_bound(const BoundInputs& in);
double smooth_weighted_opt_error_bound(const BoundInputs& in);
double holder_opt_error_bound(const BoundInputs& in);

// prod (1 + L^2 eta_j^2).
double expansion_product(const std::vector<double>& etas, double L);
double convex_stability_bound(const BoundInputs& in);
double strongly_convex_stability_bound(const BoundInputs& in,
                                       std::uint64_t t, std::uint64_t t0);
double erm_generalization_bound(double c1, std::size_t n, double sigma,
                                double pop_risk_frac);
double high_prob_stability_bound(double c, double theta, double alpha, double L,
                                 double G, std::uint64_t t, std::size_t n,
                                 double delta);
double without_replacement_stability_bound(
    const std::vector<std::vector<double>>& etas_per_epoch, double alpha,
    double L, double G, std::size_t n);
double nonconvex_l2_recurrence(double prev_l2_sq, double eta, double L,
                               double p, std::size_t n, double risk);
// Unrolls the recurrence from 0 over the step and risk paths.
double nonconvex_l2_stability_bound(const std::vector<double>& etas, double L, double p,
                                    std::size_t n, const std::vector<double>& risk_path);
double chernoff_exceedance_threshold(double mu, double delta_tail);

// Ridge regression ERM: argmin (1/2n) sum (<w,x_i> - y_i)^2 + (lambda/2)|w|^2.
Vector ridge_erm(const Dataset& S, double lambda);

}  // namespace stablab

#endif  // STABLAB_BOUNDS_HPP_
