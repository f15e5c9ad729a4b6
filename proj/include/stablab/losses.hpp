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

#ifndef STABLAB_LOSSES_HPP_
#define STABLAB_LOSSES_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "stablab/linalg.hpp"

namespace stablab {

// One labelled example z = (x, y). Classification losses expect y = +-1.
struct Example {
  Vector x;
  double y = 0.0;
};

enum class LossKind { kLeastSquares, kQNormHinge, kQPowerAbsolute, kAucSquare };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

// Known class moments used by the single-example AUC surrogate.
struct AucMoments {
  double p = 0.5;
  Vector x_plus;
  Vector x_minus;
};

// A loss family together with its regularity metadata.
//
// Hoelder constants (documented, sufficient, and checked by the property
// suites):
//   least squares      L = sup ||x||^2                       (alpha = 1)
//   q-norm hinge       L = q X^q                             (alpha = q - 1)
//   q-power absolute   L = q 2^(2-q) X^q                     (alpha = q - 1)
//   AUC square         L = 2 max(p,1-p) [(X+m)^2 + 2 X |d|] + 2 p(1-p) |d|^2
// where X bounds ||x||, m = max(|x+|, |x-|) and d = x- - x+. The hinge bound
// follows from |a^(q-1) - b^(q-1)| <= |a-b|^(q-1) for a, b >= 0; the signed
// power r -> sign(r)|r|^(q-1) loses a further 2^(2-q) when the residuals have
// opposite signs.
struct LossSpec {
  LossKind kind = LossKind::kLeastSquares;
  double q = 2.0;
  double alpha = 1.0;
  double holder_L = 1.0;
  // Global gradient bound; empty when the gradient is unbounded on R^d.
  std::optional<double> lipschitz_G;
  // sup_z ||df(0; z)||, the g0 entering c_{alpha,1} at alpha = 0.
  double grad_at_zero = 0.0;
  bool convex_per_example = true;
  bool smooth_per_example = true;
  AucMoments auc;  // kAucSquare only

  static LossSpec least_squares(double smoothness_L);
  static LossSpec qnorm_hinge(double q, double feature_bound);
  static LossSpec qpower_absolute(double q, double feature_bound,
                                  double label_bound);
  static LossSpec auc_square(double p, Vector x_plus, Vector x_minus,
                             double feature_bound);

  // Only least squares, hinge and absolute losses are nonnegative.
  bool nonnegative() const { return kind != LossKind::kAucSquare; }
};

// f(w; z). The AUC surrogate is a signed unbiased estimate and may be negative.
double loss_value(const LossSpec& loss, const Vector& w, const Example& z);

// An element of the subdifferential of f(.; z) at w. Kinks return zero.
Vector loss_subgradient(const LossSpec& loss, const Vector& w,
                        const Example& z);

// target += scale * df(w; z), without a temporary. This is the SGD hot path.
void add_scaled_subgradient(const LossSpec& loss, const Vector& w,
                            const Example& z, double scale, Vector& target);

struct RegularityConstants {
  double c1 = 0.0;
  std::optional<double> c2;  // absent at alpha = 1
  std::optional<double> c3;  // absent at alpha = 1
};

// c_{alpha,1}, c_{alpha,2} and c_{alpha,3}. g0 is required when alpha = 0.
RegularityConstants regularity_constants(double alpha, double L,
                                         std::optional<double> g0 = {});

// Constants of the loss restricted to one example: least squares uses
// ||x||^2, the q-losses their per-example Hoelder constant, AUC the spectral
// norm of its (constant) Hessian.
double example_holder_constant(const LossSpec& loss, const Example& z);
RegularityConstants example_constants(const LossSpec& loss, const Example& z);

// Hessian of f(.; z) for the quadratic kinds (least squares, AUC); throws
// InvalidArgument for the others.
Matrix example_hessian(const LossSpec& loss, const Example& z);

// sup ||df(w; z)|| over ||w|| <= radius, ||x|| <= feature_bound and
// |y| <= label_bound.
double lipschitz_on_ball(const LossSpec& loss, double radius,
                         double feature_bound, double label_bound);

// ---------------------------------------------------------------------------
// Inequality checkers. Each returns true iff the inequality holds up to
// tol absolute plus tol relative to the larger side. Per-example constants
// are used throughout, which is the strongest form of each inequality.

inline constexpr double kDefaultTol = 1e-9;

bool check_self_bounding(const LossSpec& loss, const Vector& w,
                         const Example& z, double tol = kDefaultTol);

// At alpha = 0 this degenerates to gradient monotonicity.
bool check_cocoercivity(const LossSpec& loss, const Vector& w,
                        const Vector& w2, const Example& z,
                        double tol = kDefaultTol);

// Throws PreconditionViolation when eta > 2/L.
bool check_nonexpansive(const LossSpec& loss, const Vector& w,
                        const Vector& w2, const Example& z, double eta,
                        double tol = kDefaultTol);

bool check_expansiveness_slack(const LossSpec& loss, const Vector& w,
                               const Vector& w2, const Example& z, double eta,
                               double tol = kDefaultTol);

bool check_smoothness_upper_bound(const LossSpec& loss, const Vector& w,
                                  const Vector& w2, const Example& z,
                                  double tol = kDefaultTol);

// <w - w2, df(w) - df(w2)> >= 0 for convex kinds.
bool check_monotonicity(const LossSpec& loss, const Vector& w,
                        const Vector& w2, const Example& z,
                        double tol = kDefaultTol);

// ||df(w) - df(w2)|| <= L ||w - w2||^alpha with the per-example L.
bool check_holder(const LossSpec& loss, const Vector& w, const Vector& w2,
                  const Example& z, double tol = kDefaultTol);

}  // namespace stablab

#endif  // STABLAB_LOSSES_HPP_
