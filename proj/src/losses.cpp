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

#include "stablab/losses.hpp"

#include <algorithm>
#include <cmath>

#include "stablab/errors.hpp"

namespace stablab {
namespace {

void require_dims(const Vector& w, const Example& z) {
  if (w.size() != z.x.size()) {
    throw InvalidArgument("dimension mismatch: w has " +
                          std::to_string(w.size()) + " entries, x has " +
                          std::to_string(z.x.size()));
  }
}

void require_q(double q) {
  if (!(q >= 1.0 && q <= 2.0)) {
    throw InvalidArgument("q must lie in [1, 2]");
  }
}

// lhs <= rhs up to tol absolute plus tol relative to the dominant side.
bool within(double lhs, double rhs, double tol) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return lhs <= rhs + tol + tol * scale;
}

// f^(alpha/(1+alpha)) with the convention f^0 = 1.
double holder_power(double f, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(std::max(f, 0.0), exponent);
}

Vector auc_delta(const LossSpec& loss) {
  return loss.auc.x_minus - loss.auc.x_plus;
}

Matrix auc_hessian(const LossSpec& loss, const Example& z) {
  const double p = loss.auc.p;
  const Vector delta = auc_delta(loss);
  const Vector& x = z.x;
  Matrix h;
  if (z.y > 0) {
    const Vector c = x - loss.auc.x_plus;
    h = 2.0 * (1.0 - p) *
        (c * c.transpose() - delta * x.transpose() - x * delta.transpose());
  } else {
    const Vector c = x - loss.auc.x_minus;
    h = 2.0 * p *
        (c * c.transpose() + delta * x.transpose() + x * delta.transpose());
  }
  h -= 2.0 * p * (1.0 - p) * delta * delta.transpose();
  return h;
}

void require_convex(const LossSpec& loss, const char* what) {
  if (!loss.convex_per_example) {
    throw PreconditionViolation(std::string(what) +
                                " requires a loss that is convex per example");
  }
}

void require_smooth(const LossSpec& loss, const char* what) {
  if (!loss.smooth_per_example) {
    throw PreconditionViolation(std::string(what) +
                                " requires a smooth loss (alpha = 1)");
  }
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kLeastSquares:
      return "least-squares";
    case LossKind::kQNormHinge:
      return "qnorm-hinge";
    case LossKind::kQPowerAbsolute:
      return "qpower-absolute";
    case LossKind::kAucSquare:
      return "auc-square";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "least-squares") return LossKind::kLeastSquares;
  if (name == "qnorm-hinge" || name == "hinge") return LossKind::kQNormHinge;
  if (name == "qpower-absolute") return LossKind::kQPowerAbsolute;
  if (name == "auc-square") return LossKind::kAucSquare;
  throw InvalidArgument("unknown loss kind '" + std::string(name) + "'");
}

LossSpec LossSpec::least_squares(double smoothness_L) {
  if (!(smoothness_L > 0.0)) {
    throw InvalidArgument("least squares smoothness constant must be > 0");
  }
  LossSpec s;
  s.kind = LossKind::kLeastSquares;
  s.q = 2.0;
  s.alpha = 1.0;
  s.holder_L = smoothness_L;
  s.lipschitz_G.reset();
  s.convex_per_example = true;
  s.smooth_per_example = true;
  return s;
}

LossSpec LossSpec::qnorm_hinge(double q, double feature_bound) {
  require_q(q);
  if (!(feature_bound > 0.0)) {
    throw InvalidArgument("feature bound must be > 0");
  }
  LossSpec s;
  s.kind = LossKind::kQNormHinge;
  s.q = q;
  s.alpha = q - 1.0;
  s.holder_L = q * std::pow(feature_bound, q);
  s.grad_at_zero = q * feature_bound;
  if (q == 1.0) s.lipschitz_G = feature_bound;
  s.convex_per_example = true;
  s.smooth_per_example = (q == 2.0);
  return s;
}

LossSpec LossSpec::qpower_absolute(double q, double feature_bound,
                                   double label_bound) {
  require_q(q);
  if (!(feature_bound > 0.0) || !(label_bound >= 0.0)) {
    throw InvalidArgument("feature bound must be > 0, label bound >= 0");
  }
  LossSpec s;
  s.kind = LossKind::kQPowerAbsolute;
  s.q = q;
  s.alpha = q - 1.0;
  s.holder_L = q * std::pow(2.0, 2.0 - q) * std::pow(feature_bound, q);
  s.grad_at_zero = q * std::pow(label_bound, q - 1.0) * feature_bound;
  if (q == 1.0) s.lipschitz_G = feature_bound;
  s.convex_per_example = true;
  s.smooth_per_example = (q == 2.0);
  return s;
}

LossSpec LossSpec::auc_square(double p, Vector x_plus, Vector x_minus,
                              double feature_bound) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  if (x_plus.size() != x_minus.size() || x_plus.size() == 0) {
    throw InvalidArgument("class means must share a positive dimension");
  }
  if (!(feature_bound > 0.0)) {
    throw InvalidArgument("feature bound must be > 0");
  }
  LossSpec s;
  s.kind = LossKind::kAucSquare;
  s.q = 2.0;
  s.alpha = 1.0;
  const double m = std::max(x_plus.norm(), x_minus.norm());
  const double dn = (x_minus - x_plus).norm();
  const double X = feature_bound;
  s.holder_L = 2.0 * std::max(p, 1.0 - p) *
                   ((X + m) * (X + m) + 2.0 * X * dn) +
               2.0 * p * (1.0 - p) * dn * dn;
  s.convex_per_example = false;
  s.smooth_per_example = true;
  s.auc = AucMoments{p, std::move(x_plus), std::move(x_minus)};
  // grad at 0 is -+2(.)x: bounded by 2 max(p, 1-p) X.
  s.grad_at_zero = 2.0 * std::max(p, 1.0 - p) * X;
  return s;
}

double loss_value(const LossSpec& loss, const Vector& w, const Example& z) {
  require_dims(w, z);
  const double wx = w.dot(z.x);
  switch (loss.kind) {
    case LossKind::kLeastSquares: {
      const double r = wx - z.y;
      return 0.5 * r * r;
    }
    case LossKind::kQNormHinge: {
      const double u = 1.0 - z.y * wx;
      return u > 0.0 ? std::pow(u, loss.q) : 0.0;
    }
    case LossKind::kQPowerAbsolute:
      return std::pow(std::abs(z.y - wx), loss.q);
    case LossKind::kAucSquare: {
      const double p = loss.auc.p;
      const double wd = w.dot(auc_delta(loss));
      double f = p * (1.0 - p) - p * (1.0 - p) * wd * wd;
      if (z.y > 0) {
        const double a = wx - w.dot(loss.auc.x_plus);
        f += (1.0 - p) * a * a - 2.0 * (1.0 + wd) * wx * (1.0 - p);
      } else {
        const double a = wx - w.dot(loss.auc.x_minus);
        f += p * a * a + 2.0 * (1.0 + wd) * wx * p;
      }
      return f;
    }
  }
  return 0.0;
}

void add_scaled_subgradient(const LossSpec& loss, const Vector& w,
                            const Example& z, double scale, Vector& target) {
  require_dims(w, z);
  const double wx = w.dot(z.x);
  switch (loss.kind) {
    case LossKind::kLeastSquares:
      target.noalias() += (scale * (wx - z.y)) * z.x;
      return;
    case LossKind::kQNormHinge: {
      const double u = 1.0 - z.y * wx;
      if (u <= 0.0) return;  // kink and flat part: 0 is a subgradient
      const double g = loss.q == 1.0 ? 1.0 : loss.q * std::pow(u, loss.q - 1.0);
      target.noalias() += (-scale * g * z.y) * z.x;
      return;
    }
    case LossKind::kQPowerAbsolute: {
      const double r = z.y - wx;
      if (r == 0.0) return;
      const double mag =
          loss.q == 1.0 ? 1.0 : loss.q * std::pow(std::abs(r), loss.q - 1.0);
      target.noalias() += (-scale * (r > 0.0 ? mag : -mag)) * z.x;
      return;
    }
    case LossKind::kAucSquare: {
      const double p = loss.auc.p;
      const Vector delta = auc_delta(loss);
      const double wd = w.dot(delta);
      if (z.y > 0) {
        const Vector c = z.x - loss.auc.x_plus;
        const double k = 2.0 * (1.0 - p);
        target.noalias() += (scale * k * w.dot(c)) * c;
        target.noalias() -= (scale * k * (1.0 + wd)) * z.x;
        target.noalias() -= (scale * k * wx) * delta;
      } else {
        const Vector c = z.x - loss.auc.x_minus;
        const double k = 2.0 * p;
        target.noalias() += (scale * k * w.dot(c)) * c;
        target.noalias() += (scale * k * (1.0 + wd)) * z.x;
        target.noalias() += (scale * k * wx) * delta;
      }
      target.noalias() -= (scale * 2.0 * p * (1.0 - p) * wd) * delta;
      return;
    }
  }
}

Vector loss_subgradient(const LossSpec& loss, const Vector& w,
                        const Example& z) {
  Vector g = Vector::Zero(w.size());
  add_scaled_subgradient(loss, w, z, 1.0, g);
  return g;
}

RegularityConstants regularity_constants(double alpha, double L,
                                         std::optional<double> g0) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1]");
  }
  if (!(L > 0.0)) throw InvalidArgument("L must be > 0");
  RegularityConstants rc;
  if (alpha == 0.0) {
    if (!g0) throw InvalidArgument("alpha = 0 requires sup_z ||df(0;z)||");
    rc.c1 = *g0 + L;
    rc.c2 = rc.c1 * rc.c1;
  } else {
    rc.c1 = std::pow(1.0 + 1.0 / alpha, alpha / (1.0 + alpha)) *
            std::pow(L, 1.0 / (1.0 + alpha));
    if (alpha < 1.0) {
      rc.c2 = (1.0 - alpha) / (1.0 + alpha) *
              std::pow(2.0 * alpha / (1.0 + alpha),
                       2.0 * alpha / (1.0 - alpha)) *
              std::pow(rc.c1, (2.0 + 2.0 * alpha) / (1.0 - alpha));
    }
  }
  if (alpha < 1.0) {
    rc.c3 = std::sqrt(1.0 - alpha) / std::sqrt(1.0 + alpha) *
            std::pow(std::pow(2.0, -alpha) * L, 1.0 / (1.0 - alpha));
  }
  return rc;
}

double example_holder_constant(const LossSpec& loss, const Example& z) {
  const double xn = z.x.norm();
  switch (loss.kind) {
    case LossKind::kLeastSquares:
      return xn * xn;
    case LossKind::kQNormHinge:
      return loss.q * std::pow(xn, loss.q);
    case LossKind::kQPowerAbsolute:
      return loss.q * std::pow(2.0, 2.0 - loss.q) * std::pow(xn, loss.q);
    case LossKind::kAucSquare: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(auc_hessian(loss, z),
                                               Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
  }
  return 0.0;
}

RegularityConstants example_constants(const LossSpec& loss, const Example& z) {
  // A zero feature vector makes every per-example constant vanish; keep L
  // strictly positive so the constants stay defined (they only grow with L).
  const double L = std::max(example_holder_constant(loss, z), 1e-300);
  const double g0 = loss_subgradient(loss, Vector::Zero(z.x.size()), z).norm();
  return regularity_constants(loss.alpha, L, g0);
}

Matrix example_hessian(const LossSpec& loss, const Example& z) {
  switch (loss.kind) {
    case LossKind::kLeastSquares:
      return z.x * z.x.transpose();
    case LossKind::kAucSquare:
      return auc_hessian(loss, z);
    default:
      throw InvalidArgument("no Hessian for " + std::string(to_string(loss.kind)));
  }
}

double lipschitz_on_ball(const LossSpec& loss, double radius,
                         double feature_bound, double label_bound) {
  if (!(radius >= 0.0) || !(feature_bound >= 0.0) || !(label_bound >= 0.0)) {
    throw InvalidArgument("radius and bounds must be nonnegative");
  }
  const double R = radius;
  const double X = feature_bound;
  const double Y = label_bound;
  switch (loss.kind) {
    case LossKind::kLeastSquares:
      return (R * X + Y) * X;
    case LossKind::kQNormHinge:
      return loss.q * std::pow(1.0 + R * X, loss.q - 1.0) * X;
    case LossKind::kQPowerAbsolute:
      return loss.q * std::pow(Y + R * X, loss.q - 1.0) * X;
    case LossKind::kAucSquare: {
      const double p = loss.auc.p;
      const double m = std::max(loss.auc.x_plus.norm(), loss.auc.x_minus.norm());
      const double dn = auc_delta(loss).norm();
      return 2.0 * std::max(p, 1.0 - p) *
                 (R * (X + m) * (X + m) + X + 2.0 * R * dn * X) +
             2.0 * p * (1.0 - p) * R * dn * dn;
    }
  }
  return 0.0;
}

bool check_self_bounding(const LossSpec& loss, const Vector& w,
                         const Example& z, double tol) {
  if (!loss.nonnegative()) {
    throw PreconditionViolation("self-bounding requires a nonnegative loss");
  }
  const RegularityConstants rc = example_constants(loss, z);
  const double g = loss_subgradient(loss, w, z).norm();
  const double f = loss_value(loss, w, z);
  const double rhs = rc.c1 * holder_power(f, loss.alpha / (1.0 + loss.alpha));
  return within(g, rhs, tol);
}

bool check_monotonicity(const LossSpec& loss, const Vector& w,
                        const Vector& w2, const Example& z, double tol) {
  require_convex(loss, "monotonicity");
  const Vector dg = loss_subgradient(loss, w, z) - loss_subgradient(loss, w2, z);
  const Vector dw = w - w2;
  // Scale for the relative part: the product of the two norms.
  return within(0.0, dw.dot(dg), tol * (1.0 + dw.norm() * dg.norm()));
}

bool check_cocoercivity(const LossSpec& loss, const Vector& w,
                        const Vector& w2, const Example& z, double tol) {
  require_convex(loss, "co-coercivity");
  if (loss.alpha == 0.0) return check_monotonicity(loss, w, w2, z, tol);
  const double a = loss.alpha;
  const double L = example_holder_constant(loss, z);
  const Vector dg = loss_subgradient(loss, w, z) - loss_subgradient(loss, w2, z);
  const double lhs = (w - w2).dot(dg);
  if (L == 0.0) return within(0.0, lhs, tol);
  const double rhs = 2.0 * std::pow(L, -1.0 / a) * a / (1.0 + a) *
                     std::pow(dg.norm(), (1.0 + a) / a);
  return within(rhs, lhs, tol);
}

bool check_nonexpansive(const LossSpec& loss, const Vector& w,
                        const Vector& w2, const Example& z, double eta,
                        double tol) {
  require_convex(loss, "non-expansiveness");
  require_smooth(loss, "non-expansiveness");
  const double L = example_holder_constant(loss, z);
  if (eta < 0.0 || eta * L > 2.0 * (1.0 + 1e-12)) {
    throw PreconditionViolation("non-expansiveness requires 0 <= eta <= 2/L");
  }
  Vector u = w;
  add_scaled_subgradient(loss, w, z, -eta, u);
  Vector v = w2;
  add_scaled_subgradient(loss, w2, z, -eta, v);
  return within((u - v).norm(), (w - w2).norm(), tol);
}

bool check_expansiveness_slack(const LossSpec& loss, const Vector& w,
                               const Vector& w2, const Example& z, double eta,
                               double tol) {
  require_convex(loss, "expansiveness");
  if (!(loss.alpha < 1.0)) {
    throw PreconditionViolation("expansiveness slack requires alpha < 1");
  }
  if (eta < 0.0) throw InvalidArgument("eta must be nonnegative");
  const RegularityConstants rc = example_constants(loss, z);
  Vector u = w;
  add_scaled_subgradient(loss, w, z, -eta, u);
  Vector v = w2;
  add_scaled_subgradient(loss, w2, z, -eta, v);
  const double lhs = (u - v).squaredNorm();
  const double c3 = *rc.c3;
  const double rhs = (w - w2).squaredNorm() +
                     c3 * c3 * std::pow(eta, 2.0 / (1.0 - loss.alpha));
  return within(lhs, rhs, tol);
}

bool check_smoothness_upper_bound(const LossSpec& loss, const Vector& w,
                                  const Vector& w2, const Example& z,
                                  double tol) {
  require_smooth(loss, "the quadratic upper bound");
  const double L = example_holder_constant(loss, z);
  const Vector d = w - w2;
  const double lhs = loss_value(loss, w, z);
  const double rhs = loss_value(loss, w2, z) +
                     d.dot(loss_subgradient(loss, w2, z)) +
                     0.5 * L * d.squaredNorm();
  return within(lhs, rhs, tol);
}

bool check_holder(const LossSpec& loss, const Vector& w, const Vector& w2,
                  const Example& z, double tol) {
  const double L = example_holder_constant(loss, z);
  const double lhs =
      (loss_subgradient(loss, w, z) - loss_subgradient(loss, w2, z)).norm();
  const double dist = (w - w2).norm();
  const double rhs = loss.alpha == 0.0 ? L : L * std::pow(dist, loss.alpha);
  return within(lhs, rhs, tol);
}

}  // namespace stablab
