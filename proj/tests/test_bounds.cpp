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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "stablab/bounds.hpp"
#include "stablab/data.hpp"
#include "stablab/errors.hpp"
#include "stablab/losses.hpp"
#include "stablab/seeding.hpp"

using namespace stablab;

namespace {

BoundInputs single_step(double eta, double L, std::size_t n) {
  BoundInputs in;
  in.n = n;
  in.etas = {eta};
  in.L = L;
  in.risk_path = {0.0};
  in.sqrt_risk_path = {0.0};
  in.frac_risk_path = {0.0};
  return in;
}

}  // namespace

TEST_CASE("compare to bound") {
  const BoundReport a = compare_to_bound("x", 1.0, 0.1, 0.8);
  CHECK(a.satisfied);
  CHECK(a.slack_sigma == doctest::Approx(-2.0));
  CHECK_FALSE(compare_to_bound("x", 1.0, 0.1, 0.6).satisfied);
  CHECK(std::isinf(compare_to_bound("x", 0.5, 0.0, 1.0).slack_sigma));
  CHECK_FALSE(compare_to_bound("x", 1.5, 0.0, 1.0).satisfied);
  const auto up = upper_path({1.0, 2.0}, {0.5, 0.25});
  CHECK(up[1] == 2.25);
  CHECK_THROWS_AS(upper_path({1.0}, {}), InvalidArgument);
}

TEST_CASE("smooth l1 stability") {
  BoundInputs in = single_step(1.0, 0.5, 1);
  CHECK(smooth_l1_stability_bound(in) == 0.0);
  in.sqrt_risk_path = {1.0};
  CHECK(smooth_l1_stability_bound(in) == doctest::Approx(2.0));
  in.sqrt_risk_path.clear();
  CHECK_THROWS_AS(smooth_l1_stability_bound(in), InvalidArgument);
}

TEST_CASE("smooth l2 stability") {
  BoundInputs in = single_step(1.0, 1.0, 1);
  CHECK(smooth_l2_stability_bound(in) == 0.0);
  in.risk_path = {1.0};
  in.p = 1.0;
  CHECK(smooth_l2_stability_bound(in) == doctest::Approx(16.0));
  in.p = 0.0;
  CHECK_THROWS_AS(smooth_l2_stability_bound(in), InvalidArgument);
  in.p = -1.0;
  CHECK_THROWS_AS(smooth_l2_stability_bound(in), InvalidArgument);
}

TEST_CASE("smooth l2 stability matches a hand unrolled sum") {
  const double L = 1.7;
  const double eta = 0.3;
  const std::size_t n = 5;
  for (std::size_t t = 1; t <= 4; ++t) {
    BoundInputs in;
    in.n = n;
    in.L = L;
    in.etas.assign(t, eta);
    for (std::size_t j = 0; j < t; ++j) in.risk_path.push_back(0.5 + 0.1 * j);
    const double p = static_cast<double>(n) / static_cast<double>(t);
    const double g = 1.0 + p / n;
    double s = 0.0;
    for (std::size_t j = 1; j <= t; ++j) {
      double w = 1.0;
      for (std::size_t k = 0; k < t - j; ++k) w *= g;
      s += w * eta * eta * in.risk_path[j - 1];
    }
    const double expect = 8.0 * (1.0 + 1.0 / p) * L / n * s;
    CHECK(smooth_l2_stability_bound(in) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("holder l2 stability") {
  BoundInputs in = single_step(0.0, 1.0, 2);
  in.alpha = 0.0;
  in.c = regularity_constants(0.0, 1.0, 1.0);
  CHECK(holder_l2_stability_bound(in) == 0.0);

  // alpha = 0, t = 1, p = n: c3^2 (1 + 1) eta^2 + 4 (1 + 1/n) c1^2 eta^2 / n.
  in.etas = {1.0};
  in.p = 2.0;
  in.c = RegularityConstants{2.0, 4.0, 1.0};
  CHECK(holder_l2_stability_bound(in) == doctest::Approx(2.0 + 12.0).epsilon(1e-12));

  in.alpha = 1.0;
  CHECK_THROWS_AS(holder_l2_stability_bound(in), InvalidArgument);
}

TEST_CASE("generalization bounds") {
  BoundInputs in;
  in.L = 1.0;
  in.gamma = 1.0;
  CHECK(smooth_generalization_bound(in, 0.0, 0.0) == 0.0);
  CHECK(smooth_generalization_bound(in, 0.0, 1.0) == doctest::Approx(1.0));
  in.gamma = 0.0;
  CHECK_THROWS_AS(smooth_generalization_bound(in, 0.0, 1.0), InvalidArgument);

  in.c.c1 = 2.0;
  in.gamma = 2.0;
  CHECK(holder_generalization_bound(in, 0.0, 0.0) == 0.0);
  CHECK(holder_generalization_bound(in, 0.0, 1.0) == doctest::Approx(1.0));
  in.gamma = -1.0;
  CHECK_THROWS_AS(holder_generalization_bound(in, 0.0, 1.0), InvalidArgument);

  CHECK(default_gamma_smooth(1.0, 1.0, 0.0) == 1.0);
  CHECK(default_gamma_smooth(2.0, 1.0, 0.01) == doctest::Approx(20.0));
  CHECK(default_gamma_smooth(2.0, 0.0, 0.01) == 1.0);
  // The default holder gamma minimizes the right-hand side.
  in.gamma.reset();
  const double best = holder_generalization_bound(in, 0.04, 0.3);
  for (double g : {0.5, 1.0, 4.0, 10.0}) {
    in.gamma = g;
    CHECK(holder_generalization_bound(in, 0.04, 0.3) >= best - 1e-12);
  }
}

TEST_CASE("optimization error bounds") {
  BoundInputs in;
  in.etas = {1.0};
  in.G = 0.0;
  CHECK(lipschitz_opt_error_bound(in) == 0.0);
  in.G = 1.0;
  in.reference_norm_sq = 1.0;
  CHECK(lipschitz_opt_error_bound(in) == doctest::Approx(1.0));
  in.etas = {0.0};
  CHECK_THROWS_AS(lipschitz_opt_error_bound(in), InvalidArgument);
  in.G.reset();
  in.etas = {1.0};
  CHECK_THROWS_AS(lipschitz_opt_error_bound(in), InvalidArgument);

  BoundInputs w;
  w.L = 1.0;
  w.etas = {0.25};
  CHECK(smooth_weighted_opt_error_bound(w) == 0.0);
  w.reference_norm_sq = 1.0;
  CHECK(smooth_weighted_opt_error_bound(w) == doctest::Approx(0.75));
  w.etas = {0.6};
  CHECK_THROWS_AS(smooth_weighted_opt_error_bound(w), PreconditionViolation);
  w.etas = {0.1, 0.2};
  CHECK_THROWS_AS(smooth_weighted_opt_error_bound(w), PreconditionViolation);

  BoundInputs h;
  h.alpha = 0.0;
  h.c = RegularityConstants{2.0, 4.0, 1.0};
  h.etas = {1.0};
  CHECK(holder_opt_error_bound(h) == doctest::Approx(4.0));
  h.etas = {0.0};
  CHECK_THROWS_AS(holder_opt_error_bound(h), InvalidArgument);
  h.etas = {1.0};
  h.alpha = 1.0;
  CHECK_THROWS_AS(holder_opt_error_bound(h), InvalidArgument);
}

TEST_CASE("convex and strongly convex stability") {
  BoundInputs in;
  in.n = 1;
  in.L = 1.0;
  in.G = 1.0;
  in.etas = {0.0, 0.0};
  CHECK(convex_stability_bound(in) == 0.0);
  in.etas = {1.0};
  CHECK(convex_stability_bound(in) == doctest::Approx(8.0 + 2.0 * std::sqrt(2.0)));

  BoundInputs s;
  s.n = 100;
  s.G = 1.0;
  s.sigma = 1.0;
  CHECK(strongly_convex_stability_bound(s, 60, 40) == doctest::Approx(0.08));
  double prev = strongly_convex_stability_bound(s, 60, 40);
  for (std::size_t n : {200, 400, 800, 100000}) {
    s.n = n;
    const double cur = strongly_convex_stability_bound(s, 60, 40);
    CHECK(cur < prev);
    prev = cur;
  }
  s.sigma = 0.0;
  CHECK_THROWS_AS(strongly_convex_stability_bound(s, 60, 40), InvalidArgument);
}

TEST_CASE("expansion product stays below the exponential") {
  for (double L : {0.5, 1.0, 3.0}) {
    std::vector<double> etas;
    double sq = 0.0;
    for (int j = 1; j <= 200; ++j) {
      etas.push_back(0.5 / j);
      sq += 0.25 / (j * j);
    }
    CHECK(expansion_product(etas, L) <= std::exp(L * L * sq));
  }
}

TEST_CASE("erm bound") {
  CHECK(erm_generalization_bound(1.0, 1, 2.0, 0.0) == 0.0);
  CHECK(erm_generalization_bound(1.0, 1, 2.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(erm_generalization_bound(1.0, 1, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("high probability bound") {
  const double c3 = *regularity_constants(0.5, 1.0).c3;
  for (std::uint64_t t : {1, 10, 1000}) {
    CHECK(high_prob_stability_bound(1.0, 0.5, 0.5, 1.0, 0.0, t, 10, 0.1) ==
          doctest::Approx(c3).epsilon(1e-12));
  }
  const double near_one = high_prob_stability_bound(1.0, 0.75, 0.0, 1.0, 1.0, 16, 4,
                                                    1.0 - 1e-15);
  const double second = 2.0 * 1.0 / 4.0 * std::pow(16.0, 0.25);
  CHECK(near_one == doctest::Approx(std::pow(16.0, 0.25) + second).epsilon(1e-6));
  CHECK(high_prob_stability_bound(1.0, 0.75, 0.0, 1.0, 1.0, 16, 4, 0.01) > near_one);
  CHECK_THROWS_AS(high_prob_stability_bound(1.0, 0.75, 0.0, 1.0, 1.0, 16, 4, 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(high_prob_stability_bound(1.0, 0.75, 0.0, 1.0, 1.0, 16, 4, 0.0),
                  InvalidArgument);
  CHECK_THROWS_AS(high_prob_stability_bound(1.0, 0.75, 1.0, 1.0, 1.0, 16, 4, 0.1),
                  InvalidArgument);
}

TEST_CASE("without replacement bound") {
  CHECK(without_replacement_stability_bound({{0.0, 0.0}}, 0.5, 1.0, 1.0, 2) == 0.0);
  for (double L : {1.0, 2.5}) {
    CHECK(without_replacement_stability_bound({{1.0}}, 0.0, L, 1.0, 1) ==
          doctest::Approx(2.0 + L));
  }
}

TEST_CASE("nonconvex recurrence") {
  CHECK(nonconvex_l2_recurrence(0.0, 0.3, 1.0, 1.0, 4, 0.0) == 0.0);
  CHECK(nonconvex_l2_recurrence(1.0, 0.0, 1.0, 2.0, 4, 5.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(nonconvex_l2_recurrence(1.0, 0.1, 1.0, 0.0, 4, 1.0), InvalidArgument);
  const std::vector<double> etas = {0.2, 0.1};
  const std::vector<double> risk = {1.0, 0.5};
  const double step1 = nonconvex_l2_recurrence(0.0, 0.2, 2.0, 1.0, 3, 1.0);
  const double step2 = nonconvex_l2_recurrence(step1, 0.1, 2.0, 1.0, 3, 0.5);
  CHECK(nonconvex_l2_stability_bound(etas, 2.0, 1.0, 3, risk) == step2);
}

TEST_CASE("chernoff threshold") {
  CHECK(chernoff_exceedance_threshold(3.0, std::exp(-1.0)) == doctest::Approx(6.0));
  CHECK(chernoff_exceedance_threshold(3.0, 1.0 - 1e-15) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK_THROWS_AS(chernoff_exceedance_threshold(0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(chernoff_exceedance_threshold(1.0, 1.5), InvalidArgument);

  // Visits to one index over T uniform draws from n.
  const std::size_t n = 10;
  const std::uint64_t T = 100;
  const double delta = 0.1;
  const double threshold = chernoff_exceedance_threshold(static_cast<double>(T) / n, delta);
  const std::size_t trials = 10000;
  std::size_t exceed = 0;
  for (std::size_t r = 0; r < trials; ++r) {
    const IndexStream stream(derive_seed(99, seed_tag::kIndexStream, r));
    std::size_t hits = 0;
    for (std::uint64_t t = 1; t <= T; ++t) hits += stream.uniform(t, n) == 0 ? 1 : 0;
    if (static_cast<double>(hits) > threshold) ++exceed;
  }
  CHECK(static_cast<double>(exceed) / trials <= delta);
}

TEST_CASE("bounds are monotone in risks and steps") {
  BoundInputs in;
  in.n = 8;
  in.L = 1.3;
  in.G = 2.0;
  in.alpha = 0.5;
  in.c = regularity_constants(0.5, 1.3);
  in.etas = {0.3, 0.2, 0.1};
  in.risk_path = {0.5, 0.4, 0.3};
  in.sqrt_risk_path = {0.7, 0.6, 0.5};
  in.frac_risk_path = {0.6, 0.5, 0.4};
  in.p = 1.0;

  auto all = [](const BoundInputs& b) {
    return std::vector<double>{smooth_l1_stability_bound(b), smooth_l2_stability_bound(b),
                               holder_l2_stability_bound(b), convex_stability_bound(b),
                               nonconvex_l2_stability_bound(b.etas, b.L, *b.p, b.n,
                                                            b.risk_path)};
  };
  const auto base = all(in);
  for (double x : base) CHECK(x >= 0.0);
  for (std::size_t j = 0; j < 3; ++j) {
    BoundInputs up = in;
    up.risk_path[j] += 0.1;
    up.sqrt_risk_path[j] += 0.1;
    up.frac_risk_path[j] += 0.1;
    const auto r = all(up);
    for (std::size_t k = 0; k < base.size(); ++k) CHECK(r[k] >= base[k]);
    up = in;
    up.etas[j] += 0.05;
    const auto e = all(up);
    for (std::size_t k = 0; k < base.size(); ++k) CHECK(e[k] >= base[k]);
  }
}

TEST_CASE("ridge erm solves the normal equations") {
  const Distribution d = Distribution::gauss_linreg(Vector::Ones(3), Matrix::Identity(3, 3), 0.5);
  const Dataset S = sample_dataset(d, 40, 3);
  const double lambda = 0.1;
  const Vector w = ridge_erm(S, lambda);
  Vector grad = lambda * w;
  for (std::size_t i = 0; i < S.size(); ++i) {
    grad += (w.dot(S[i].x) - S[i].y) * S[i].x / static_cast<double>(S.size());
  }
  CHECK(grad.norm() < 1e-10);
  CHECK_THROWS_AS(ridge_erm(S, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ridge_erm(Dataset(), 0.1), InvalidArgument);
}
