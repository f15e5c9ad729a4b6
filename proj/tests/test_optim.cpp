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
#include "stablab/data.hpp"
#include "stablab/errors.hpp"
#include "stablab/optim.hpp"
#include "stablab/seeding.hpp"

using namespace stablab;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) out[k++] = x;
  return out;
}

Dataset scalar_data(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<Example> ex;
  for (const auto& [x, y] : xy) ex.push_back({v({x}), y});
  return Dataset(std::move(ex));
}

Dataset gauss_sample(std::size_t n, std::uint64_t seed) {
  const Distribution d =
      Distribution::gauss_linreg(v({1.0, -0.5, 0.25}), Matrix::Identity(3, 3), 0.3);
  return sample_dataset(d, n, seed);
}

}  // namespace

TEST_CASE("step schedules") {
  CHECK(StepSchedule::horizon_constant(2.0, 16).eta(5) == doctest::Approx(0.5));
  CHECK(StepSchedule::poly_decay(1.0, 0.5).eta(4) == doctest::Approx(0.5));
  CHECK(StepSchedule::horizon_poly(1.0, 0.75, 16).eta(3) == doctest::Approx(0.125));
  CHECK(StepSchedule::strongly_convex(2.0, 3).eta(1) == doctest::Approx(0.25));
  CHECK(StepSchedule::fixed_constant(0.3).eta(1000) == 0.3);
  const auto etas = StepSchedule::poly_decay(1.0, 1.0).etas(4);
  REQUIRE(etas.size() == 4);
  CHECK(etas[3] == doctest::Approx(0.25));
  CHECK_THROWS_AS(StepSchedule::fixed_constant(0.3).eta(0), InvalidArgument);
  CHECK_THROWS_AS(StepSchedule::poly_decay(1.0, 1.5), InvalidArgument);
  CHECK_THROWS_AS(StepSchedule::fixed_constant(-1.0), InvalidArgument);
  CHECK_THROWS_AS(StepSchedule::horizon_constant(1.0, 8).check_horizon(9), InvalidArgument);
  CHECK_NOTHROW(StepSchedule::horizon_constant(1.0, 8).check_horizon(8));
  CHECK_NOTHROW(StepSchedule::horizon_constant(1.0, 8).check_horizon(0));
  CHECK(schedule_kind_from_string("horizon-poly") == StepSchedule::Kind::kHorizonPoly);
  CHECK_THROWS_AS(schedule_kind_from_string("cosine"), InvalidArgument);
}

TEST_CASE("t0 for strong convexity") {
  CHECK(t0_for_strong_convexity(1.0, 1.0) == 4);
  CHECK(t0_for_strong_convexity(2.0, 1.0) == 16);
  CHECK(t0_for_strong_convexity(1.0, 2.0) == 1);
  CHECK_THROWS_AS(t0_for_strong_convexity(1.0, 0.0), InvalidArgument);
}

TEST_CASE("projection") {
  const Vector a = project(Domain::ball(5.0), v({3, 4}));
  CHECK(a[0] == 3.0);
  CHECK(a[1] == 4.0);
  const Vector b = project(Domain::ball(1.0), v({3, 4}));
  CHECK(b[0] == doctest::Approx(0.6));
  CHECK(b[1] == doctest::Approx(0.8));
  const Vector c = project(Domain::unconstrained(), v({30, -40}));
  CHECK(c[0] == 30.0);
  CHECK(Domain::ball(1.0).contains(b, 1e-12));
  CHECK_FALSE(Domain::ball(1.0).contains(v({3, 4})));
  CHECK_THROWS_AS(Domain::ball(0.0), InvalidArgument);
}

TEST_CASE("proximal maps") {
  const Vector a = prox(Regularizer::l2(1.0), 1.0, v({2}));
  CHECK(a[0] == doctest::Approx(1.0));
  const Vector b = prox(Regularizer::l1(1.0), 0.5, v({0.4, -0.5, 2.0}));
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == doctest::Approx(1.5));
  const Vector c = prox(Regularizer::none(), 3.0, v({2, -7}));
  CHECK(c[1] == -7.0);
  CHECK_THROWS_AS(Regularizer::l1(-1.0), InvalidArgument);
}

TEST_CASE("single hand-computed SGD step") {
  std::vector<Example> ex{{v({1, 0}), 1.0}};
  const Dataset S(ex);
  const Trajectory tr = sgd_run(LossSpec::least_squares(1.0), S, StepSchedule::fixed_constant(0.5),
                                Domain::unconstrained(), 1, 9);
  CHECK(tr.final[0] == 0.5);
  CHECK(tr.final[1] == 0.0);
  const Trajectory zero = sgd_run(LossSpec::least_squares(1.0), S,
                                  StepSchedule::fixed_constant(0.0), Domain::unconstrained(), 1, 9);
  CHECK(zero.final.norm() == 0.0);
}

TEST_CASE("two steps match a scalar recursion") {
  const Dataset S = scalar_data({{1.0, 1.0}});
  const Trajectory tr = sgd_run(LossSpec::least_squares(1.0), S, StepSchedule::fixed_constant(0.5),
                                Domain::unconstrained(), 2, 1);
  double w = 0.0;
  for (int t = 0; t < 2; ++t) w -= 0.5 * (w - 1.0);
  CHECK(w == 0.75);
  CHECK(tr.final[0] == w);
  // Averages over w_1 = 0 and w_2 = 0.5.
  CHECK(tr.avg_eta[0] == doctest::Approx(0.25));
  CHECK(tr.avg_linear[0] == doctest::Approx((1 * 0.0 + 2 * 0.5) / 3.0));
  REQUIRE(tr.per_step_risk.size() == 2);
  CHECK(tr.per_step_risk[0] == 0.5);
  CHECK(tr.per_step_risk[1] == 0.125);
}

TEST_CASE("runs are reproducible and honor the index stream") {
  const Dataset S = gauss_sample(10, 3);
  const LossSpec ls = LossSpec::least_squares(20.0);
  const StepSchedule s = StepSchedule::fixed_constant(0.02);
  const Trajectory a = sgd_run(ls, S, s, Domain::unconstrained(), 50, 77);
  const Trajectory b = sgd_run(ls, S, s, Domain::unconstrained(), 50, 77);
  CHECK(a.final == b.final);
  std::vector<std::size_t> idx;
  IndexStream stream(77);
  for (std::uint64_t t = 1; t <= 50; ++t) idx.push_back(stream.uniform(t, 10));
  const Trajectory c = sgd_run_indices(ls, S, s, Domain::unconstrained(), idx);
  CHECK(a.final == c.final);
  const Trajectory d = sgd_run(ls, S, s, Domain::unconstrained(), 50, 78);
  CHECK(a.final != d.final);
}

TEST_CASE("projected iterates stay in the ball") {
  const Dataset S = gauss_sample(20, 4);
  RunOptions opts;
  opts.record_every = 1;
  const Trajectory tr = sgd_run(LossSpec::least_squares(20.0), S, StepSchedule::fixed_constant(0.05),
                                Domain::ball(0.3), 100, 5, opts);
  CHECK(tr.iterates.size() == 100);
  for (const Vector& w : tr.iterates) CHECK(w.norm() <= 0.3 + 1e-12);
  CHECK(tr.final.norm() <= 0.3 + 1e-12);
}

TEST_CASE("risk checkpoints") {
  const Dataset S = gauss_sample(8, 6);
  RunOptions opts;
  opts.risk_checkpoints = 1000;
  const LossSpec ls = LossSpec::least_squares(20.0);
  const Trajectory tr = sgd_run(ls, S, StepSchedule::fixed_constant(0.01), Domain::unconstrained(),
                                40, 7, opts);
  REQUIRE(tr.full_risk.size() == 40);
  CHECK(tr.full_risk[0] == doctest::Approx(empirical_risk(ls, S, Vector::Zero(3))));
  opts.risk_checkpoints = 4;
  const Trajectory sparse = sgd_run(ls, S, StepSchedule::fixed_constant(0.01),
                                    Domain::unconstrained(), 40, 7, opts);
  REQUIRE(sparse.full_risk.size() == 40);
  for (std::size_t t = 0; t < 40; ++t) CHECK(sparse.full_risk[t] >= tr.full_risk[t] - 1e-12);
}

TEST_CASE("proximal SGD without a regularizer is plain SGD") {
  const Dataset S = gauss_sample(12, 8);
  const LossSpec h = LossSpec::qnorm_hinge(1.0, 10.0);
  const StepSchedule s = StepSchedule::poly_decay(0.1, 0.5);
  const Trajectory a = sgd_run(h, S, s, Domain::unconstrained(), 60, 3);
  const Trajectory b = spgd_run(h, Regularizer::none(), S, s, 60, 3);
  CHECK(a.final == b.final);
  CHECK(a.avg_eta == b.avg_eta);
  CHECK(a.per_step_risk == b.per_step_risk);
  const Trajectory c = spgd_run(h, Regularizer::l2(0.5), S, s, 60, 3);
  CHECK(c.final.norm() < a.final.norm());
}

TEST_CASE("without-replacement passes") {
  const LossSpec ls = LossSpec::least_squares(1.0);
  const Dataset one = scalar_data({{1.0, 2.0}});
  const Trajectory a = sgd_without_replacement_run(ls, one, StepSchedule::fixed_constant(0.5), 1, 4);
  const std::vector<std::size_t> idx{0};
  const Trajectory b = sgd_run_indices(ls, one, StepSchedule::fixed_constant(0.5),
                                       Domain::unconstrained(), idx);
  CHECK(a.final == b.final);

  const Dataset two = scalar_data({{1.0, 1.0}, {2.0, 0.0}});
  const std::vector<std::vector<std::size_t>> perm{{0, 1}};
  const Trajectory c = sgd_permutations_run(ls, two, StepSchedule::fixed_constant(0.25), perm);
  double w = 0.0;
  w -= 0.25 * (w * 1.0 - 1.0) * 1.0;
  w -= 0.25 * (w * 2.0 - 0.0) * 2.0;
  CHECK(c.final[0] == doctest::Approx(w).epsilon(1e-15));

  const Trajectory zero =
      sgd_without_replacement_run(ls, two, StepSchedule::fixed_constant(0.0), 3, 4);
  CHECK(zero.final.norm() == 0.0);
  CHECK(zero.steps == 6);

  const std::vector<std::vector<std::size_t>> bad{{0, 0}};
  CHECK_THROWS_AS(sgd_permutations_run(ls, two, StepSchedule::fixed_constant(0.1), bad),
                  InvalidArgument);
}

TEST_CASE("each epoch visits every example once") {
  const Dataset S = gauss_sample(7, 9);
  IndexStream stream(21);
  std::vector<std::vector<std::size_t>> perms;
  for (std::uint64_t k = 1; k <= 3; ++k) perms.push_back(stream.permutation(k, 7));
  const LossSpec ls = LossSpec::least_squares(20.0);
  const StepSchedule s = StepSchedule::poly_decay(0.05, 0.5);
  const Trajectory a = sgd_without_replacement_run(ls, S, s, 3, 21);
  const Trajectory b = sgd_permutations_run(ls, S, s, perms);
  CHECK(a.final == b.final);
}

TEST_CASE("output selection") {
  CHECK(default_output(StepSchedule::strongly_convex(1.0, 4)) == OutputKind::kAvgLinear);
  CHECK(default_output(StepSchedule::fixed_constant(0.1)) == OutputKind::kAvgEta);
  CHECK(output_kind_from_string("avg-eta") == OutputKind::kAvgEta);
  CHECK_THROWS_AS(output_kind_from_string("best"), InvalidArgument);
  const Dataset S = scalar_data({{1.0, 1.0}});
  const Trajectory tr = sgd_run(LossSpec::least_squares(1.0), S, StepSchedule::fixed_constant(0.0),
                                Domain::unconstrained(), 0, 1);
  CHECK(select_output(tr, OutputKind::kAvgEta).norm() == 0.0);
  CHECK(tr.final.norm() == 0.0);
}
