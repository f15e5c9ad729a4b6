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

#ifndef STABLAB_DATA_HPP_
#define STABLAB_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stablab/linalg.hpp"
#include "stablab/losses.hpp"

namespace stablab {

// Synthetic distributions with known moments. Features are truncated to the
// ball of radius feature_bound by rejection.
struct Distribution {
  enum class Kind { kGaussLinReg, kRealizableLinReg, kMarginClassif, kImbalancedGauss };

  Kind kind = Kind::kGaussLinReg;

  // Linear models: x ~ N(x_mean, cov), y = <w_star, x> + noise (regression)
  // or y = sign(<w_star, x>) flipped with probability flip_prob.
  Vector w_star;
  Vector x_mean;
  Matrix cov;
  double noise_sd = 0.0;
  double flip_prob = 0.0;
  // Classification only: points with |<u, x>| < margin are rejected, where
  // u = w_star / |w_star|.
  double margin = 0.0;

  // Two-class Gaussian mixture with P(y = +1) = p.
  double p = 0.5;
  Vector mu_plus;
  Vector mu_minus;
  Matrix cov_plus;
  Matrix cov_minus;

  double feature_bound = 0.0;

  static Distribution gauss_linreg(Vector w_star, Matrix cov, double noise_sd,
                                   std::optional<double> feature_bound = {},
                                   std::optional<Vector> x_mean = {});
  static Distribution realizable_linreg(Vector w_star, Matrix cov,
                                        std::optional<double> feature_bound = {},
                                        std::optional<Vector> x_mean = {});
  static Distribution margin_classif(Vector w_star, Matrix cov, double flip_prob,
                                     double margin,
                                     std::optional<double> feature_bound = {});
  static Distribution imbalanced_gauss(double p, Vector mu_plus, Vector mu_minus,
                                       Matrix cov_plus, Matrix cov_minus,
                                       std::optional<double> feature_bound = {});

  std::size_t dim() const;
  // sup |y| over the support (noise is truncated at five standard deviations).
  double label_bound() const;
  // Throws InvalidArgument on inconsistent parameters.
  void validate() const;
};

std::string_view to_string(Distribution::Kind kind);
Distribution::Kind distribution_kind_from_string(std::string_view name);

// Truncated normal noise is resampled beyond this many standard deviations.
inline constexpr double kNoiseTruncation = 5.0;

// Sequential sampler: draw k of a sampler seeded with s is the same example
// no matter how many are drawn afterwards.
class Sampler {
 public:
  Sampler(const Distribution& dist, std::uint64_t seed);
  Example next();

 private:
  Vector gaussian(const Vector& mean, const Matrix& root);

  const Distribution* dist_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  Matrix root_;
  Matrix root_minus_;
};

// A training set. Copies share storage; a neighbor differs from its base in
// one position only.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Example> examples, std::uint64_t source_seed = 0);

  std::size_t size() const { return base_ ? base_->size() : 0; }
  bool empty() const { return size() == 0; }
  std::size_t dim() const;
  std::uint64_t source_seed() const { return source_seed_; }

  const Example& operator[](std::size_t i) const {
    return (replacement_ && i == replaced_at_) ? *replacement_ : (*base_)[i];
  }

  // The dataset with position i (0-based) replaced by z.
  Dataset with_replacement(std::size_t i, Example z) const;
  std::optional<std::size_t> replaced_position() const;
  std::vector<Example> materialize() const;

 private:
  std::shared_ptr<const std::vector<Example>> base_;
  std::shared_ptr<const Example> replacement_;
  std::size_t replaced_at_ = 0;
  std::uint64_t source_seed_ = 0;
};

// n i.i.d. draws, deterministic given seed.
Dataset sample_dataset(const Distribution& dist, std::size_t n,
                       std::uint64_t seed);

struct NeighborFamily {
  Dataset base;
  Dataset ghost;
  std::vector<std::size_t> materialized;  // 0-based positions
};

// Base and ghost sample drawn with independent seeds derived from seed.
NeighborFamily make_neighbor_family(const Distribution& dist, std::size_t n,
                                    std::uint64_t seed);

// S with position i (1-based) replaced by the ghost's i-th example.
Dataset neighbor(const NeighborFamily& fam, std::size_t i);

double empirical_risk(const LossSpec& loss, const Dataset& S, const Vector& w);

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Closed form when one exists; otherwise Monte Carlo over mc_samples fresh
// draws. mc_samples = 0 requires a closed form.
RiskEstimate population_risk(const LossSpec& loss, const Distribution& dist,
                             const Vector& w, std::size_t mc_samples,
                             std::uint64_t seed);
// Always Monte Carlo.
RiskEstimate population_risk_mc(const LossSpec& loss, const Distribution& dist,
                                const Vector& w, std::size_t mc_samples,
                                std::uint64_t seed);
bool has_closed_form_risk(const LossSpec& loss, const Distribution& dist);

struct OptimalRisk {
  double value = 0.0;
  Vector w;
};

// inf_w F(w) and a minimizer, for the pairs where they are known exactly:
// least squares on linear-regression data, AUC on the Gaussian mixture and
// hinge losses on separable margin data.
OptimalRisk optimal_risk(const LossSpec& loss, const Distribution& dist);

// Smallest eigenvalue of C_S = (1/n) sum x_i x_i^T above
// threshold_ratio * (largest eigenvalue).
double min_positive_eigenvalue(const Dataset& S, double threshold_ratio = 1e-10);

double max_feature_sq_norm(const Dataset& S);
Matrix empirical_covariance(const Dataset& S);

// CSV with header y,x1,...,xd.
void save_dataset_csv(const Dataset& S, const std::string& path);
Dataset load_dataset_csv(const std::string& path);
std::string dataset_to_csv(const Dataset& S);
Dataset dataset_from_csv(const std::string& text);

}  // namespace stablab

#endif  // STABLAB_DATA_HPP_
