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

#ifndef STABLAB_CONFIG_HPP_
#define STABLAB_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablab/errors.hpp"

namespace stablab {

// Malformed or inconsistent experiment configuration.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct LossConfig {
  std::string kind = "least-squares";
  double q = 2.0;

  bool operator==(const LossConfig&) const = default;
};

struct DistributionConfig {
  std::string kind = "gauss-linreg";
  std::size_t dim = 3;
  std::vector<double> w_star;    // default: the unit vector (1,...,1)/sqrt(d)
  double cov_scale = 1.0;        // cov = cov_scale I unless cov_diag is set
  std::vector<double> cov_diag;
  double noise_sd = 0.5;
  double flip_prob = 0.0;
  double margin = 0.0;
  double p = 0.5;
  std::vector<double> mu_plus;   // default: +0.5 (1,...,1)/sqrt(d)
  std::vector<double> mu_minus;  // default: -0.5 (1,...,1)/sqrt(d)
  double cov_plus_scale = 1.0;
  double cov_minus_scale = 1.0;
  std::optional<double> feature_bound;

  bool operator==(const DistributionConfig&) const = default;
};

struct ScheduleConfig {
  std::string kind = "fixed-constant";
  double c = 1.0;
  double eta1 = 0.1;
  double theta = 0.5;
  std::optional<double> sigma;      // empty: estimated per sample
  std::optional<std::uint64_t> t0;  // empty: ceil(4 L^2 / sigma^2)
  // Divide c and eta1 by the smoothness (or Hoelder) constant L.
  bool relative_to_L = false;

  bool operator==(const ScheduleConfig&) const = default;
};

struct SweepConfig {
  std::vector<std::size_t> n_grid{64};
  std::string T_rule = "equal_n";  // equal_n, n_squared or n_pow(r)
  std::string domain = "unconstrained";
  double radius = 1.0;
  std::size_t mc_pop = 0;
  std::uint64_t K = 1;
  double lambda = 0.0;  // ridge strength for the erm check
  std::string output = "auto";
  double delta = 0.1;
  std::optional<double> slope_max;
  std::size_t hp_n = 16;
  std::uint64_t hp_T = 256;
  std::size_t hp_seeds = 1000;
  std::size_t checks = 10000;

  bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
  std::string experiment = "properties";
  std::string bound;  // bound-check variant
  std::string name;   // CSV file stem; defaults to the experiment kind
  std::uint64_t seed = 1;
  std::size_t replicates = 100;
  std::size_t neighbor_subsample = 0;
  std::size_t threads = 1;
  std::string out = ".";
  LossConfig loss;
  DistributionConfig distribution;
  ScheduleConfig schedule;
  SweepConfig sweep;

  bool operator==(const ExperimentConfig&) const = default;

  std::string display_name() const;
  // Horizon for sample size n under T_rule.
  std::uint64_t horizon(std::size_t n) const;
  void validate() const;
};

// INI text with [experiment], [loss], [distribution], [schedule] and [sweep]
// sections. Unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// Sets one key given as "section.key".
void set_config_value(ExperimentConfig& cfg, const std::string& dotted_key,
                      const std::string& value);

// Reads one key given as "section.key" in its serialized form.
std::string get_config_value(const ExperimentConfig& cfg,
                             const std::string& dotted_key);

// FNV-1a over the canonical serialization without threads and out.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

}  // namespace stablab

#endif  // STABLAB_CONFIG_HPP_
