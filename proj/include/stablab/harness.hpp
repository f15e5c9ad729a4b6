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

#ifndef STABLAB_HARNESS_HPP_
#define STABLAB_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stablab/config.hpp"
#include "stablab/data.hpp"
#include "stablab/losses.hpp"
#include "stablab/optim.hpp"

namespace stablab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitGateFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitResourceLimit = 3;

inline constexpr const char* kCsvHeader =
    "experiment,config_hash,seed,n,T,theta,metric,value,stderr,bound_rhs,satisfied";

struct CsvRow {
  std::string metric;
  std::size_t n = 0;
  std::uint64_t T = 0;
  std::optional<double> theta;
  double value = 0.0;
  double std_error = 0.0;
  std::optional<double> bound_rhs;
  std::optional<bool> satisfied;  // rows with a value here are gates
};

struct ExperimentResult {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<CsvRow> rows;

  std::size_t gates_total() const;
  std::size_t gates_failed() const;
  int exit_code() const;
  std::string csv() const;
};

// Writes <out_dir>/<name>.csv and returns the path.
std::string write_csv(const ExperimentResult& result, const std::string& out_dir);

struct RateFit {
  std::vector<std::pair<double, double>> points;  // (log n, log metric)
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares on (log n, log metric); needs >= 3 points with
// positive n and metric.
RateFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

// Builders shared by the experiments and the C API.
Distribution build_distribution(const DistributionConfig& cfg);
LossSpec build_loss(const LossConfig& cfg, const Distribution& dist);
StepSchedule build_schedule(const ScheduleConfig& cfg, std::uint64_t T,
                            double L);
Domain build_domain(const SweepConfig& cfg);

// Runs one experiment. Throws ConfigError (or another InvalidArgument) on bad
// configurations and ResourceLimit when a guard trips.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Maps an exception raised by run_experiment to the CLI exit code.
int exit_code_for_exception(const std::exception& e);

}  // namespace stablab

#endif  // STABLAB_HARNESS_HPP_
