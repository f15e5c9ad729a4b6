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

#include <filesystem>
#include <string>

#include "doctest.h"
#include "stablab/config.hpp"

using namespace stablab;

#ifndef STABLAB_CONFIG_DIR
#define STABLAB_CONFIG_DIR "configs"
#endif

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults are valid") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_config("") == cfg);
  CHECK(cfg.display_name() == "properties");
}

TEST_CASE("parse a full config") {
  const ExperimentConfig cfg = parse_config(R"(
# comment
[experiment]
kind = bound-check
bound = nonsmooth
seed = 42
replicates = 17

[loss]
kind = qnorm-hinge
q = 1.5

[distribution]
kind = margin-classif
dim = 2
w_star = 1, 0
margin = 0.2
feature_bound = 3

[schedule]
kind = horizon-poly
c = 0.5
theta = 0.75
relative_to_L = true

[sweep]
n_grid = 8, 16
T_rule = n_squared
mc_pop = 500
)");
  CHECK(cfg.experiment == "bound-check");
  CHECK(cfg.display_name() == "bound-check-nonsmooth");
  CHECK(cfg.seed == 42);
  CHECK(cfg.loss.q == 1.5);
  CHECK(cfg.distribution.w_star == std::vector<double>{1.0, 0.0});
  CHECK(cfg.distribution.feature_bound == 3.0);
  CHECK(cfg.schedule.relative_to_L);
  CHECK(cfg.sweep.n_grid == std::vector<std::size_t>{8, 16});
  CHECK(cfg.horizon(16) == 256);
}

TEST_CASE("serialization round trips") {
  ExperimentConfig cfg;
  cfg.experiment = "rate-fit";
  cfg.sweep.n_grid = {4, 8, 16};
  cfg.sweep.slope_max = -0.4;
  cfg.schedule.sigma = 0.25;
  cfg.schedule.t0 = 9;
  cfg.distribution.cov_diag = {1.0, 0.5, 0.1 + 0.2};
  cfg.distribution.feature_bound = 2.5;
  cfg.name = "x";
  CHECK(parse_config(serialize_config(cfg)) == cfg);
  for (const auto& entry : std::filesystem::directory_iterator(STABLAB_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    const ExperimentConfig c = load_config(entry.path().string());
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("errors carry line numbers") {
  CHECK(message_of("[experiment]\nbogus = 1\n").find("line 2") != std::string::npos);
  CHECK(message_of("[experiment]\nseed = 1\nseed = 2\n").find("duplicate") != std::string::npos);
  CHECK(message_of("[nowhere]\n").find("line 1") != std::string::npos);
  CHECK(message_of("seed = 1\n").find("outside") != std::string::npos);
  CHECK(message_of("[experiment]\nseed\n").find("line 2") != std::string::npos);
  CHECK(message_of("[experiment]\nseed = abc\n").find("experiment.seed") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = dance\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = bound-check\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nbound = smooth\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nreplicates = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nn_grid = 8, 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nT_rule = forever\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\ndelta = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\ndomain = box\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = rate-fit\n[sweep]\nn_grid = 4, 8\n"),
                  ConfigError);
}

TEST_CASE("horizon rules") {
  ExperimentConfig cfg;
  CHECK(cfg.horizon(10) == 10);
  cfg.sweep.T_rule = "n_squared";
  CHECK(cfg.horizon(10) == 100);
  cfg.sweep.T_rule = "n_pow(1.5)";
  CHECK(cfg.horizon(4) == 8);
  CHECK(cfg.horizon(100) == 1000);
  cfg.sweep.T_rule = "n_pow(-1)";
  CHECK_THROWS_AS(cfg.horizon(4), ConfigError);
}

TEST_CASE("get and set by dotted key") {
  ExperimentConfig cfg;
  set_config_value(cfg, "experiment.seed", "99");
  CHECK(cfg.seed == 99);
  CHECK(get_config_value(cfg, "experiment.seed") == "99");
  set_config_value(cfg, "loss.kind", "qnorm-hinge");
  CHECK(get_config_value(cfg, "loss.kind") == "qnorm-hinge");
  CHECK_THROWS_AS(set_config_value(cfg, "seed", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(cfg, "experiment.nope", "1"), ConfigError);
  CHECK_THROWS_AS(get_config_value(cfg, "sweep.nope"), ConfigError);
}

TEST_CASE("hash ignores threads and output directory") {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.threads = 8;
  b.out = "/tmp/elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash_hex(a).size() == 16);
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
}
