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

// lab: run one experiment from a config file and write its CSV.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stablab/stablab.h"

namespace {

constexpr int kExitConfigError = 2;

struct ConfigDeleter {
  void operator()(lab_config* c) const { lab_config_free(c); }
};
struct ResultDeleter {
  void operator()(lab_result* r) const { lab_result_free(r); }
};

int report(lab_status s) {
  std::fprintf(stderr, "lab: %s: %s\n", lab_status_name(s), lab_last_error());
  return lab_exit_code_for_status(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability and generalization experiments for projected SGD"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::string seed;
  std::size_t threads = 0;
  std::vector<std::string> overrides;

  app.add_option("experiment", experiment, "Experiment kind")
      ->required()
      ->check(CLI::IsMember({"stability-sweep", "rate-fit", "bound-check", "properties", "oracle"}));
  app.add_option("--config", config_path, "Config file")->required();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory for the CSV (overrides the config)");
  app.add_option("--threads", threads, "Worker threads; LAB_THREADS takes precedence");
  app.add_option("--set", overrides, "Override a config value, section.key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  lab_config* raw = nullptr;
  if (lab_status s = lab_config_load(config_path.c_str(), &raw); s != LAB_OK) return report(s);
  std::unique_ptr<lab_config, ConfigDeleter> cfg(raw);

  auto set = [&](const std::string& key, const std::string& value) {
    return lab_config_set(cfg.get(), key.c_str(), value.c_str());
  };
  if (lab_status s = set("experiment.kind", experiment); s != LAB_OK) return report(s);
  if (!seed.empty()) {
    if (lab_status s = set("experiment.seed", seed); s != LAB_OK) return report(s);
  }
  if (!out_dir.empty()) {
    if (lab_status s = set("experiment.out", out_dir); s != LAB_OK) return report(s);
  }
  if (threads > 0) {
    if (lab_status s = set("experiment.threads", std::to_string(threads)); s != LAB_OK) {
      return report(s);
    }
  }
  if (const char* env = std::getenv("LAB_THREADS"); env != nullptr && *env != '\0') {
    if (lab_status s = set("experiment.threads", env); s != LAB_OK) return report(s);
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "lab: --set expects section.key=value, got '%s'\n", o.c_str());
      return kExitConfigError;
    }
    if (lab_status s = set(o.substr(0, eq), o.substr(eq + 1)); s != LAB_OK) return report(s);
  }
  if (lab_status s = lab_config_validate(cfg.get()); s != LAB_OK) return report(s);

  char* text = nullptr;
  if (lab_status s = lab_config_get(cfg.get(), "experiment.out", &text); s != LAB_OK) {
    return report(s);
  }
  const std::string out(text);
  lab_string_free(text);

  lab_result* rraw = nullptr;
  if (lab_status s = lab_run(cfg.get(), &rraw); s != LAB_OK) return report(s);
  std::unique_ptr<lab_result, ResultDeleter> result(rraw);

  char* path = nullptr;
  if (lab_status s = lab_result_write_csv(result.get(), out.c_str(), &path); s != LAB_OK) {
    return report(s);
  }
  std::printf("%s: %zu rows, %zu/%zu gates failed -> %s\n", experiment.c_str(),
              lab_result_rows(result.get()), lab_result_gates_failed(result.get()),
              lab_result_gates_total(result.get()), path);
  lab_string_free(path);
  return lab_result_exit_code(result.get());
}
