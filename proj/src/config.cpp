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

#include "stablab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace stablab {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + t + "'");
  }
}

std::uint64_t parse_u64(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("expected a nonnegative integer, got '" + t + "'");
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError("integer out of range: '" + t + "'");
  }
}

bool parse_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("expected true or false, got '" + t + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::string t = trim(s);
  if (!t.empty() && (t.front() == '[' || t.front() == '{')) {
    const char close = t.front() == '[' ? ']' : '}';
    if (t.back() != close) throw ConfigError("unbalanced list '" + t + "'");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<std::string> out;
  if (trim(t).empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item));
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) out.push_back(parse_u64(item));
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += f(v[k]);
  }
  return out;
}

std::string fmt_doubles(const std::vector<double>& v) { return join(v, fmt_double); }
std::string fmt_sizes(const std::vector<std::size_t>& v) {
  return join(v, [](std::size_t x) { return std::to_string(x); });
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool hashed = true;
};

#define STABLAB_KEY_STR(sec, key, field)                                    \
  Key{sec, key, [](ExperimentConfig& c, const std::string& v) { c.field = trim(v); }, \
      [](const ExperimentConfig& c) { return c.field; }}
#define STABLAB_KEY_DBL(sec, key, field)                                     \
  Key{sec, key,                                                             \
      [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(v); }, \
      [](const ExperimentConfig& c) { return fmt_double(c.field); }}
#define STABLAB_KEY_INT(sec, key, field)                                     \
  Key{sec, key,                                                             \
      [](ExperimentConfig& c, const std::string& v) {                       \
        c.field = static_cast<decltype(c.field)>(parse_u64(v));             \
      },                                                                    \
      [](const ExperimentConfig& c) { return std::to_string(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(STABLAB_KEY_STR("experiment", "kind", experiment));
    k.push_back(STABLAB_KEY_STR("experiment", "bound", bound));
    k.push_back(STABLAB_KEY_STR("experiment", "name", name));
    k.push_back(STABLAB_KEY_INT("experiment", "seed", seed));
    k.push_back(STABLAB_KEY_INT("experiment", "replicates", replicates));
    k.push_back(STABLAB_KEY_INT("experiment", "neighbor_subsample", neighbor_subsample));
    Key threads = STABLAB_KEY_INT("experiment", "threads", threads);
    threads.hashed = false;
    k.push_back(threads);
    Key out = STABLAB_KEY_STR("experiment", "out", out);
    out.hashed = false;
    k.push_back(out);

    k.push_back(STABLAB_KEY_STR("loss", "kind", loss.kind));
    k.push_back(STABLAB_KEY_DBL("loss", "q", loss.q));

    k.push_back(STABLAB_KEY_STR("distribution", "kind", distribution.kind));
    k.push_back(STABLAB_KEY_INT("distribution", "dim", distribution.dim));
    k.push_back(Key{"distribution", "w_star",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.distribution.w_star = parse_doubles(v);
                    },
                    [](const ExperimentConfig& c) { return fmt_doubles(c.distribution.w_star); }});
    k.push_back(STABLAB_KEY_DBL("distribution", "cov_scale", distribution.cov_scale));
    k.push_back(Key{"distribution", "cov_diag",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.distribution.cov_diag = parse_doubles(v);
                    },
                    [](const ExperimentConfig& c) { return fmt_doubles(c.distribution.cov_diag); }});
    k.push_back(STABLAB_KEY_DBL("distribution", "noise_sd", distribution.noise_sd));
    k.push_back(STABLAB_KEY_DBL("distribution", "flip_prob", distribution.flip_prob));
    k.push_back(STABLAB_KEY_DBL("distribution", "margin", distribution.margin));
    k.push_back(STABLAB_KEY_DBL("distribution", "p", distribution.p));
    k.push_back(Key{"distribution", "mu_plus",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.distribution.mu_plus = parse_doubles(v);
                    },
                    [](const ExperimentConfig& c) { return fmt_doubles(c.distribution.mu_plus); }});
    k.push_back(Key{"distribution", "mu_minus",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.distribution.mu_minus = parse_doubles(v);
                    },
                    [](const ExperimentConfig& c) { return fmt_doubles(c.distribution.mu_minus); }});
    k.push_back(STABLAB_KEY_DBL("distribution", "cov_plus_scale", distribution.cov_plus_scale));
    k.push_back(STABLAB_KEY_DBL("distribution", "cov_minus_scale", distribution.cov_minus_scale));
    k.push_back(Key{"distribution", "feature_bound",
                    [](ExperimentConfig& c, const std::string& v) {
                      if (trim(v) == "auto") {
                        c.distribution.feature_bound.reset();
                      } else {
                        c.distribution.feature_bound = parse_double(v);
                      }
                    },
                    [](const ExperimentConfig& c) {
                      return c.distribution.feature_bound
                                 ? fmt_double(*c.distribution.feature_bound)
                                 : std::string("auto");
                    }});

    k.push_back(STABLAB_KEY_STR("schedule", "kind", schedule.kind));
    k.push_back(STABLAB_KEY_DBL("schedule", "c", schedule.c));
    k.push_back(STABLAB_KEY_DBL("schedule", "eta1", schedule.eta1));
    k.push_back(STABLAB_KEY_DBL("schedule", "theta", schedule.theta));
    k.push_back(Key{"schedule", "sigma",
                    [](ExperimentConfig& c, const std::string& v) {
                      if (trim(v) == "auto") {
                        c.schedule.sigma.reset();
                      } else {
                        c.schedule.sigma = parse_double(v);
                      }
                    },
                    [](const ExperimentConfig& c) {
                      return c.schedule.sigma ? fmt_double(*c.schedule.sigma)
                                              : std::string("auto");
                    }});
    k.push_back(Key{"schedule", "t0",
                    [](ExperimentConfig& c, const std::string& v) {
                      if (trim(v) == "auto") {
                        c.schedule.t0.reset();
                      } else {
                        c.schedule.t0 = parse_u64(v);
                      }
                    },
                    [](const ExperimentConfig& c) {
                      return c.schedule.t0 ? std::to_string(*c.schedule.t0)
                                           : std::string("auto");
                    }});
    k.push_back(Key{"schedule", "relative_to_L",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.schedule.relative_to_L = parse_bool(v);
                    },
                    [](const ExperimentConfig& c) {
                      return std::string(c.schedule.relative_to_L ? "true" : "false");
                    }});

    k.push_back(Key{"sweep", "n_grid",
                    [](ExperimentConfig& c, const std::string& v) {
                      c.sweep.n_grid = parse_sizes(v);
                    },
                    [](const ExperimentConfig& c) { return fmt_sizes(c.sweep.n_grid); }});
    k.push_back(STABLAB_KEY_STR("sweep", "T_rule", sweep.T_rule));
    k.push_back(STABLAB_KEY_STR("sweep", "domain", sweep.domain));
    k.push_back(STABLAB_KEY_DBL("sweep", "radius", sweep.radius));
    k.push_back(STABLAB_KEY_INT("sweep", "mc_pop", sweep.mc_pop));
    k.push_back(STABLAB_KEY_INT("sweep", "K", sweep.K));
    k.push_back(STABLAB_KEY_DBL("sweep", "lambda", sweep.lambda));
    k.push_back(STABLAB_KEY_STR("sweep", "output", sweep.output));
    k.push_back(STABLAB_KEY_DBL("sweep", "delta", sweep.delta));
    k.push_back(Key{"sweep", "slope_max",
                    [](ExperimentConfig& c, const std::string& v) {
                      if (trim(v) == "none") {
                        c.sweep.slope_max.reset();
                      } else {
                        c.sweep.slope_max = parse_double(v);
                      }
                    },
                    [](const ExperimentConfig& c) {
                      return c.sweep.slope_max ? fmt_double(*c.sweep.slope_max)
                                               : std::string("none");
                    }});
    k.push_back(STABLAB_KEY_INT("sweep", "hp_n", sweep.hp_n));
    k.push_back(STABLAB_KEY_INT("sweep", "hp_T", sweep.hp_T));
    k.push_back(STABLAB_KEY_INT("sweep", "hp_seeds", sweep.hp_seeds));
    k.push_back(STABLAB_KEY_INT("sweep", "checks", sweep.checks));
    return k;
  }();
  return table;
}

#undef STABLAB_KEY_STR
#undef STABLAB_KEY_DBL
#undef STABLAB_KEY_INT

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

const char* const kSections[] = {"experiment", "loss", "distribution", "schedule", "sweep"};

std::string serialize(const ExperimentConfig& cfg, bool hashed_only) {
  std::string out;
  for (const char* section : kSections) {
    if (!out.empty()) out += '\n';
    out += "[" + std::string(section) + "]\n";
    for (const auto& k : keys()) {
      if (k.section != section || (hashed_only && !k.hashed)) continue;
      out += k.name + " = " + k.get(cfg) + "\n";
    }
  }
  return out;
}

const std::set<std::string> kExperiments = {"stability-sweep", "rate-fit",
                                            "bound-check", "properties", "oracle"};
const std::set<std::string> kBounds = {"smooth", "nonsmooth", "auc", "strong-ls",
                                       "erm", "extensions"};

}  // namespace

std::string ExperimentConfig::display_name() const {
  if (!name.empty()) return name;
  if (experiment == "bound-check" && !bound.empty()) return "bound-check-" + bound;
  return experiment;
}

std::uint64_t ExperimentConfig::horizon(std::size_t n) const {
  const std::string& r = sweep.T_rule;
  if (r == "equal_n") return n;
  if (r == "n_squared") return static_cast<std::uint64_t>(n) * n;
  if (r.rfind("n_pow(", 0) == 0 && r.back() == ')') {
    const double e = parse_double(r.substr(6, r.size() - 7));
    if (!(e >= 0.0)) throw ConfigError("n_pow exponent must be >= 0");
    return static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<double>(n), e) - 1e-9));
  }
  throw ConfigError("unknown T_rule '" + r + "'");
}

void ExperimentConfig::validate() const {
  if (!kExperiments.count(experiment)) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  if (experiment == "bound-check" && !kBounds.count(bound)) {
    throw ConfigError("bound-check needs bound = smooth, nonsmooth, auc, "
                      "strong-ls, erm or extensions (got '" + bound + "')");
  }
  if (experiment != "bound-check" && !bound.empty()) {
    throw ConfigError("bound is only meaningful for bound-check");
  }
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (sweep.n_grid.empty()) throw ConfigError("n_grid must not be empty");
  for (std::size_t k = 0; k < sweep.n_grid.size(); ++k) {
    if (sweep.n_grid[k] < 1) throw ConfigError("n_grid entries must be >= 1");
    if (k > 0 && sweep.n_grid[k] <= sweep.n_grid[k - 1]) {
      throw ConfigError("n_grid must be strictly ascending");
    }
  }
  if (neighbor_subsample > sweep.n_grid.front()) {
    throw ConfigError("neighbor_subsample exceeds the smallest n");
  }
  (void)horizon(1);
  if (experiment == "rate-fit" && sweep.n_grid.size() < 3) {
    throw ConfigError("rate-fit needs at least 3 sample sizes");
  }
  if (sweep.domain != "unconstrained" && sweep.domain != "ball") {
    throw ConfigError("domain must be unconstrained or ball");
  }
  if (!(sweep.radius > 0.0)) throw ConfigError("radius must be > 0");
  if (!(sweep.delta > 0.0 && sweep.delta < 1.0)) {
    throw ConfigError("delta must lie in (0, 1)");
  }
  if (distribution.dim < 1) throw ConfigError("dim must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (std::find(std::begin(kSections), std::end(kSections), section) ==
          std::end(kSections)) {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(t.substr(0, eq));
    const Key* k = find_key(section, key);
    if (k == nullptr) {
      throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    }
    if (!seen.insert(section + "." + key).second) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    try {
      k->set(cfg, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + section + "." + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  return serialize(cfg, false);
}

void set_config_value(ExperimentConfig& cfg, const std::string& dotted_key,
                      const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("key must be section.key, got '" + dotted_key + "'");
  }
  const Key* k = find_key(dotted_key.substr(0, dot), dotted_key.substr(dot + 1));
  if (k == nullptr) throw ConfigError("unknown key '" + dotted_key + "'");
  k->set(cfg, value);
}

std::string get_config_value(const ExperimentConfig& cfg,
                             const std::string& dotted_key) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("key must be section.key, got '" + dotted_key + "'");
  }
  const Key* k = find_key(dotted_key.substr(0, dot), dotted_key.substr(dot + 1));
  if (k == nullptr) throw ConfigError("unknown key '" + dotted_key + "'");
  return k->get(cfg);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(cfg, true)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

}  // namespace stablab
