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

#include "stablab/stablab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "stablab/bounds.hpp"
#include "stablab/config.hpp"
#include "stablab/data.hpp"
#include "stablab/errors.hpp"
#include "stablab/harness.hpp"
#include "stablab/losses.hpp"
#include "stablab/optim.hpp"
#include "stablab/stability.hpp"

struct lab_config {
  stablab::ExperimentConfig cfg;
};
struct lab_result {
  stablab::ExperimentResult result;
};
struct lab_loss {
  stablab::LossSpec loss;
};
struct lab_distribution {
  stablab::Distribution dist;
};
struct lab_dataset {
  stablab::Dataset data;
};
struct lab_schedule {
  stablab::StepSchedule sched;
};
struct lab_trajectory {
  stablab::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

lab_status fail(lab_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <class F>
lab_status guarded(F&& body) {
  try {
    body();
    return LAB_OK;
  } catch (const stablab::ConfigError& e) {
    return fail(LAB_ERR_CONFIG, e.what());
  } catch (const stablab::InvalidArgument& e) {
    return fail(LAB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const stablab::PreconditionViolation& e) {
    return fail(LAB_ERR_PRECONDITION, e.what());
  } catch (const stablab::ResourceLimit& e) {
    return fail(LAB_ERR_RESOURCE_LIMIT, e.what());
  } catch (const stablab::DegenerateData& e) {
    return fail(LAB_ERR_DEGENERATE_DATA, e.what());
  } catch (const stablab::IoError& e) {
    return fail(LAB_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LAB_ERR_RESOURCE_LIMIT, "out of memory");
  } catch (const std::exception& e) {
    return fail(LAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LAB_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw stablab::InvalidArgument(what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

stablab::Vector vec(const double* p, std::size_t d) {
  require(p != nullptr || d == 0, "null vector");
  stablab::Vector v(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) v[static_cast<Eigen::Index>(k)] = p[k];
  return v;
}

stablab::Domain domain(double radius) {
  return radius > 0.0 ? stablab::Domain::ball(radius) : stablab::Domain::unconstrained();
}

template <class H, class V>
void emit(H** out, V&& value) {
  require(out != nullptr, "null output handle");
  *out = new H{std::forward<V>(value)};
}

}  // namespace

extern "C" {

const char* lab_version(void) { return "1.0.0"; }

const char* lab_last_error(void) { return g_last_error.c_str(); }

const char* lab_status_name(lab_status status) {
  switch (status) {
    case LAB_OK: return "ok";
    case LAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LAB_ERR_CONFIG: return "config error";
    case LAB_ERR_PRECONDITION: return "precondition violation";
    case LAB_ERR_RESOURCE_LIMIT: return "resource limit";
    case LAB_ERR_DEGENERATE_DATA: return "degenerate data";
    case LAB_ERR_IO: return "i/o error";
    case LAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void lab_string_free(char* s) { std::free(s); }

int lab_exit_code_for_status(lab_status status) {
  if (status == LAB_OK) return stablab::kExitPass;
  if (status == LAB_ERR_RESOURCE_LIMIT) return stablab::kExitResourceLimit;
  return stablab::kExitConfigError;
}

// ---- configs

lab_status lab_config_default(lab_config** out) {
  return guarded([&] { emit(out, stablab::ExperimentConfig{}); });
}

lab_status lab_config_parse(const char* text, lab_config** out) {
  return guarded([&] {
    require(text != nullptr, "null text");
    emit(out, stablab::parse_config(text));
  });
}

lab_status lab_config_load(const char* path, lab_config** out) {
  return guarded([&] {
    require(path != nullptr, "null path");
    emit(out, stablab::load_config(path));
  });
}

lab_status lab_config_set(lab_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr, "null argument");
    stablab::set_config_value(cfg->cfg, key, value);
  });
}

lab_status lab_config_get(const lab_config* cfg, const char* key, char** value_out) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value_out != nullptr, "null argument");
    *value_out = dup_string(stablab::get_config_value(cfg->cfg, key));
  });
}

lab_status lab_config_validate(const lab_config* cfg) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    cfg->cfg.validate();
  });
}

lab_status lab_config_serialize(const lab_config* cfg, char** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = dup_string(stablab::serialize_config(cfg->cfg));
  });
}

lab_status lab_config_hash(const lab_config* cfg, uint64_t* out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = stablab::config_hash(cfg->cfg);
  });
}

lab_status lab_config_clone(const lab_config* cfg, lab_config** out) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    emit(out, cfg->cfg);
  });
}

void lab_config_free(lab_config* cfg) { delete cfg; }

// ---- experiments

lab_status lab_run(const lab_config* cfg, lab_result** out) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    emit(out, stablab::run_experiment(cfg->cfg));
  });
}

int lab_result_exit_code(const lab_result* r) {
  return r != nullptr ? r->result.exit_code() : stablab::kExitConfigError;
}

size_t lab_result_gates_total(const lab_result* r) {
  return r != nullptr ? r->result.gates_total() : 0;
}

size_t lab_result_gates_failed(const lab_result* r) {
  return r != nullptr ? r->result.gates_failed() : 0;
}

size_t lab_result_rows(const lab_result* r) {
  return r != nullptr ? r->result.rows.size() : 0;
}

lab_status lab_result_csv(const lab_result* r, char** out) {
  return guarded([&] {
    require(r != nullptr && out != nullptr, "null argument");
    *out = dup_string(r->result.csv());
  });
}

lab_status lab_result_write_csv(const lab_result* r, const char* out_dir, char** path_out) {
  return guarded([&] {
    require(r != nullptr && out_dir != nullptr, "null argument");
    const std::string path = stablab::write_csv(r->result, out_dir);
    if (path_out != nullptr) *path_out = dup_string(path);
  });
}

void lab_result_free(lab_result* r) { delete r; }

// ---- losses

lab_status lab_loss_least_squares(double smoothness, lab_loss** out) {
  return guarded([&] { emit(out, stablab::LossSpec::least_squares(smoothness)); });
}

lab_status lab_loss_qnorm_hinge(double q, double feature_bound, lab_loss** out) {
  return guarded([&] { emit(out, stablab::LossSpec::qnorm_hinge(q, feature_bound)); });
}

lab_status lab_loss_qpower_absolute(double q, double feature_bound, double label_bound,
                                    lab_loss** out) {
  return guarded([&] {
    emit(out, stablab::LossSpec::qpower_absolute(q, feature_bound, label_bound));
  });
}

lab_status lab_loss_auc_square(double p, const double* x_plus, const double* x_minus,
                               size_t dim, double feature_bound, lab_loss** out) {
  return guarded([&] {
    emit(out, stablab::LossSpec::auc_square(p, vec(x_plus, dim), vec(x_minus, dim),
                                            feature_bound));
  });
}

lab_status lab_loss_from_config(const lab_config* cfg, const lab_distribution* dist,
                                lab_loss** out) {
  return guarded([&] {
    require(cfg != nullptr && dist != nullptr, "null argument");
    emit(out, stablab::build_loss(cfg->cfg.loss, dist->dist));
  });
}

lab_status lab_loss_regularity(const lab_loss* loss, double* alpha, double* holder_L) {
  return guarded([&] {
    require(loss != nullptr, "null loss");
    if (alpha != nullptr) *alpha = loss->loss.alpha;
    if (holder_L != nullptr) *holder_L = loss->loss.holder_L;
  });
}

lab_status lab_loss_value(const lab_loss* loss, const double* w, const double* x,
                          size_t dim, double y, double* out) {
  return guarded([&] {
    require(loss != nullptr && out != nullptr, "null argument");
    *out = stablab::loss_value(loss->loss, vec(w, dim), {vec(x, dim), y});
  });
}

lab_status lab_loss_subgradient(const lab_loss* loss, const double* w, const double* x,
                                size_t dim, double y, double* grad_out) {
  return guarded([&] {
    require(loss != nullptr && grad_out != nullptr, "null argument");
    const stablab::Vector g = stablab::loss_subgradient(loss->loss, vec(w, dim), {vec(x, dim), y});
    for (std::size_t k = 0; k < dim; ++k) grad_out[k] = g[static_cast<Eigen::Index>(k)];
  });
}

void lab_loss_free(lab_loss* loss) { delete loss; }

// ---- data

lab_status lab_distribution_from_config(const lab_config* cfg, lab_distribution** out) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    emit(out, stablab::build_distribution(cfg->cfg.distribution));
  });
}

size_t lab_distribution_dim(const lab_distribution* dist) {
  return dist != nullptr ? dist->dist.dim() : 0;
}

double lab_distribution_feature_bound(const lab_distribution* dist) {
  return dist != nullptr ? dist->dist.feature_bound : 0.0;
}

lab_status lab_population_risk(const lab_loss* loss, const lab_distribution* dist,
                               const double* w, size_t dim, size_t mc_samples,
                               uint64_t seed, double* value, double* std_error) {
  return guarded([&] {
    require(loss != nullptr && dist != nullptr && value != nullptr, "null argument");
    const auto r = stablab::population_risk(loss->loss, dist->dist, vec(w, dim), mc_samples, seed);
    *value = r.value;
    if (std_error != nullptr) *std_error = r.std_error;
  });
}

void lab_distribution_free(lab_distribution* dist) { delete dist; }

lab_status lab_dataset_sample(const lab_distribution* dist, size_t n, uint64_t seed,
                              lab_dataset** out) {
  return guarded([&] {
    require(dist != nullptr, "null distribution");
    emit(out, stablab::sample_dataset(dist->dist, n, seed));
  });
}

lab_status lab_dataset_from_arrays(const double* features, const double* labels, size_t n,
                                   size_t dim, lab_dataset** out) {
  return guarded([&] {
    require(n == 0 || (features != nullptr && labels != nullptr), "null arrays");
    std::vector<stablab::Example> ex(n);
    for (std::size_t i = 0; i < n; ++i) {
      ex[i].x = vec(features + i * dim, dim);
      ex[i].y = labels[i];
    }
    emit(out, stablab::Dataset(std::move(ex)));
  });
}

lab_status lab_dataset_load_csv(const char* path, lab_dataset** out) {
  return guarded([&] {
    require(path != nullptr, "null path");
    emit(out, stablab::load_dataset_csv(path));
  });
}

lab_status lab_dataset_save_csv(const lab_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    stablab::save_dataset_csv(ds->data, path);
  });
}

size_t lab_dataset_size(const lab_dataset* ds) { return ds != nullptr ? ds->data.size() : 0; }

size_t lab_dataset_dim(const lab_dataset* ds) {
  return ds != nullptr && !ds->data.empty() ? ds->data.dim() : 0;
}

lab_status lab_dataset_get(const lab_dataset* ds, size_t i, double* x_out, double* y_out) {
  return guarded([&] {
    require(ds != nullptr, "null dataset");
    require(i < ds->data.size(), "example index out of range");
    const stablab::Example& z = ds->data[i];
    if (x_out != nullptr) {
      for (Eigen::Index k = 0; k < z.x.size(); ++k) x_out[k] = z.x[k];
    }
    if (y_out != nullptr) *y_out = z.y;
  });
}

lab_status lab_dataset_replace(const lab_dataset* ds, size_t i, const double* x, double y,
                               lab_dataset** out) {
  return guarded([&] {
    require(ds != nullptr, "null dataset");
    require(i < ds->data.size(), "example index out of range");
    emit(out, ds->data.with_replacement(i, {vec(x, ds->data.dim()), y}));
  });
}

lab_status lab_empirical_risk(const lab_loss* loss, const lab_dataset* ds, const double* w,
                              double* out) {
  return guarded([&] {
    require(loss != nullptr && ds != nullptr && out != nullptr, "null argument");
    require(!ds->data.empty(), "empty dataset");
    *out = stablab::empirical_risk(loss->loss, ds->data, vec(w, ds->data.dim()));
  });
}

void lab_dataset_free(lab_dataset* ds) { delete ds; }

// ---- optimization

lab_status lab_schedule_from_config(const lab_config* cfg, uint64_t T, double holder_L,
                                    lab_schedule** out) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    emit(out, stablab::build_schedule(cfg->cfg.schedule, T, holder_L));
  });
}

lab_status lab_schedule_eta(const lab_schedule* s, uint64_t t, double* out) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "null argument");
    *out = s->sched.eta(t);
  });
}

void lab_schedule_free(lab_schedule* s) { delete s; }

lab_status lab_sgd_run(const lab_loss* loss, const lab_dataset* ds, const lab_schedule* s,
                       double ball_radius, uint64_t T, uint64_t seed, lab_trajectory** out) {
  return guarded([&] {
    require(loss != nullptr && ds != nullptr && s != nullptr, "null argument");
    stablab::RunOptions opts;
    opts.risk_checkpoints = 0;
    emit(out, stablab::sgd_run(loss->loss, ds->data, s->sched, domain(ball_radius), T, seed, opts));
  });
}

lab_status lab_sgd_run_indices(const lab_loss* loss, const lab_dataset* ds,
                               const lab_schedule* s, double ball_radius,
                               const size_t* indices, size_t count, lab_trajectory** out) {
  return guarded([&] {
    require(loss != nullptr && ds != nullptr && s != nullptr, "null argument");
    require(indices != nullptr || count == 0, "null indices");
    std::vector<std::size_t> idx(indices, indices + count);
    emit(out, stablab::sgd_run_indices(loss->loss, ds->data, s->sched, domain(ball_radius), idx));
  });
}

uint64_t lab_trajectory_steps(const lab_trajectory* tr) {
  return tr != nullptr ? tr->traj.steps : 0;
}

lab_status lab_trajectory_output(const lab_trajectory* tr, lab_output kind, double* w_out,
                                 size_t dim) {
  return guarded([&] {
    require(tr != nullptr && w_out != nullptr, "null argument");
    stablab::OutputKind k = stablab::OutputKind::kFinal;
    switch (kind) {
      case LAB_OUTPUT_FINAL: k = stablab::OutputKind::kFinal; break;
      case LAB_OUTPUT_AVG_ETA: k = stablab::OutputKind::kAvgEta; break;
      case LAB_OUTPUT_AVG_LINEAR: k = stablab::OutputKind::kAvgLinear; break;
      default: throw stablab::InvalidArgument("unknown output kind");
    }
    const stablab::Vector& w = stablab::select_output(tr->traj, k);
    require(static_cast<std::size_t>(w.size()) == dim, "dimension mismatch");
    for (std::size_t j = 0; j < dim; ++j) w_out[j] = w[static_cast<Eigen::Index>(j)];
  });
}

lab_status lab_trajectory_risks(const lab_trajectory* tr, double* out, size_t count) {
  return guarded([&] {
    require(tr != nullptr && out != nullptr, "null argument");
    require(count == tr->traj.per_step_risk.size(), "buffer length must equal T");
    std::memcpy(out, tr->traj.per_step_risk.data(), count * sizeof(double));
  });
}

void lab_trajectory_free(lab_trajectory* tr) { delete tr; }

// ---- stability

lab_status lab_estimate_stability(const lab_loss* loss, const lab_distribution* dist,
                                  size_t n, uint64_t T, const lab_schedule* s,
                                  double ball_radius, size_t replicates,
                                  size_t neighbor_subsample, size_t threads, uint64_t seed,
                                  lab_stability_summary* out) {
  return guarded([&] {
    require(loss != nullptr && dist != nullptr && s != nullptr && out != nullptr,
            "null argument");
    stablab::CouplingConfig cc;
    cc.replicates = replicates;
    cc.neighbor_subsample = neighbor_subsample;
    cc.threads = threads;
    cc.record_risks = false;
    const auto rep = stablab::estimate_on_average_stability(
        loss->loss, dist->dist, n, T, s->sched, domain(ball_radius), cc, seed);
    out->l1_mean = rep.l1_mean;
    out->l1_stderr = rep.l1_stderr;
    out->l2_sq_mean = rep.l2_sq_mean;
    out->l2_sq_stderr = rep.l2_sq_stderr;
    out->emp_risk = rep.emp_risk.mean;
    out->emp_risk_stderr = rep.emp_risk.std_error;
    out->has_population = rep.has_population ? 1 : 0;
    out->gap = rep.gap.mean;
    out->gap_stderr = rep.gap.std_error;
  });
}

lab_status lab_brute_force_stability(const lab_loss* loss, const lab_dataset* base,
                                     const lab_dataset* ghost, uint64_t T,
                                     const lab_schedule* s, double ball_radius, double* l1,
                                     double* l2_sq) {
  return guarded([&] {
    require(loss != nullptr && base != nullptr && ghost != nullptr && s != nullptr,
            "null argument");
    const auto ex = stablab::brute_force_stability(loss->loss, base->data, ghost->data, T,
                                                   s->sched, domain(ball_radius));
    if (l1 != nullptr) *l1 = ex.l1;
    if (l2_sq != nullptr) *l2_sq = ex.l2_sq;
  });
}

// ---- bounds and fits

lab_status lab_smooth_stability_bounds(size_t n, const double* etas, const double* risk_path,
                                       const double* sqrt_risk_path, size_t count,
                                       double holder_L, double* l1_bound,
                                       double* l2_sq_bound) {
  return guarded([&] {
    require(count == 0 || (etas != nullptr && risk_path != nullptr && sqrt_risk_path != nullptr),
            "null arrays");
    stablab::BoundInputs in;
    in.n = n;
    in.etas.assign(etas, etas + count);
    in.risk_path.assign(risk_path, risk_path + count);
    in.sqrt_risk_path.assign(sqrt_risk_path, sqrt_risk_path + count);
    in.L = holder_L;
    in.alpha = 1.0;
    in.c = stablab::regularity_constants(1.0, holder_L);
    if (l1_bound != nullptr) *l1_bound = stablab::smooth_l1_stability_bound(in);
    if (l2_sq_bound != nullptr) *l2_sq_bound = stablab::smooth_l2_stability_bound(in);
  });
}

lab_status lab_fit_loglog_slope(const double* n, const double* metric, size_t count,
                                double* slope, double* intercept, double* r_squared) {
  return guarded([&] {
    require(count == 0 || (n != nullptr && metric != nullptr), "null arrays");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < count; ++k) pts.emplace_back(n[k], metric[k]);
    const stablab::RateFit fit = stablab::fit_loglog_slope(pts);
    if (slope != nullptr) *slope = fit.slope;
    if (intercept != nullptr) *intercept = fit.intercept;
    if (r_squared != nullptr) *r_squared = fit.r_squared;
  });
}

}  // extern "C"
