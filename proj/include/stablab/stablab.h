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

/* C interface to the stablab shared library.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function. Functions return a lab_status; on failure the
 * message is available from lab_last_error() on the same thread until the
 * next failing call. Strings returned through char** are released with
 * lab_string_free. Example indices are 0-based.
 */

#ifndef STABLAB_STABLAB_H_
#define STABLAB_STABLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(STABLAB_BUILDING_LIBRARY)
#define LAB_API __attribute__((visibility("default")))
#else
#define LAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lab_status {
  LAB_OK = 0,
  LAB_ERR_INVALID_ARGUMENT = 1,
  LAB_ERR_CONFIG = 2,
  LAB_ERR_PRECONDITION = 3,
  LAB_ERR_RESOURCE_LIMIT = 4,
  LAB_ERR_DEGENERATE_DATA = 5,
  LAB_ERR_IO = 6,
  LAB_ERR_INTERNAL = 7
} lab_status;

typedef enum lab_output {
  LAB_OUTPUT_FINAL = 0,
  LAB_OUTPUT_AVG_ETA = 1,
  LAB_OUTPUT_AVG_LINEAR = 2
} lab_output;

typedef struct lab_config lab_config;
typedef struct lab_result lab_result;
typedef struct lab_loss lab_loss;
typedef struct lab_distribution lab_distribution;
typedef struct lab_dataset lab_dataset;
typedef struct lab_schedule lab_schedule;
typedef struct lab_trajectory lab_trajectory;

LAB_API const char* lab_version(void);
LAB_API const char* lab_last_error(void);
LAB_API const char* lab_status_name(lab_status status);
LAB_API void lab_string_free(char* s);

/* Process exit code for a failed call: 3 for resource limits, 2 otherwise. */
LAB_API int lab_exit_code_for_status(lab_status status);

/* ---- experiment configs ------------------------------------------------ */

LAB_API lab_status lab_config_default(lab_config** out);
LAB_API lab_status lab_config_parse(const char* text, lab_config** out);
LAB_API lab_status lab_config_load(const char* path, lab_config** out);
/* key is "section.key", e.g. "experiment.seed". */
LAB_API lab_status lab_config_set(lab_config* cfg, const char* key,
                                  const char* value);
LAB_API lab_status lab_config_get(const lab_config* cfg, const char* key,
                                  char** value_out);
LAB_API lab_status lab_config_validate(const lab_config* cfg);
LAB_API lab_status lab_config_serialize(const lab_config* cfg, char** out);
LAB_API lab_status lab_config_hash(const lab_config* cfg, uint64_t* out);
LAB_API lab_status lab_config_clone(const lab_config* cfg, lab_config** out);
LAB_API void lab_config_free(lab_config* cfg);

/* ---- experiments ------------------------------------------------------- */

LAB_API lab_status lab_run(const lab_config* cfg, lab_result** out);
/* 0 when every gate passed, 1 otherwise. */
LAB_API int lab_result_exit_code(const lab_result* r);
LAB_API size_t lab_result_gates_total(const lab_result* r);
LAB_API size_t lab_result_gates_failed(const lab_result* r);
LAB_API size_t lab_result_rows(const lab_result* r);
LAB_API lab_status lab_result_csv(const lab_result* r, char** out);
/* Writes <out_dir>/<name>.csv; the written path is returned when path_out is
 * not NULL. */
LAB_API lab_status lab_result_write_csv(const lab_result* r,
                                        const char* out_dir, char** path_out);
LAB_API void lab_result_free(lab_result* r);

/* ---- losses ------------------------------------------------------------ */

LAB_API lab_status lab_loss_least_squares(double smoothness, lab_loss** out);
LAB_API lab_status lab_loss_qnorm_hinge(double q, double feature_bound,
                                        lab_loss** out);
LAB_API lab_status lab_loss_qpower_absolute(double q, double feature_bound,
                                            double label_bound, lab_loss** out);
LAB_API lab_status lab_loss_auc_square(double p, const double* x_plus,
                                       const double* x_minus, size_t dim,
                                       double feature_bound, lab_loss** out);
LAB_API lab_status lab_loss_from_config(const lab_config* cfg,
                                        const lab_distribution* dist,
                                        lab_loss** out);
LAB_API lab_status lab_loss_regularity(const lab_loss* loss, double* alpha,
                                       double* holder_L);
LAB_API lab_status lab_loss_value(const lab_loss* loss, const double* w,
                                  const double* x, size_t dim, double y,
                                  double* out);
LAB_API lab_status lab_loss_subgradient(const lab_loss* loss, const double* w,
                                        const double* x, size_t dim, double y,
                                        double* grad_out);
LAB_API void lab_loss_free(lab_loss* loss);

/* ---- data -------------------------------------------------------------- */

LAB_API lab_status lab_distribution_from_config(const lab_config* cfg,
                                                lab_distribution** out);
LAB_API size_t lab_distribution_dim(const lab_distribution* dist);
LAB_API double lab_distribution_feature_bound(const lab_distribution* dist);
/* Population risk, closed form when available, else mc_samples draws. */
LAB_API lab_status lab_population_risk(const lab_loss* loss,
                                       const lab_distribution* dist,
                                       const double* w, size_t dim,
                                       size_t mc_samples, uint64_t seed,
                                       double* value, double* std_error);
LAB_API void lab_distribution_free(lab_distribution* dist);

LAB_API lab_status lab_dataset_sample(const lab_distribution* dist, size_t n,
                                      uint64_t seed, lab_dataset** out);
/* features is row-major n x dim. */
LAB_API lab_status lab_dataset_from_arrays(const double* features,
                                           const double* labels, size_t n,
                                           size_t dim, lab_dataset** out);
LAB_API lab_status lab_dataset_load_csv(const char* path, lab_dataset** out);
LAB_API lab_status lab_dataset_save_csv(const lab_dataset* ds,
                                        const char* path);
LAB_API size_t lab_dataset_size(const lab_dataset* ds);
LAB_API size_t lab_dataset_dim(const lab_dataset* ds);
LAB_API lab_status lab_dataset_get(const lab_dataset* ds, size_t i,
                                   double* x_out, double* y_out);
/* A copy of ds with example i replaced by (x, y). */
LAB_API lab_status lab_dataset_replace(const lab_dataset* ds, size_t i,
                                       const double* x, double y,
                                       lab_dataset** out);
LAB_API lab_status lab_empirical_risk(const lab_loss* loss,
                                      const lab_dataset* ds, const double* w,
                                      double* out);
LAB_API void lab_dataset_free(lab_dataset* ds);

/* ---- optimization ------------------------------------------------------ */

LAB_API lab_status lab_schedule_from_config(const lab_config* cfg, uint64_t T,
                                            double holder_L,
                                            lab_schedule** out);
LAB_API lab_status lab_schedule_eta(const lab_schedule* s, uint64_t t,
                                    double* out);
LAB_API void lab_schedule_free(lab_schedule* s);

/* ball_radius <= 0 runs unconstrained. */
LAB_API lab_status lab_sgd_run(const lab_loss* loss, const lab_dataset* ds,
                               const lab_schedule* s, double ball_radius,
                               uint64_t T, uint64_t seed,
                               lab_trajectory** out);
LAB_API lab_status lab_sgd_run_indices(const lab_loss* loss,
                                       const lab_dataset* ds,
                                       const lab_schedule* s,
                                       double ball_radius,
                                       const size_t* indices, size_t count,
                                       lab_trajectory** out);
LAB_API uint64_t lab_trajectory_steps(const lab_trajectory* tr);
LAB_API lab_status lab_trajectory_output(const lab_trajectory* tr,
                                         lab_output kind, double* w_out,
                                         size_t dim);
/* Per-step losses f(w_t; z_{i_t}), t = 1..T; buffer of length T. */
LAB_API lab_status lab_trajectory_risks(const lab_trajectory* tr,
                                        double* out, size_t count);
LAB_API void lab_trajectory_free(lab_trajectory* tr);

/* ---- stability --------------------------------------------------------- */

typedef struct lab_stability_summary {
  double l1_mean;
  double l1_stderr;
  double l2_sq_mean;
  double l2_sq_stderr;
  double emp_risk;
  double emp_risk_stderr;
  int has_population;
  double gap;
  double gap_stderr;
} lab_stability_summary;

LAB_API lab_status lab_estimate_stability(
    const lab_loss* loss, const lab_distribution* dist, size_t n, uint64_t T,
    const lab_schedule* s, double ball_radius, size_t replicates,
    size_t neighbor_subsample, size_t threads, uint64_t seed,
    lab_stability_summary* out);

LAB_API lab_status lab_brute_force_stability(
    const lab_loss* loss, const lab_dataset* base, const lab_dataset* ghost,
    uint64_t T, const lab_schedule* s, double ball_radius, double* l1,
    double* l2_sq);

/* ---- bounds and fits --------------------------------------------------- */

/* Smooth-loss stability bounds from a risk path E F_S(w_j) and
 * E sqrt(F_S(w_j)), j = 1..count, with step sizes etas[0..count). */
LAB_API lab_status lab_smooth_stability_bounds(
    size_t n, const double* etas, const double* risk_path,
    const double* sqrt_risk_path, size_t count, double holder_L,
    double* l1_bound, double* l2_sq_bound);

LAB_API lab_status lab_fit_loglog_slope(const double* n, const double* metric,
                                        size_t count, double* slope,
                                        double* intercept, double* r_squared);

#ifdef __cplusplus
}
#endif

#endif /* STABLAB_STABLAB_H_ */
