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

#include "stablab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stablab/errors.hpp"
#include "stablab/seeding.hpp"

namespace stablab {
namespace {

constexpr std::size_t kMaxRejections = 1000000;

double default_bound(const Vector& mean, const Matrix& cov) {
  return mean.norm() + 4.0 * std::sqrt(std::max(cov.trace(), 0.0));
}

// Symmetric square root V diag(sqrt(max(lambda, 0))) of a PSD matrix.
Matrix psd_root(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal();
}

void check_psd(const Matrix& cov, std::size_t d, const char* name) {
  if (static_cast<std::size_t>(cov.rows()) != d ||
      static_cast<std::size_t>(cov.cols()) != d) {
    throw InvalidArgument(std::string(name) + " must be " + std::to_string(d) +
                          "x" + std::to_string(d));
  }
  if (!cov.allFinite()) throw InvalidArgument(std::string(name) + " not finite");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw InvalidArgument(std::string(name) + " must be positive semidefinite");
  }
}

// Variance of a standard normal truncated to [-a, a].
double truncated_normal_variance(double a) {
  const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI);
  return 1.0 - 2.0 * a * phi / std::erf(a / std::sqrt(2.0));
}

bool is_linreg(const Distribution& d) {
  return d.kind == Distribution::Kind::kGaussLinReg ||
         d.kind == Distribution::Kind::kRealizableLinReg;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("row " + std::to_string(row) + ": cannot parse '" +
                          cell + "' as a number");
  }
}

}  // namespace

std::string_view to_string(Distribution::Kind kind) {
  switch (kind) {
    case Distribution::Kind::kGaussLinReg:
      return "gauss-linreg";
    case Distribution::Kind::kRealizableLinReg:
      return "realizable-linreg";
    case Distribution::Kind::kMarginClassif:
      return "margin-classif";
    case Distribution::Kind::kImbalancedGauss:
      return "imbalanced-gauss";
  }
  return "unknown";
}

Distribution::Kind distribution_kind_from_string(std::string_view name) {
  if (name == "gauss-linreg") return Distribution::Kind::kGaussLinReg;
  if (name == "realizable-linreg") return Distribution::Kind::kRealizableLinReg;
  if (name == "margin-classif") return Distribution::Kind::kMarginClassif;
  if (name == "imbalanced-gauss") return Distribution::Kind::kImbalancedGauss;
  throw InvalidArgument("unknown distribution kind '" + std::string(name) + "'");
}

Distribution Distribution::gauss_linreg(Vector w_star, Matrix cov,
                                        double noise_sd,
                                        std::optional<double> feature_bound,
                                        std::optional<Vector> x_mean) {
  Distribution d;
  d.kind = Kind::kGaussLinReg;
  d.x_mean = x_mean ? std::move(*x_mean) : Vector::Zero(w_star.size());
  d.w_star = std::move(w_star);
  d.cov = std::move(cov);
  d.noise_sd = noise_sd;
  d.feature_bound = feature_bound ? *feature_bound
                                  : default_bound(d.x_mean, d.cov);
  d.validate();
  return d;
}

Distribution Distribution::realizable_linreg(Vector w_star, Matrix cov,
                                             std::optional<double> feature_bound,
                                             std::optional<Vector> x_mean) {
  Distribution d = gauss_linreg(std::move(w_star), std::move(cov), 0.0,
                                feature_bound, std::move(x_mean));
  d.kind = Kind::kRealizableLinReg;
  return d;
}

Distribution Distribution::margin_classif(Vector w_star, Matrix cov,
                                          double flip_prob, double margin,
                                          std::optional<double> feature_bound) {
  Distribution d;
  d.kind = Kind::kMarginClassif;
  d.x_mean = Vector::Zero(w_star.size());
  d.w_star = std::move(w_star);
  d.cov = std::move(cov);
  d.flip_prob = flip_prob;
  d.margin = margin;
  d.feature_bound = feature_bound ? *feature_bound
                                  : default_bound(d.x_mean, d.cov);
  d.validate();
  return d;
}

Distribution Distribution::imbalanced_gauss(double p, Vector mu_plus,
                                            Vector mu_minus, Matrix cov_plus,
                                            Matrix cov_minus,
                                            std::optional<double> feature_bound) {
  Distribution d;
  d.kind = Kind::kImbalancedGauss;
  d.p = p;
  d.mu_plus = std::move(mu_plus);
  d.mu_minus = std::move(mu_minus);
  d.cov_plus = std::move(cov_plus);
  d.cov_minus = std::move(cov_minus);
  d.feature_bound =
      feature_bound ? *feature_bound
                    : std::max(default_bound(d.mu_plus, d.cov_plus),
                               default_bound(d.mu_minus, d.cov_minus));
  d.validate();
  return d;
}

std::size_t Distribution::dim() const {
  return static_cast<std::size_t>(kind == Kind::kImbalancedGauss ? mu_plus.size()
                                                                  : w_star.size());
}

double Distribution::label_bound() const {
  if (is_linreg(*this)) {
    return w_star.norm() * feature_bound + kNoiseTruncation * noise_sd;
  }
  return 1.0;
}

void Distribution::validate() const {
  const std::size_t d = dim();
  if (d == 0) throw InvalidArgument("distribution dimension must be >= 1");
  if (!(feature_bound >= 0.0) || !std::isfinite(feature_bound)) {
    throw InvalidArgument("feature bound must be finite and >= 0");
  }
  if (kind == Kind::kImbalancedGauss) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
    if (static_cast<std::size_t>(mu_minus.size()) != d) {
      throw InvalidArgument("class means must have equal dimension");
    }
    if (!mu_plus.allFinite() || !mu_minus.allFinite()) {
      throw InvalidArgument("class means must be finite");
    }
    check_psd(cov_plus, d, "cov_plus");
    check_psd(cov_minus, d, "cov_minus");
    if (mu_plus.norm() > feature_bound || mu_minus.norm() > feature_bound) {
      throw InvalidArgument("class means lie outside the feature bound");
    }
    return;
  }
  if (!w_star.allFinite()) throw InvalidArgument("w_star must be finite");
  if (static_cast<std::size_t>(x_mean.size()) != d) {
    throw InvalidArgument("x_mean must match the dimension of w_star");
  }
  check_psd(cov, d, "cov");
  if (x_mean.norm() > feature_bound) {
    throw InvalidArgument("feature mean lies outside the feature bound");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw InvalidArgument("noise_sd must be finite and >= 0");
  }
  if (kind == Kind::kRealizableLinReg && noise_sd != 0.0) {
    throw InvalidArgument("realizable regression has no label noise");
  }
  if (kind == Kind::kMarginClassif) {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
      throw InvalidArgument("flip_prob must lie in [0, 1]");
    }
    if (!(margin >= 0.0)) throw InvalidArgument("margin must be >= 0");
    if (w_star.norm() == 0.0) throw InvalidArgument("w_star must be nonzero");
    if (margin > feature_bound) {
      throw InvalidArgument("margin exceeds the feature bound");
    }
  }
}

Sampler::Sampler(const Distribution& dist, std::uint64_t seed)
    : dist_(&dist), gen_(seed) {
  if (dist.kind == Distribution::Kind::kImbalancedGauss) {
    root_ = psd_root(dist.cov_plus);
    root_minus_ = psd_root(dist.cov_minus);
  } else {
    root_ = psd_root(dist.cov);
  }
}

Vector Sampler::gaussian(const Vector& mean, const Matrix& root) {
  const double bound = dist_->feature_bound;
  Vector g(mean.size());
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = normal_(gen_);
    Vector x = mean + root * g;
    if (x.norm() <= bound) return x;
  }
  throw DegenerateData("feature truncation rejected every draw");
}

Example Sampler::next() {
  const Distribution& d = *dist_;
  Example z;
  switch (d.kind) {
    case Distribution::Kind::kGaussLinReg:
    case Distribution::Kind::kRealizableLinReg: {
      z.x = gaussian(d.x_mean, root_);
      double e = normal_(gen_);
      while (std::abs(e) > kNoiseTruncation) e = normal_(gen_);
      z.y = d.w_star.dot(z.x) + d.noise_sd * e;
      return z;
    }
    case Distribution::Kind::kMarginClassif: {
      const Vector u = d.w_star / d.w_star.norm();
      for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        z.x = gaussian(d.x_mean, root_);
        if (std::abs(u.dot(z.x)) >= d.margin) break;
        if (attempt + 1 == kMaxRejections) {
          throw DegenerateData("margin rejection rejected every draw");
        }
      }
      z.y = d.w_star.dot(z.x) >= 0.0 ? 1.0 : -1.0;
      if (unit_(gen_) < d.flip_prob) z.y = -z.y;
      return z;
    }
    case Distribution::Kind::kImbalancedGauss: {
      const bool positive = unit_(gen_) < d.p;
      z.y = positive ? 1.0 : -1.0;
      z.x = positive ? gaussian(d.mu_plus, root_)
                     : gaussian(d.mu_minus, root_minus_);
      return z;
    }
  }
  return z;
}

Dataset::Dataset(std::vector<Example> examples, std::uint64_t source_seed)
    : source_seed_(source_seed) {
  if (!examples.empty()) {
    const auto d = examples.front().x.size();
    for (const auto& z : examples) {
      if (z.x.size() != d) throw InvalidArgument("examples differ in dimension");
      if (!z.x.allFinite() || !std::isfinite(z.y)) {
        throw InvalidArgument("examples must be finite");
      }
    }
  }
  base_ = std::make_shared<const std::vector<Example>>(std::move(examples));
}

std::size_t Dataset::dim() const {
  return empty() ? 0 : static_cast<std::size_t>((*base_)[0].x.size());
}

Dataset Dataset::with_replacement(std::size_t i, Example z) const {
  if (i >= size()) {
    throw InvalidArgument("position " + std::to_string(i) + " out of range");
  }
  if (static_cast<std::size_t>(z.x.size()) != dim()) {
    throw InvalidArgument("replacement has the wrong dimension");
  }
  if (replacement_ && replaced_at_ != i) {
    // Two replaced positions: fall back to a private copy.
    auto copy = materialize();
    copy[i] = std::move(z);
    return Dataset(std::move(copy), source_seed_);
  }
  Dataset out = *this;
  out.replacement_ = std::make_shared<const Example>(std::move(z));
  out.replaced_at_ = i;
  return out;
}

std::optional<std::size_t> Dataset::replaced_position() const {
  if (replacement_) return replaced_at_;
  return std::nullopt;
}

std::vector<Example> Dataset::materialize() const {
  std::vector<Example> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i]);
  return out;
}

Dataset sample_dataset(const Distribution& dist, std::size_t n,
                       std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("n must be >= 1");
  dist.validate();
  Sampler sampler(dist, seed);
  std::vector<Example> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
  return Dataset(std::move(out), seed);
}

NeighborFamily make_neighbor_family(const Distribution& dist, std::size_t n,
                                    std::uint64_t seed) {
  NeighborFamily fam;
  fam.base = sample_dataset(dist, n, derive_seed(seed, seed_tag::kBaseSample));
  fam.ghost = sample_dataset(dist, n, derive_seed(seed, seed_tag::kGhostSample));
  fam.materialized.resize(n);
  for (std::size_t i = 0; i < n; ++i) fam.materialized[i] = i;
  return fam;
}

Dataset neighbor(const NeighborFamily& fam, std::size_t i) {
  const std::size_t n = fam.base.size();
  if (i < 1 || i > n) {
    throw InvalidArgument("neighbor index " + std::to_string(i) +
                          " outside 1.." + std::to_string(n));
  }
  if (fam.ghost.size() != n) {
    throw InvalidArgument("ghost sample size differs from the base sample");
  }
  return fam.base.with_replacement(i - 1, fam.ghost[i - 1]);
}

double empirical_risk(const LossSpec& loss, const Dataset& S, const Vector& w) {
  if (S.empty()) throw InvalidArgument("empirical risk of an empty dataset");
  std::vector<double> values(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) values[i] = loss_value(loss, w, S[i]);
  return pairwise_sum(values) / static_cast<double>(S.size());
}

bool has_closed_form_risk(const LossSpec& loss, const Distribution& dist) {
  return (loss.kind == LossKind::kLeastSquares && is_linreg(dist)) ||
         (loss.kind == LossKind::kAucSquare &&
          dist.kind == Distribution::Kind::kImbalancedGauss);
}

RiskEstimate population_risk_mc(const LossSpec& loss, const Distribution& dist,
                                const Vector& w, std::size_t mc_samples,
                                std::uint64_t seed) {
  if (mc_samples < 2) {
    throw InvalidArgument("Monte Carlo risk needs at least 2 samples");
  }
  dist.validate();
  Sampler sampler(dist, seed);
  std::vector<double> values(mc_samples);
  for (auto& v : values) v = loss_value(loss, w, sampler.next());
  const double m = static_cast<double>(mc_samples);
  const double mean = pairwise_sum(values) / m;
  for (auto& v : values) v = (v - mean) * (v - mean);
  const double var = pairwise_sum(values) / (m - 1.0);
  return {mean, std::sqrt(var / m)};
}

RiskEstimate population_risk(const LossSpec& loss, const Distribution& dist,
                             const Vector& w, std::size_t mc_samples,
                             std::uint64_t seed) {
  if (static_cast<std::size_t>(w.size()) != dist.dim()) {
    throw InvalidArgument("w does not match the distribution dimension");
  }
  if (loss.kind == LossKind::kLeastSquares && is_linreg(dist)) {
    const Vector e = w - dist.w_star;
    const Matrix second = dist.cov + dist.x_mean * dist.x_mean.transpose();
    const double noise = dist.noise_sd * dist.noise_sd *
                         truncated_normal_variance(kNoiseTruncation);
    return {0.5 * (e.dot(second * e) + noise), 0.0};
  }
  if (loss.kind == LossKind::kAucSquare &&
      dist.kind == Distribution::Kind::kImbalancedGauss) {
    const double p = dist.p;
    const double a = 1.0 - w.dot(dist.mu_plus - dist.mu_minus);
    return {p * (1.0 - p) * (a * a + w.dot((dist.cov_plus + dist.cov_minus) * w)),
            0.0};
  }
  if (mc_samples == 0) {
    throw InvalidArgument("no closed form for " + std::string(to_string(loss.kind)) +
                          " on " + std::string(to_string(dist.kind)) +
                          "; Monte Carlo samples required");
  }
  return population_risk_mc(loss, dist, w, mc_samples, seed);
}

OptimalRisk optimal_risk(const LossSpec& loss, const Distribution& dist) {
  if (loss.kind == LossKind::kLeastSquares && is_linreg(dist)) {
    return {0.5 * dist.noise_sd * dist.noise_sd *
                truncated_normal_variance(kNoiseTruncation),
            dist.w_star};
  }
  if (loss.kind == LossKind::kAucSquare &&
      dist.kind == Distribution::Kind::kImbalancedGauss) {
    const Vector diff = dist.mu_plus - dist.mu_minus;
    const Matrix A = dist.cov_plus + dist.cov_minus + diff * diff.transpose();
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
      throw DegenerateData("AUC risk has no unique minimizer");
    }
    Vector w = ldlt.solve(diff);
    return {population_risk(loss, dist, w, 0, 0).value, std::move(w)};
  }
  if (loss.kind == LossKind::kQNormHinge &&
      dist.kind == Distribution::Kind::kMarginClassif && dist.flip_prob == 0.0 &&
      dist.margin > 0.0) {
    return {0.0, dist.w_star / (dist.w_star.norm() * dist.margin)};
  }
  throw InvalidArgument("optimal risk unknown for " +
                        std::string(to_string(loss.kind)) + " on " +
                        std::string(to_string(dist.kind)));
}

Matrix empirical_covariance(const Dataset& S) {
  if (S.empty()) throw InvalidArgument("covariance of an empty dataset");
  const auto d = static_cast<Eigen::Index>(S.dim());
  Matrix c = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < S.size(); ++i) {
    c.selfadjointView<Eigen::Lower>().rankUpdate(S[i].x);
  }
  c = c.selfadjointView<Eigen::Lower>();
  return c / static_cast<double>(S.size());
}

double min_positive_eigenvalue(const Dataset& S, double threshold_ratio) {
  if (!(threshold_ratio >= 0.0)) {
    throw InvalidArgument("threshold ratio must be >= 0");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(empirical_covariance(S),
                                           Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();  // ascending
  const double top = ev[ev.size() - 1];
  if (!(top > 0.0)) {
    throw DegenerateData("empirical covariance has no positive eigenvalue");
  }
  const double threshold = threshold_ratio * top;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] > threshold) return ev[k];
  }
  return top;
}

double max_feature_sq_norm(const Dataset& S) {
  double m = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) m = std::max(m, S[i].x.squaredNorm());
  return m;
}

std::string dataset_to_csv(const Dataset& S) {
  std::string out = "y";
  for (std::size_t k = 1; k <= S.dim(); ++k) out += ",x" + std::to_string(k);
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < S.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", S[i].y);
    out += buf;
    for (Eigen::Index k = 0; k < S[i].x.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", S[i].x[k]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "y") {
    throw InvalidArgument("CSV header must be y,x1,...,xd");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k)) {
      throw InvalidArgument("CSV header must be y,x1,...,xd");
    }
  }
  const std::size_t d = header.size() - 1;
  std::vector<Example> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != d + 1) {
      throw InvalidArgument("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " fields, expected " +
                            std::to_string(d + 1));
    }
    Example z;
    z.y = parse_cell(cells[0], row);
    z.x.resize(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      z.x[static_cast<Eigen::Index>(k)] = parse_cell(cells[k + 1], row);
    }
    rows.push_back(std::move(z));
  }
  if (rows.empty()) throw InvalidArgument("CSV has no examples");
  return Dataset(std::move(rows));
}

void save_dataset_csv(const Dataset& S, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << dataset_to_csv(S);
  if (!f) throw InvalidArgument("failed writing '" + path + "'");
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return dataset_from_csv(ss.str());
}

}  // namespace stablab
