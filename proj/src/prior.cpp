// Copyright 2026 The Warmstart Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "warmstart/prior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "warmstart/error.hpp"

namespace warmstart::prior {

namespace {

void check_rate(double p) {
  if (p < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative flip rate");
  if (p >= 0.5) {
    throw Error(ErrorCode::kRateNotRecoded,
                "flip rate " + std::to_string(p) + " >= 0.5; recode with effective_rate first");
  }
}

void check_tau(double tau_pre) {
  if (!(tau_pre > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau_pre must be > 0");
}

void check_theta(const Matrix& x, std::span<const double> theta) {
  if (x.cols() != theta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "design has " + std::to_string(x.cols()) +
                                                   " columns, parameter has " +
                                                   std::to_string(theta.size()));
  }
}

SymMatrix regularized_gram(const Matrix& x, double tau_pre) {
  check_tau(tau_pre);
  if (x.cols() == 0) throw Error(ErrorCode::kDimensionMismatch, "design has no columns");
  SymMatrix a = x.rows() ? SymMatrix::gram(x) : SymMatrix(x.cols());
  a.add_diagonal(tau_pre);
  return a;
}

// Eigenvalues of X^T X, clipped at zero against rounding.
numerics::EigenDecomposition gram_spectrum(const Matrix& x) {
  numerics::EigenDecomposition e =
      numerics::sym_eigen(x.rows() ? SymMatrix::gram(x) : SymMatrix(x.cols()));
  for (double& l : e.eigenvalues) l = std::max(l, 0.0);
  return e;
}

// A0^{-1} X^T X v, through a Cholesky solve.
Vector apply_shrinkage(const numerics::Cholesky& chol, const Matrix& x, std::span<const double> v) {
  return chol.solve(x.transpose_multiply(x.multiply(v)));
}

}  // namespace

TargetEncoding parse_target_encoding(std::string_view name) {
  if (name == "both_rows") return TargetEncoding::kBothRows;
  if (name == "chosen_only") return TargetEncoding::kChosenOnly;
  throw Error(ErrorCode::kConfigError, "unknown target encoding '" + std::string(name) + "'");
}

std::string_view target_encoding_name(TargetEncoding encoding) {
  return encoding == TargetEncoding::kBothRows ? "both_rows" : "chosen_only";
}

RegressionRows regression_rows(const oracle::PreferenceDataset& data,
                               const std::vector<int>& labels, TargetEncoding encoding) {
  if (labels.size() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one label per query required");
  }
  RegressionRows rows{Matrix(0, data.dim()), {}};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& features = data.queries[i].pair_features;
    const int chosen = labels[i];
    if (chosen < 1 || chosen > static_cast<int>(features.size())) {
      throw Error(ErrorCode::kLabelOutOfRange, "label out of range at query " + std::to_string(i));
    }
    for (std::size_t a = 0; a < features.size(); ++a) {
      const bool is_chosen = static_cast<int>(a + 1) == chosen;
      if (!is_chosen && encoding == TargetEncoding::kChosenOnly) continue;
      rows.x.append_row(features[a]);
      rows.y.push_back(is_chosen ? 1.0 : 0.0);
    }
  }
  return rows;
}

RidgePrior fit_ridge_prior(const Matrix& x, std::span<const double> targets, double tau_pre) {
  if (x.rows() != targets.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "design has " + std::to_string(x.rows()) +
                                                   " rows, targets has " +
                                                   std::to_string(targets.size()));
  }
  RidgePrior prior;
  prior.A0 = regularized_gram(x, tau_pre);
  prior.b0 = x.rows() ? x.transpose_multiply(targets) : Vector(x.cols(), 0.0);
  prior.theta0 = numerics::cholesky_solve(prior.A0, prior.b0);
  prior.tau_pre = tau_pre;
  prior.n_s = x.rows();
  return prior;
}

SymMatrix shrinkage_operator(const RidgePrior& prior, const Matrix& x) {
  if (x.cols() != prior.dim()) throw Error(ErrorCode::kDimensionMismatch, "design/prior dims differ");
  const numerics::Cholesky chol(prior.A0);
  const std::size_t d = prior.dim();
  Matrix m(d, d);
  Vector e(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = 1.0;
    const Vector col = apply_shrinkage(chol, x, e);
    for (std::size_t i = 0; i < d; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return SymMatrix::symmetrized(m);
}

double prior_error_B0(const RidgePrior& prior, std::span<const double> theta_ref) {
  if (theta_ref.size() != prior.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "reference parameter dim differs from prior");
  }
  return numerics::mahalanobis_norm(numerics::subtract(prior.theta0, theta_ref), prior.A0);
}

FlipBias flip_bias_closed_form(const Matrix& x, std::span<const double> theta_star,
                               double tau_pre, double p) {
  check_rate(p);
  check_tau(tau_pre);
  check_theta(x, theta_star);
  const numerics::EigenDecomposition e = gram_spectrum(x);
  const Vector rotated = e.eigenvectors.transpose_multiply(theta_star);
  FlipBias out;
  for (std::size_t i = 0; i < rotated.size(); ++i) {
    const double l = e.eigenvalues[i];
    const double w = tau_pre + 2.0 * p * l;
    const double c = w * w / (l + tau_pre) * rotated[i] * rotated[i];
    out.eigen_terms.push_back({l, c});
    out.exact += c;
  }
  return out;
}

double flip_bias_with_offset(const Matrix& x, std::span<const double> theta_star,
                             double tau_pre, double p) {
  check_rate(p);
  check_theta(x, theta_star);
  const SymMatrix a0 = regularized_gram(x, tau_pre);
  // D = A0^{-1} ((1-2p) X^T X theta* + p X^T 1) - theta*
  Vector rhs = x.transpose_multiply(x.multiply(theta_star));
  for (double& v : rhs) v *= 1.0 - 2.0 * p;
  if (x.rows()) numerics::axpy(p, x.transpose_multiply(Vector(x.rows(), 1.0)), rhs);
  const Vector d = numerics::subtract(numerics::cholesky_solve(a0, rhs), theta_star);
  return a0.quadratic_form(d);
}

double hat_trace(const Matrix& x, double tau_pre) {
  check_tau(tau_pre);
  double tr = 0.0;
  for (double l : gram_spectrum(x).eigenvalues) tr += l / (l + tau_pre);
  return tr;
}

double expected_B0_sq_bound(const Matrix& x, std::span<const double> theta_star, double tau_pre,
                            double p, double sigma_s) {
  return flip_bias_with_offset(x, theta_star, tau_pre, p) +
         sigma_s * sigma_s * hat_trace(x, tau_pre);
}

double high_coverage_approx(const Matrix& x, std::span<const double> theta_star, double p,
                            double sigma_s, double tau_pre) {
  check_rate(p);
  check_theta(x, theta_star);
  const Vector xt = x.multiply(theta_star);
  return 4.0 * p * p * numerics::dot(xt, xt) + sigma_s * sigma_s * hat_trace(x, tau_pre);
}

MisalignmentParts misalignment_decomposition(const Matrix& x, double tau_pre,
                                             std::span<const double> theta_real,
                                             std::span<const double> delta) {
  check_theta(x, theta_real);
  check_theta(x, delta);
  const numerics::Cholesky chol(regularized_gram(x, tau_pre));
  MisalignmentParts parts;
  parts.shrinkage_part = numerics::subtract(apply_shrinkage(chol, x, theta_real), theta_real);
  parts.transfer_part = apply_shrinkage(chol, x, delta);
  return parts;
}

double hp_noise_bound(const Matrix& x, double tau_pre, double sigma_s, double delta_s) {
  check_tau(tau_pre);
  if (!(delta_s > 0.0 && delta_s < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta_s must lie in (0, 1)");
  }
  double tr = 0.0;
  double op = 0.0;
  for (double l : gram_spectrum(x).eigenvalues) {
    const double h = l / (l + tau_pre);
    tr += h;
    op = std::max(op, h);
  }
  return sigma_s * (std::sqrt(tr) + std::sqrt(2.0 * op * std::log(1.0 / delta_s)));
}

nlohmann::json PriorErrorReport::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : eigen_terms) terms.push_back({{"lambda", t.lambda}, {"contribution", t.contribution}});
  return {{"B0", B0},
          {"deterministic_bias_sq", deterministic_bias_sq},
          {"flip_bias_sq", flip_bias_sq},
          {"variance_term", variance_term},
          {"eigen_terms", terms},
          {"expected_B0_sq_bound", expected_B0_sq_bound},
          {"high_coverage_approx", high_coverage_approx},
          {"hp_bound", hp_bound}};
}

PriorErrorReport prior_error_report(const RidgePrior& prior, const Matrix& x,
                                    std::span<const double> theta_ref, double p,
                                    double sigma_s, double delta_s) {
  PriorErrorReport r;
  r.B0 = prior_error_B0(prior, theta_ref);
  FlipBias fb = flip_bias_closed_form(x, theta_ref, prior.tau_pre, p);
  r.flip_bias_sq = fb.exact;
  r.eigen_terms = std::move(fb.eigen_terms);
  r.deterministic_bias_sq = flip_bias_with_offset(x, theta_ref, prior.tau_pre, p);
  r.variance_term = sigma_s * sigma_s * hat_trace(x, prior.tau_pre);
  r.expected_B0_sq_bound = r.deterministic_bias_sq + r.variance_term;
  r.high_coverage_approx = high_coverage_approx(x, theta_ref, p, sigma_s, prior.tau_pre);
  r.hp_bound = hp_noise_bound(x, prior.tau_pre, sigma_s, delta_s);
  return r;
}

}  // namespace warmstart::prior
