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

// Ridge warm-start prior and the quantities that bound its error:
//
//   A0 = X^T X + tau I,  b0 = X^T y,  theta0 = A0^{-1} b0,
//   M  = A0^{-1} X^T X,  B0 = ||theta0 - theta_ref||_{A0}.
//
// Eigen-based quantities use sym_eigen(X^T X) (d x d), never the n x n
// kernel.

#ifndef WARMSTART_PRIOR_HPP_
#define WARMSTART_PRIOR_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "warmstart/numerics.hpp"
#include "warmstart/oracle.hpp"

namespace warmstart::prior {

using numerics::Matrix;
using numerics::SymMatrix;
using numerics::Vector;

// How one labelled query becomes regression rows.
//  kBothRows:   every arm contributes a row, target 1 if chosen else 0.
//  kChosenOnly: only the chosen arm's row, target 1.
enum class TargetEncoding { kBothRows, kChosenOnly };

TargetEncoding parse_target_encoding(std::string_view name);  // "both_rows" | "chosen_only"
std::string_view target_encoding_name(TargetEncoding encoding);

struct RegressionRows {
  Matrix x;
  Vector y;
};

// `labels` overrides data.labels (pass corrupted labels here).
RegressionRows regression_rows(const oracle::PreferenceDataset& data,
                               const std::vector<int>& labels,
                               TargetEncoding encoding = TargetEncoding::kBothRows);

struct RidgePrior {
  SymMatrix A0{1};
  Vector b0;
  Vector theta0;
  double tau_pre = 1.0;
  std::size_t n_s = 0;

  std::size_t dim() const noexcept { return theta0.size(); }
};

// Throws Error(kDimensionMismatch) when rows(X) != len(targets),
// Error(kInvalidArgument) unless tau_pre > 0.
RidgePrior fit_ridge_prior(const Matrix& x, std::span<const double> targets, double tau_pre);

SymMatrix shrinkage_operator(const RidgePrior& prior, const Matrix& x);

// ||theta0 - theta_ref||_{A0}
double prior_error_B0(const RidgePrior& prior, std::span<const double> theta_ref);

struct EigenTerm {
  double lambda = 0.0;
  double contribution = 0.0;
};

struct FlipBias {
  double exact = 0.0;
  std::vector<EigenTerm> eigen_terms;  // descending lambda
};

// sum_i (tau + 2 p lambda_i)^2 / (lambda_i + tau) * (U^T theta*)_i^2, which
// equals ||((1-2p) M - I) theta*||^2_{A0}.
// The functions below taking p throw Error(kRateNotRecoded) for p >= 0.5.
FlipBias flip_bias_closed_form(const Matrix& x, std::span<const double> theta_star,
                               double tau_pre, double p);

// ||((1-2p) M - I) theta* + p A0^{-1} X^T 1||^2_{A0}, evaluated densely.
double flip_bias_with_offset(const Matrix& x, std::span<const double> theta_star,
                             double tau_pre, double p);

// tr(X A0^{-1} X^T) = sum_i lambda_i / (lambda_i + tau).
double hat_trace(const Matrix& x, double tau_pre);

// flip_bias_with_offset + sigma_s^2 tr(X A0^{-1} X^T).
double expected_B0_sq_bound(const Matrix& x, std::span<const double> theta_star, double tau_pre,
                            double p, double sigma_s);

// 4 p^2 theta*^T X^T X theta* + sigma_s^2 tr(X A0^{-1} X^T).
double high_coverage_approx(const Matrix& x, std::span<const double> theta_star, double p,
                            double sigma_s, double tau_pre);

struct MisalignmentParts {
  Vector shrinkage_part;  // (M - I) theta_real
  Vector transfer_part;   // M delta
};

MisalignmentParts misalignment_decomposition(const Matrix& x, double tau_pre,
                                             std::span<const double> theta_real,
                                             std::span<const double> delta);

// sigma_s (sqrt(tr) + sqrt(2 op log(1/delta_s))) with tr and op the trace and
// top eigenvalue of X A0^{-1} X^T.
double hp_noise_bound(const Matrix& x, double tau_pre, double sigma_s, double delta_s);

struct PriorErrorReport {
  double B0 = 0.0;
  double deterministic_bias_sq = 0.0;  // full term, intercept drift included
  double flip_bias_sq = 0.0;           // eigen closed form; sum of eigen_terms
  double variance_term = 0.0;
  std::vector<EigenTerm> eigen_terms;
  double expected_B0_sq_bound = 0.0;
  double high_coverage_approx = 0.0;
  double hp_bound = 0.0;

  nlohmann::json to_json() const;
};

// Evaluates every bound for the prior fit on `x`, measuring B0 against
// theta_ref.
PriorErrorReport prior_error_report(const RidgePrior& prior, const Matrix& x,
                                    std::span<const double> theta_ref, double p,
                                    double sigma_s, double delta_s);

}  // namespace warmstart::prior

#endif  // WARMSTART_PRIOR_HPP_
