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

// Reduced-size versions of the theory checks, exposed through `warmstart
// verify`. Each check is self-contained and seeded.

#include <cmath>
#include <cstdio>
#include <random>

#include "warmstart/bandit.hpp"
#include "warmstart/harness.hpp"
#include "warmstart/prior.hpp"
#include "warmstart/random.hpp"

namespace warmstart::harness {

namespace {

using numerics::Matrix;
using numerics::Vector;

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

CheckResult eigen_equivalence(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto d = static_cast<std::size_t>(uniform_int(rng, 1, 8));
    const Matrix x = gaussian_matrix(3 * d, d, rng);
    const Vector theta = gaussian_matrix(1, d, rng).data();
    const double tau = std::pow(10.0, uniform_int(rng, -1, 1));
    const double p = 0.1 * uniform_int(rng, 0, 4);
    const double closed = prior::flip_bias_closed_form(x, theta, tau, p).exact;
    const prior::RidgePrior pr = prior::fit_ridge_prior(x, Vector(x.rows(), 0.0), tau);
    const numerics::SymMatrix m = prior::shrinkage_operator(pr, x);
    Vector dvec = m.multiply(theta);
    for (std::size_t j = 0; j < d; ++j) dvec[j] = (1.0 - 2.0 * p) * dvec[j] - theta[j];
    const double dense = pr.A0.quadratic_form(dvec);
    worst = std::max(worst, std::abs(closed - dense) / std::max(dense, 1e-300));
  }
  return {"eigen_equivalence", worst <= 1e-9, fmt("max relative error %.3g over 50 instances", worst)};
}

// Rows are synthetic arm features, labels Bernoulli(theta*^T x) flipped with
// probability p, so each target has variance at most 1/4.
CheckResult expectation_bound(std::uint64_t seed) {
  constexpr double kSigmaS = 0.5;
  constexpr int kDraws = 1000;
  int violations = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 3; ++k) {
    // Label variance falls short of sigma_s^2 by (1-2p)^2 Var(mu); a wide
    // mean spread keeps that margin above the Monte-Carlo error.
    const env::SyntheticEnvironment environment({6, 2, 0.0, 0.3}, derive_seed({seed, tag("eq7"), static_cast<std::uint64_t>(k)}));
    Rng rng(derive_seed({seed, tag("eq7-rows"), static_cast<std::uint64_t>(k)}));
    Matrix x(0, environment.dim());
    while (x.rows() < 200) {
      for (const auto& f : environment.draw_candidates(rng, false).features) x.append_row(f);
    }
    const auto& theta = environment.truth().theta_star;
    const double p = 0.05 * k;
    const double bound = prior::expected_B0_sq_bound(x, theta, 1.0, p, kSigmaS);
    const Vector mu = x.multiply(theta);
    double acc = 0.0;
    for (int draw = 0; draw < kDraws; ++draw) {
      Vector y(mu.size());
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const int label = bernoulli(rng, mu[i]) ? 1 : 0;
        y[i] = bernoulli(rng, p) ? 1 - label : label;
      }
      const double b0 = prior::prior_error_B0(prior::fit_ridge_prior(x, y, 1.0), theta);
      acc += b0 * b0;
    }
    const double mc = acc / kDraws;
    worst_ratio = std::max(worst_ratio, mc / bound);
    violations += mc > bound;
  }
  return {"expectation_bound", violations == 0,
          fmt("max MC/bound ratio %.4f, %g violations", worst_ratio, violations)};
}

CheckResult hp_frequency(std::uint64_t seed) {
  constexpr double kSigmaS = 0.5;
  constexpr double kDelta = 0.1;
  constexpr int kDraws = 2000;
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Matrix x = gaussian_matrix(100, 5, rng);
    const double bound = prior::hp_noise_bound(x, 1.0, kSigmaS, kDelta);
    const numerics::Cholesky chol(prior::fit_ridge_prior(x, Vector(x.rows(), 0.0), 1.0).A0);
    const double h = kSigmaS * std::sqrt(3.0);
    std::uniform_real_distribution<double> eps(-h, h);
    int exceed = 0;
    for (int draw = 0; draw < kDraws; ++draw) {
      Vector e(x.rows());
      for (double& v : e) v = eps(rng);
      exceed += std::sqrt(chol.inverse_quadratic_form(x.transpose_multiply(e))) > bound;
    }
    worst = std::max(worst, static_cast<double>(exceed) / kDraws);
  }
  return {"hp_noise_bound", worst <= kDelta + 0.02, fmt("max exceedance frequency %.4f", worst)};
}

CheckResult coverage(std::uint64_t seed) {
  constexpr int kRuns = 40;
  constexpr int kHorizon = 300;
  constexpr double kDelta = 0.1;
  constexpr double kSigma = 0.5;
  int covered = 0;
  for (int run = 0; run < kRuns; ++run) {
    const auto r = static_cast<std::uint64_t>(run);
    const env::SyntheticEnvironment environment({5, 2, 0.0, 0.15}, derive_seed({seed, tag("cov-theta"), r}));
    const auto data = oracle::simulate_dataset(environment, environment.truth(), 100,
                                               derive_seed({seed, tag("cov-data"), r}));
    const auto rows = prior::regression_rows(data, data.labels);
    const auto pr = prior::fit_ridge_prior(rows.x, rows.y, 1.0);
    const double b0 = prior::prior_error_B0(pr, environment.truth().theta_star);
    bool ok = true;
    TrialHooks hooks;
    hooks.after_update = [&](const bandit::LinUcbPolicy& policy, const env::Round&) {
      ok = ok && bandit::bound_monitor(policy.shared(), environment.truth(), b0, kDelta, kSigma);
    };
    run_trial(environment.stream(kHorizon, derive_seed({seed, tag("cov-stream"), r})), &pr,
              {kHorizon, bandit::BanditMode::kShared, bandit::AlphaMode::adaptive(kDelta, kSigma, b0)},
              hooks);
    covered += ok;
  }
  const double frac = static_cast<double>(covered) / kRuns;
  return {"confidence_coverage", frac >= 1.0 - kDelta - 0.05,
          fmt("bound held at every round in %.3f of runs", frac)};
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  return {eigen_equivalence(derive_seed({seed, tag("eigen")})),
          expectation_bound(derive_seed({seed, tag("expectation")})),
          hp_frequency(derive_seed({seed, tag("hp")})),
          coverage(derive_seed({seed, tag("coverage")}))};
}

}  // namespace warmstart::harness
