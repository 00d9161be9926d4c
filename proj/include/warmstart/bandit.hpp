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

// Sleeping LinUCB. The default engine shares one (V, b) across arms; a
// disjoint mode keeps one (V, b) per arm id.
//
// Score of arm x: theta_hat^T x + alpha * sqrt(x^T V^{-1} x), ties to the
// lowest arm id. alpha is either fixed or beta_{t-1}(delta) + B0, with
//   beta_t(delta) = sigma * sqrt(2 (1/2 logdet V_t - 1/2 logdet V_0 + log(1/delta))).

#ifndef WARMSTART_BANDIT_HPP_
#define WARMSTART_BANDIT_HPP_

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "warmstart/env.hpp"
#include "warmstart/numerics.hpp"
#include "warmstart/prior.hpp"

namespace warmstart::bandit {

using env::ArmId;
using numerics::SymMatrix;
using numerics::Vector;

inline constexpr double kDefaultAlpha = 10.0;

struct AlphaMode {
  enum class Kind { kFixed, kAdaptive };
  Kind kind = Kind::kFixed;
  double alpha = kDefaultAlpha;  // kFixed
  double delta = 0.1;            // kAdaptive
  double sigma = 0.5;            // kAdaptive
  double B0 = 0.0;               // kAdaptive

  static AlphaMode fixed(double alpha);
  static AlphaMode adaptive(double delta, double sigma, double B0);

  nlohmann::json to_json() const;
  static AlphaMode from_json(const nlohmann::json& doc);
};

class BanditState;
namespace detail {
void set_theta_hat(BanditState& state, Vector theta);
}

class BanditState {
 public:
  // V = v0, b = b0, theta_hat = V^{-1} b0.
  BanditState(SymMatrix v0, Vector b0, AlphaMode mode);

  std::size_t dim() const noexcept { return b_.size(); }
  const SymMatrix& V() const noexcept { return v_; }
  const SymMatrix& V0() const noexcept { return v0_; }
  const Vector& b() const noexcept { return b_; }
  const Vector& theta_hat() const noexcept { return theta_hat_; }
  int t() const noexcept { return t_; }
  const AlphaMode& alpha_mode() const noexcept { return mode_; }

  double log_det() const { return chol_.log_determinant(); }
  double initial_log_det() const noexcept { return initial_log_det_; }
  // sqrt(x^T V^{-1} x)
  double width(std::span<const double> x) const;
  // Exploration weight for the next selection.
  double current_alpha() const;
  double score(std::span<const double> x) const;

  // V += x x^T, b += r x, theta_hat re-solved. Throws
  // Error(kDimensionMismatch) / Error(kInvalidArgument) for r outside {0,1}.
  void update(std::span<const double> x, int reward);

  // V row-major, b, t, alpha_mode, V0 row-major.
  nlohmann::json to_json() const;
  static BanditState from_json(const nlohmann::json& doc);

 private:
  friend void detail::set_theta_hat(BanditState&, Vector);

  SymMatrix v0_;
  SymMatrix v_;
  numerics::Cholesky chol_;
  Vector b_;
  Vector theta_hat_;
  int t_ = 0;
  AlphaMode mode_;
  double initial_log_det_;
};

// V = A0, b = b0, theta_hat = theta0.
BanditState init_warm(const prior::RidgePrior& prior, AlphaMode mode = {});
// V = I, b = 0.
BanditState init_cold(std::size_t dim, AlphaMode mode = {});

// Throws Error(kDimensionMismatch) when round features differ from state dim.
ArmId select_arm(const BanditState& state, const env::Round& round);

void update(BanditState& state, std::span<const double> chosen_features, int reward);

double confidence_radius(const BanditState& state, double delta, double sigma,
                         double initial_log_det);

// ||theta_hat - theta*||_{V_t} <= beta_t(delta) + B0.
bool bound_monitor(const BanditState& state, const env::GroundTruth& truth, double B0,
                   double delta, double sigma);

struct RegretLedger {
  std::vector<int> instantaneous;
  std::vector<long long> cumulative;

  long long total() const noexcept { return cumulative.empty() ? 0 : cumulative.back(); }
};

// Appends max realized reward minus the chosen arm's realized reward.
// Throws Error(kArmNotAvailable).
int record_regret(RegretLedger& ledger, const env::Round& round, ArmId chosen);

enum class BanditMode { kShared, kDisjoint };
BanditMode parse_bandit_mode(std::string_view name);  // "shared" | "disjoint"
std::string_view bandit_mode_name(BanditMode mode);

// Runs either engine behind one interface. Disjoint arms are created lazily
// from the initial state the first time an arm id is seen.
class LinUcbPolicy {
 public:
  LinUcbPolicy(BanditMode mode, BanditState initial);

  BanditMode mode() const noexcept { return mode_; }
  ArmId select(const env::Round& round) const;
  void observe(ArmId arm, std::span<const double> x, int reward);

  // Shared mode only.
  const BanditState& shared() const;
  // Disjoint mode: state for `arm` (the initial state when unseen).
  const BanditState& arm_state(ArmId arm) const;

 private:
  BanditMode mode_;
  BanditState base_;  // live state (shared) or per-arm template (disjoint)
  std::map<ArmId, BanditState> arms_;
};

}  // namespace warmstart::bandit

#endif  // WARMSTART_BANDIT_HPP_
