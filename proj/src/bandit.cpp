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

#include "warmstart/bandit.hpp"

#include <cmath>
#include <string>

#include "warmstart/error.hpp"

namespace warmstart::bandit {

namespace {

nlohmann::json sym_to_json(const SymMatrix& m) { return m.data(); }

SymMatrix sym_from_json(const nlohmann::json& doc, std::size_t dim) {
  const auto values = doc.get<std::vector<double>>();
  if (values.size() != dim * dim) {
    throw Error(ErrorCode::kSchemaViolation, "matrix snapshot has wrong size");
  }
  numerics::Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = values[i * dim + j];
  return SymMatrix::symmetrized(m);
}

double beta(const BanditState& state, double delta, double sigma, double initial_log_det) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  if (sigma < 0.0) throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  const double inner =
      0.5 * state.log_det() - 0.5 * initial_log_det + std::log(1.0 / delta);
  return sigma * std::sqrt(2.0 * std::max(inner, 0.0));
}

}  // namespace

AlphaMode AlphaMode::fixed(double alpha) {
  if (alpha < 0.0) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  AlphaMode m;
  m.alpha = alpha;
  return m;
}

AlphaMode AlphaMode::adaptive(double delta, double sigma, double B0) {
  if (!(delta > 0.0 && delta < 1.0) || sigma < 0.0 || B0 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "adaptive alpha needs delta in (0,1), sigma, B0 >= 0");
  }
  AlphaMode m;
  m.kind = Kind::kAdaptive;
  m.delta = delta;
  m.sigma = sigma;
  m.B0 = B0;
  return m;
}

nlohmann::json AlphaMode::to_json() const {
  if (kind == Kind::kFixed) return {{"kind", "fixed"}, {"alpha", alpha}};
  return {{"kind", "adaptive"}, {"delta", delta}, {"sigma", sigma}, {"B0", B0}};
}

AlphaMode AlphaMode::from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "fixed") return fixed(doc.at("alpha").get<double>());
  if (kind == "adaptive") {
    return adaptive(doc.at("delta").get<double>(), doc.at("sigma").get<double>(),
                    doc.at("B0").get<double>());
  }
  throw Error(ErrorCode::kSchemaViolation, "unknown alpha mode '" + kind + "'");
}

BanditState::BanditState(SymMatrix v0, Vector b0, AlphaMode mode)
    : v0_(v0), v_(std::move(v0)), chol_(v_), b_(std::move(b0)), mode_(mode) {
  if (b_.size() != v_.dim()) throw Error(ErrorCode::kDimensionMismatch, "V and b dims differ");
  theta_hat_ = chol_.solve(b_);
  initial_log_det_ = chol_.log_determinant();
}

double BanditState::width(std::span<const double> x) const {
  if (x.size() != dim()) throw Error(ErrorCode::kDimensionMismatch, "feature dim differs from state");
  return std::sqrt(std::max(chol_.inverse_quadratic_form(x), 0.0));
}

double BanditState::current_alpha() const {
  if (mode_.kind == AlphaMode::Kind::kFixed) return mode_.alpha;
  return beta(*this, mode_.delta, mode_.sigma, initial_log_det_) + mode_.B0;
}

double BanditState::score(std::span<const double> x) const {
  return numerics::dot(theta_hat_, x) + current_alpha() * width(x);
}

void BanditState::update(std::span<const double> x, int reward) {
  if (x.size() != dim()) throw Error(ErrorCode::kDimensionMismatch, "feature dim differs from state");
  if (reward != 0 && reward != 1) throw Error(ErrorCode::kInvalidArgument, "reward must be 0 or 1");
  v_.add_outer(x);
  chol_ = numerics::Cholesky(v_);
  if (reward) numerics::axpy(1.0, x, b_);
  theta_hat_ = chol_.solve(b_);
  ++t_;
}

nlohmann::json BanditState::to_json() const {
  return {{"dim", dim()},     {"V", sym_to_json(v_)},          {"b", b_},
          {"t", t_},          {"alpha_mode", mode_.to_json()}, {"V0", sym_to_json(v0_)}};
}

BanditState BanditState::from_json(const nlohmann::json& doc) {
  try {
    const auto d = doc.at("dim").get<std::size_t>();
    BanditState s(sym_from_json(doc.at("V0"), d), doc.at("b").get<Vector>(),
                  AlphaMode::from_json(doc.at("alpha_mode")));
    s.v_ = sym_from_json(doc.at("V"), d);
    s.chol_ = numerics::Cholesky(s.v_);
    s.theta_hat_ = s.chol_.solve(s.b_);
    s.t_ = doc.at("t").get<int>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad bandit snapshot: ") + e.what());
  }
}

namespace detail {
void set_theta_hat(BanditState& state, Vector theta) {
  if (theta.size() != state.dim()) throw Error(ErrorCode::kDimensionMismatch, "theta dim differs");
  state.theta_hat_ = std::move(theta);
}
}  // namespace detail

BanditState init_warm(const prior::RidgePrior& prior, AlphaMode mode) {
  BanditState s(prior.A0, prior.b0, mode);
  detail::set_theta_hat(s, prior.theta0);
  return s;
}

BanditState init_cold(std::size_t dim, AlphaMode mode) {
  return BanditState(SymMatrix::identity(dim), Vector(dim, 0.0), mode);
}

ArmId select_arm(const BanditState& state, const env::Round& round) {
  if (round.dim() != state.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "round features differ from state dim");
  }
  const double alpha = state.current_alpha();
  ArmId best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < round.size(); ++i) {
    const auto& x = round.features()[i];
    const double s = numerics::dot(state.theta_hat(), x) + alpha * state.width(x);
    const ArmId a = round.arms()[i];
    if (i == 0 || s > best_score || (s == best_score && a < best)) {
      best = a;
      best_score = s;
    }
  }
  return best;
}

void update(BanditState& state, std::span<const double> chosen_features, int reward) {
  state.update(chosen_features, reward);
}

double confidence_radius(const BanditState& state, double delta, double sigma,
                         double initial_log_det) {
  return beta(state, delta, sigma, initial_log_det);
}

bool bound_monitor(const BanditState& state, const env::GroundTruth& truth, double B0,
                   double delta, double sigma) {
  if (truth.theta_star.size() != state.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta* dim differs from state");
  }
  const double lhs =
      numerics::mahalanobis_norm(numerics::subtract(state.theta_hat(), truth.theta_star), state.V());
  return lhs <= confidence_radius(state, delta, sigma, state.initial_log_det()) + B0;
}

int record_regret(RegretLedger& ledger, const env::Round& round, ArmId chosen) {
  const int delta = round.best_reward() - round.reward_of(chosen);
  ledger.instantaneous.push_back(delta);
  ledger.cumulative.push_back(ledger.total() + delta);
  return delta;
}

BanditMode parse_bandit_mode(std::string_view name) {
  if (name == "shared") return BanditMode::kShared;
  if (name == "disjoint") return BanditMode::kDisjoint;
  throw Error(ErrorCode::kConfigError, "unknown bandit mode '" + std::string(name) + "'");
}

std::string_view bandit_mode_name(BanditMode mode) {
  return mode == BanditMode::kShared ? "shared" : "disjoint";
}

LinUcbPolicy::LinUcbPolicy(BanditMode mode, BanditState initial)
    : mode_(mode), base_(std::move(initial)) {}

ArmId LinUcbPolicy::select(const env::Round& round) const {
  if (mode_ == BanditMode::kShared) return select_arm(base_, round);
  if (round.dim() != base_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "round features differ from state dim");
  }
  ArmId best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < round.size(); ++i) {
    const ArmId a = round.arms()[i];
    const double s = arm_state(a).score(round.features()[i]);
    if (i == 0 || s > best_score || (s == best_score && a < best)) {
      best = a;
      best_score = s;
    }
  }
  return best;
}

void LinUcbPolicy::observe(ArmId arm, std::span<const double> x, int reward) {
  if (mode_ == BanditMode::kShared) {
    base_.update(x, reward);
    return;
  }
  arms_.try_emplace(arm, base_).first->second.update(x, reward);
}

const BanditState& LinUcbPolicy::shared() const {
  if (mode_ != BanditMode::kShared) throw Error(ErrorCode::kInvalidArgument, "policy is disjoint");
  return base_;
}

const BanditState& LinUcbPolicy::arm_state(ArmId arm) const {
  const auto it = arms_.find(arm);
  return it == arms_.end() ? base_ : it->second;
}

}  // namespace warmstart::bandit
