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

// Experiment orchestration: warm/cold trial runs, the noise sweep, %-regret
// aggregation, the B0-hat diagnostic and output writers.

#ifndef WARMSTART_HARNESS_HPP_
#define WARMSTART_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "warmstart/bandit.hpp"
#include "warmstart/env.hpp"
#include "warmstart/noise.hpp"
#include "warmstart/oracle.hpp"
#include "warmstart/prior.hpp"

namespace warmstart::harness {

enum class Pairing { kPaired, kUnpaired };
enum class CiMethod { kNormal, kStudentT };

struct EnvironmentSpec {
  int dim = 20;
  int arms = 2;
  double sleeping_rate = 0.0;
  double mean_spread = 0.3;
  // ||Delta||_2 as a multiple of ||theta*||_2; synthetic labels come from
  // theta* + Delta while the bandit stream keeps theta*.
  double misalignment_scale = 0.0;
};

// Optional real data replacing the synthetic bandit stream. Each trial
// replays a seeded permutation of the ingested rounds.
struct RealDataSpec {
  std::filesystem::path csv;
  std::filesystem::path schema;
  bool reduce_to_binary = false;
};

struct SweepConfig {
  std::vector<noise::NoiseKind> noise_kinds{noise::NoiseKind::kRandomReplacement,
                                            noise::NoiseKind::kPreferenceFlipping};
  std::vector<double> p_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<int> synthetic_sizes{1000, 3000, 10000};
  int trials = 10;
  int horizon = 5000;
  double tau_pre = 1.0;
  double alpha = bandit::kDefaultAlpha;
  double delta = 0.1;
  double sigma = 0.5;
  double sigma_s = 0.5;
  std::uint64_t master_seed = 0;
  EnvironmentSpec environment;
  // Pre-generated synthetic preference set; cells of size N use its first N
  // queries. Required when real_data is set.
  std::optional<std::filesystem::path> synthetic_data;
  std::optional<RealDataSpec> real_data;
  prior::TargetEncoding target_encoding = prior::TargetEncoding::kBothRows;
  bandit::BanditMode bandit_mode = bandit::BanditMode::kShared;
  bandit::AlphaMode::Kind alpha_mode = bandit::AlphaMode::Kind::kFixed;
  Pairing pairing = Pairing::kPaired;
  CiMethod ci_method = CiMethod::kNormal;
  int threads = 1;

  // Throws Error(kConfigError).
  void validate() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static SweepConfig from_json(const nlohmann::json& doc);
  static SweepConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct TrialConfig {
  int horizon = 0;
  bandit::BanditMode mode = bandit::BanditMode::kShared;
  bandit::AlphaMode alpha;
};

struct TrialHooks {
  // Replaces LinUCB selection (oracle or random policies in tests).
  std::function<env::ArmId(const env::Round&)> selector;
  // Called after every update.
  std::function<void(const bandit::LinUcbPolicy&, const env::Round&)> after_update;
};

// Warm when `prior` is set, cold otherwise. Runs min(horizon, stream) rounds
// of select, observe, update, record. Throws Error(kInvalidArgument) when
// the stream is shorter than the horizon.
bandit::RegretLedger run_trial(const std::vector<env::Round>& stream,
                               const prior::RidgePrior* prior, const TrialConfig& config,
                               const TrialHooks& hooks = {});

struct PctDelta {
  double mean = 0.0;
  double ci95 = 0.0;
};

// 100 (mean(cold) - mean(warm)) / mean(cold). Paired CI uses the spread of
// 100 (cold_i - warm_i) / mean(cold); unpaired combines both variances.
// Throws Error(kZeroColdRegret) when mean(cold) <= 0, Error(kInvalidArgument)
// for fewer than two trials or unequal lengths (paired).
PctDelta pct_delta_regret(const std::vector<double>& warm_finals,
                          const std::vector<double>& cold_finals,
                          Pairing pairing = Pairing::kPaired,
                          CiMethod method = CiMethod::kNormal);

// Half-width of the 95% interval for the mean of `values`.
double ci95_half_width(const std::vector<double>& values, CiMethod method = CiMethod::kNormal);

enum class Verdict { kWarmFavored, kMarginal, kColdFavored };
std::string_view verdict_name(Verdict v);
// warm_favored when b0_hat < proxy; marginal up to 10% above the proxy.
Verdict classify(double b0_hat, double cold_proxy);

struct DiagnosticReport {
  double B0_hat = 0.0;
  double B0_cold_proxy = 0.0;
  Verdict verdict = Verdict::kColdFavored;
  prior::RidgePrior synthetic_prior;
  numerics::Vector theta_real;

  nlohmann::json to_json() const;
};

// Ridge-fits theta0 on the synthetic rows and theta_real on every available
// arm's (features, realized reward) in `real_stream`, both with tau_pre.
DiagnosticReport estimate_B0_hat(const noise::CorruptedDataset& synthetic,
                                 const std::vector<env::Round>& real_stream, double tau_pre,
                                 prior::TargetEncoding encoding = prior::TargetEncoding::kBothRows);

struct CellResult {
  noise::NoiseKind kind = noise::NoiseKind::kNone;
  double p = 0.0;
  int n = 0;
  std::vector<double> warm_mean;  // per round
  std::vector<double> warm_ci95;
  std::vector<double> cold_mean;
  std::vector<double> cold_ci95;
  std::vector<double> warm_finals;  // per trial
  std::vector<double> cold_finals;
  std::vector<double> b0_true;      // per trial; empty without a known theta*
  std::vector<double> b0_hat;       // per trial
  std::vector<double> cold_proxy;   // per trial
  PctDelta pct;
};

struct SweepResult {
  std::vector<CellResult> cells;
};

// Called after each completed cell, in cell order.
using CellSink = std::function<void(const CellResult&)>;

SweepResult run_sweep(const SweepConfig& config, const CellSink& on_cell = {});

// 6 significant digits, fixed cell order.
void write_summary_csv(std::ostream& out, const std::vector<CellResult>& cells);
void write_trajectory_csv(std::ostream& out, const CellResult& cell);
void write_trials_csv(std::ostream& out, const std::vector<CellResult>& cells);
nlohmann::json diagnostics_json(const std::vector<CellResult>& cells);
std::string trajectory_file_name(const CellResult& cell);

// Runs the sweep writing summary.csv, trials.csv, trajectory files and
// diagnostics.json into `out_dir`; summary and trajectories are flushed as
// each cell completes.
SweepResult run_sweep_to_directory(const SweepConfig& config, const std::filesystem::path& out_dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Reduced-size theory checks: eigen-form equivalence, the expectation bound,
// the high-probability noise bound and confidence coverage.
std::vector<CheckResult> run_verification(std::uint64_t seed);

}  // namespace warmstart::harness

#endif  // WARMSTART_HARNESS_HPP_
