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

// Bandit round streams. Two sources:
//
//  * SyntheticEnvironment: a linear Bernoulli environment with known
//    parameter. Candidate arms carry uniform attribute vectors; an arm's
//    embedding is its attributes minus the mean attributes of the other
//    available arms, followed by an intercept coordinate. All embeddings are
//    divided by one global constant so that ||x|| <= 1, and the parameter is
//    scaled so that the intercept contributes exactly 0.5 to every mean.
//    Rounds whose means leave [0.05, 0.95] are redrawn.
//
//  * Conjoint CSV ingestion: one row per (respondent, task, arm), one-hot
//    demographics followed by one-hot attribute differences.

#ifndef WARMSTART_ENV_HPP_
#define WARMSTART_ENV_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "warmstart/numerics.hpp"
#include "warmstart/random.hpp"

namespace warmstart::env {

using numerics::Vector;
using ArmId = int;

inline constexpr double kMinMeanReward = 0.05;
inline constexpr double kMaxMeanReward = 0.95;

// One round of a sleeping bandit. Immutable; validated on construction.
class Round {
 public:
  // Throws Error(kInvalidArgument) on empty/duplicate arm lists, ragged
  // feature dimensions, feature norms above 1 + 1e-12, or rewards outside
  // {0, 1}; Error(kDimensionMismatch) when the per-arm lists differ in size.
  Round(int index, std::vector<ArmId> arms, std::vector<Vector> features,
        std::vector<int> rewards);

  int index() const noexcept { return index_; }
  std::size_t size() const noexcept { return arms_.size(); }
  std::size_t dim() const noexcept { return features_.front().size(); }
  const std::vector<ArmId>& arms() const noexcept { return arms_; }
  const std::vector<Vector>& features() const noexcept { return features_; }
  const std::vector<int>& rewards() const noexcept { return rewards_; }

  // Position of `arm` in the availability list; throws
  // Error(kArmNotAvailable).
  std::size_t position(ArmId arm) const;
  const Vector& features_of(ArmId arm) const { return features_[position(arm)]; }
  int reward_of(ArmId arm) const { return rewards_[position(arm)]; }
  int best_reward() const;

 private:
  int index_;
  std::vector<ArmId> arms_;
  std::vector<Vector> features_;
  std::vector<int> rewards_;
};

struct GroundTruth {
  Vector theta_star;
  double sigma = 0.5;  // reward noise sub-Gaussian proxy

  double mean_reward(std::span<const double> x) const;
};

struct EnvironmentConfig {
  int dim = 20;
  int arms = 2;
  double sleeping_rate = 0.0;
  // Standard deviation of (mean reward - 0.5) across freshly drawn arms.
  double mean_spread = 0.15;

  // Throws Error(kInvalidArgument) unless dim >= 2, arms >= 2,
  // sleeping_rate in [0, 1], mean_spread > 0.
  void validate() const;
};

// Arms on offer in a round before rewards are realized.
struct CandidateSet {
  std::vector<ArmId> arms;
  std::vector<Vector> features;
};

class SyntheticEnvironment {
 public:
  // Draws theta* from `seed`.
  SyntheticEnvironment(const EnvironmentConfig& config, std::uint64_t seed);

  const EnvironmentConfig& config() const noexcept { return config_; }
  const GroundTruth& truth() const noexcept { return truth_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(config_.dim); }

  // Global normalizer applied to every raw embedding.
  double feature_scale() const noexcept { return feature_scale_; }

  // Draws one candidate set whose means under truth() all lie in
  // [0.05, 0.95]. Sleeping removal applies when `sleeping` is set.
  // Throws Error(kInfeasibleScaling) after 1000 rejected draws.
  CandidateSet draw_candidates(Rng& rng, bool sleeping = true) const;

  // T rounds with Bernoulli(theta*^T x) rewards, indices 1..T.
  std::vector<Round> stream(int horizon, std::uint64_t seed) const;

 private:
  EnvironmentConfig config_;
  GroundTruth truth_;
  double feature_scale_;
};

std::pair<std::vector<Round>, GroundTruth> generate_synthetic_stream(
    int d, int horizon, int arms, double sleeping_rate, std::uint64_t seed);

// theta_syn = theta_real + delta_scale * direction / ||direction||.
// Throws Error(kZeroDirection) / Error(kDimensionMismatch).
GroundTruth inject_misalignment(const GroundTruth& truth,
                                std::span<const double> delta_direction,
                                double delta_scale);

struct CategoricalColumn {
  std::string name;
  std::vector<std::string> levels;
};

struct ConjointSchema {
  std::string respondent_column;
  std::string task_column;
  std::vector<CategoricalColumn> demographics;
  std::vector<CategoricalColumn> attributes;
  std::string choice_column;
  int arms_per_task = 2;

  // Keys: respondent_column, task_column, demographics, attributes,
  // choice_column, arms_per_task. Column entries are {"name", "levels"}.
  static ConjointSchema from_json(const nlohmann::json& doc);
  static ConjointSchema load(const std::filesystem::path& path);

  std::size_t demographic_dim() const;
  std::size_t attribute_dim() const;
};

// One choice task as recorded in the survey, before encoding.
struct ConjointTask {
  std::string respondent;
  std::string task;
  std::map<std::string, std::string> demographics;
  std::vector<std::map<std::string, std::string>> arm_attributes;  // K entries
  int chosen = 1;  // 1-based
};

// Groups rows by (respondent, task) in order of first appearance.
// Throws Error(kSchemaViolation) / Error(kEmptyFile).
std::vector<ConjointTask> read_conjoint_tasks(std::istream& in, const ConjointSchema& schema);

// Encodes tasks into rounds. With reduce_to_binary and K = 3 the chosen arm
// is paired with one seeded-random unchosen arm; K > 3 is rejected.
std::vector<Round> encode_conjoint_tasks(const std::vector<ConjointTask>& tasks,
                                         const ConjointSchema& schema,
                                         bool reduce_to_binary, std::uint64_t seed);

std::vector<Round> ingest_conjoint_csv(const std::filesystem::path& path,
                                       const ConjointSchema& schema,
                                       bool reduce_to_binary, std::uint64_t seed);

}  // namespace warmstart::env

#endif  // WARMSTART_ENV_HPP_
