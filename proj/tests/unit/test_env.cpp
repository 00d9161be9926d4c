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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "warmstart/env.hpp"
#include "warmstart/error.hpp"

namespace warmstart::env {
namespace {

const std::string kData = WARMSTART_TEST_DATA;

ErrorCode error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(Round, Validation) {
  EXPECT_EQ(error_of([] { Round(1, {}, {}, {}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_of([] { Round(1, {1, 2}, {{0.1}}, {0, 1}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(error_of([] { Round(1, {1, 1}, {{0.1}, {0.2}}, {0, 1}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_of([] { Round(1, {1, 2}, {{0.1}, {0.2, 0.0}}, {0, 1}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_of([] { Round(1, {1, 2}, {{1.1}, {0.2}}, {0, 1}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_of([] { Round(1, {1, 2}, {{0.1}, {0.2}}, {0, 2}); }), ErrorCode::kInvalidArgument);
}

TEST(Round, Accessors) {
  const Round r(3, {2, 5}, {{0.1, 0.2}, {0.3, 0.4}}, {0, 1});
  EXPECT_EQ(r.index(), 3);
  EXPECT_EQ(r.dim(), 2u);
  EXPECT_EQ(r.reward_of(5), 1);
  EXPECT_EQ(r.features_of(2)[1], 0.2);
  EXPECT_EQ(r.best_reward(), 1);
  EXPECT_EQ(error_of([&] { r.position(1); }), ErrorCode::kArmNotAvailable);
}

TEST(SyntheticEnvironment, RoundsRespectScalingContract) {
  EnvironmentConfig config;
  config.dim = 8;
  config.arms = 4;
  config.sleeping_rate = 0.5;
  const SyntheticEnvironment environment(config, 3);
  const auto& theta = environment.truth().theta_star;
  ASSERT_EQ(theta.size(), 8u);
  for (const auto& round : environment.stream(500, 9)) {
    ASSERT_GE(round.size(), 2u);
    EXPECT_EQ(round.arms().front(), 1);
    for (std::size_t i = 1; i < round.size(); ++i) EXPECT_LT(round.arms()[i - 1], round.arms()[i]);
    Vector attr_sum(7, 0.0);
    for (const auto& x : round.features()) {
      EXPECT_LE(numerics::norm2(x), 1.0 + 1e-12);
      const double m = environment.truth().mean_reward(x);
      EXPECT_GE(m, kMinMeanReward);
      EXPECT_LE(m, kMaxMeanReward);
      EXPECT_NEAR(theta.back() * x.back(), 0.5, 1e-12);
      for (std::size_t j = 0; j < 7; ++j) attr_sum[j] += x[j];
    }
    // Difference embeddings over the kept arms sum to zero.
    for (double v : attr_sum) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(SyntheticEnvironment, NoSleepingKeepsAllArms) {
  EnvironmentConfig config;
  config.dim = 5;
  config.arms = 3;
  config.sleeping_rate = 1.0;
  const SyntheticEnvironment environment(config, 1);
  Rng rng(2);
  EXPECT_EQ(environment.draw_candidates(rng, false).arms.size(), 3u);
  // Full sleeping still leaves two arms.
  EXPECT_EQ(environment.draw_candidates(rng, true).arms.size(), 2u);
}

TEST(SyntheticEnvironment, MeanSpreadCalibration) {
  EnvironmentConfig config;
  config.dim = 20;
  config.mean_spread = 0.15;
  const SyntheticEnvironment environment(config, 4);
  Rng rng(8);
  double ss = 0.0;
  int n = 0;
  for (int i = 0; i < 4000; ++i) {
    for (const auto& x : environment.draw_candidates(rng, false).features) {
      const double c = environment.truth().mean_reward(x) - 0.5;
      ss += c * c;
      ++n;
    }
  }
  EXPECT_NEAR(std::sqrt(ss / n), 0.15, 0.015);
}

TEST(SyntheticEnvironment, StreamIsDeterministic) {
  const auto [a, truth_a] = generate_synthetic_stream(6, 50, 3, 0.2, 17);
  const auto [b, truth_b] = generate_synthetic_stream(6, 50, 3, 0.2, 17);
  EXPECT_EQ(truth_a.theta_star, truth_b.theta_star);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].index(), static_cast<int>(t + 1));
    EXPECT_EQ(a[t].arms(), b[t].arms());
    EXPECT_EQ(a[t].features(), b[t].features());
    EXPECT_EQ(a[t].rewards(), b[t].rewards());
  }
}

TEST(SyntheticEnvironment, InvalidConfig) {
  EnvironmentConfig config;
  config.dim = 1;
  EXPECT_EQ(error_of([&] { SyntheticEnvironment(config, 0); }), ErrorCode::kInvalidArgument);
  config.dim = 4;
  config.sleeping_rate = 1.5;
  EXPECT_EQ(error_of([&] { SyntheticEnvironment(config, 0); }), ErrorCode::kInvalidArgument);
}

TEST(Misalignment, ShiftsByScaledUnitDirection) {
  GroundTruth truth{{1.0, 2.0, 3.0}, 0.5};
  const GroundTruth shifted = inject_misalignment(truth, Vector{0.0, 3.0, 4.0}, 10.0);
  EXPECT_NEAR(shifted.theta_star[1], 8.0, 1e-12);
  EXPECT_NEAR(shifted.theta_star[2], 11.0, 1e-12);
  EXPECT_EQ(error_of([&] { inject_misalignment(truth, Vector{0, 0, 0}, 1.0); }),
            ErrorCode::kZeroDirection);
  EXPECT_EQ(error_of([&] { inject_misalignment(truth, Vector{1, 0}, 1.0); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Conjoint, EncodesTasks) {
  const auto schema = ConjointSchema::load(kData + "/conjoint_schema.json");
  EXPECT_EQ(schema.demographic_dim(), 6u);
  EXPECT_EQ(schema.attribute_dim(), 6u);
  const auto rounds = ingest_conjoint_csv(kData + "/conjoint_small.csv", schema, false, 0);
  ASSERT_EQ(rounds.size(), 5u);
  // r1 task 1: arm 1 = (90%, US), arm 2 = (50%, China); global max norm sqrt(6).
  const double s = std::sqrt(6.0);
  const Vector expected{1, 0, 0, 1, 0, 0, -1, 0, 1, 1, 0, -1};
  ASSERT_EQ(rounds[0].dim(), 12u);
  for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(rounds[0].features()[0][j], expected[j] / s, 1e-15);
  EXPECT_EQ(rounds[0].rewards(), (std::vector<int>{1, 0}));
  EXPECT_EQ(rounds[1].rewards(), (std::vector<int>{0, 1}));
  // Identical efficacy levels cancel in the difference.
  EXPECT_NEAR(rounds[4].features()[0][6 + 1], 0.0, 1e-15);
}

TEST(Conjoint, ReducesThreeArmsToChosenPair) {
  const auto schema = ConjointSchema::load(kData + "/conjoint_schema3.json");
  const auto rounds = ingest_conjoint_csv(kData + "/conjoint_three.csv", schema, true, 5);
  ASSERT_EQ(rounds.size(), 2u);
  for (const auto& r : rounds) {
    EXPECT_EQ(r.size(), 2u);
    EXPECT_EQ(r.best_reward(), 1);
  }
  EXPECT_NO_THROW(rounds[0].position(3));
  EXPECT_NO_THROW(rounds[1].position(1));
}

ErrorCode conjoint_error(const std::string& text, int arms = 2) {
  auto schema = ConjointSchema::load(kData + "/conjoint_schema.json");
  schema.arms_per_task = arms;
  std::istringstream in(text);
  return error_of([&] { read_conjoint_tasks(in, schema); });
}

TEST(Conjoint, SchemaViolations) {
  const std::string header = "respondent,task,age,party,efficacy,origin,choice\n";
  EXPECT_EQ(conjoint_error(header), ErrorCode::kEmptyFile);
  EXPECT_EQ(conjoint_error("respondent,task,age,party,efficacy,choice\nr,1,65+,dem,50%,1\n"),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(conjoint_error(header + "r,1,65+,dem,99%,US,1\nr,1,65+,dem,50%,US,1\n"),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(conjoint_error(header + "r,1,65+,dem,90%,US,1\nr,1,65+,dem,50%,US,2\n"),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(conjoint_error(header + "r,1,65+,dem,90%,US,3\nr,1,65+,dem,50%,US,3\n"),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(conjoint_error(header + "r,1,65+,dem,90%,US,1\n"), ErrorCode::kSchemaViolation);
  EXPECT_EQ(conjoint_error(header + "r,1,65+,dem,90%,US,1\nr,1,18-34,dem,50%,US,1\n"),
            ErrorCode::kSchemaViolation);
}

TEST(Conjoint, ReductionRejectsMoreThanThreeArms) {
  auto schema = ConjointSchema::load(kData + "/conjoint_schema.json");
  schema.arms_per_task = 4;
  EXPECT_EQ(error_of([&] { encode_conjoint_tasks({}, schema, true, 0); }),
            ErrorCode::kSchemaViolation);
}

TEST(Conjoint, MalformedSchema) {
  EXPECT_EQ(error_of([] { ConjointSchema::from_json(nlohmann::json{{"task_column", "t"}}); }),
            ErrorCode::kSchemaViolation);
}

}  // namespace
}  // namespace warmstart::env
