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

#include "warmstart/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "warmstart/csv.hpp"
#include "warmstart/error.hpp"

namespace warmstart::env {

namespace {

constexpr double kNormSlack = 1e-12;
constexpr int kMaxRedraws = 1000;
constexpr double kIntercept = 0.5;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, what);
}

// attrs[a] minus the mean of attrs over every other index in `keep`.
Vector difference_embedding(const std::vector<Vector>& attrs,
                            const std::vector<std::size_t>& keep, std::size_t a) {
  Vector z = attrs[a];
  const double others = static_cast<double>(keep.size() - 1);
  for (std::size_t b : keep) {
    if (b == a) continue;
    numerics::axpy(-1.0 / others, attrs[b], z);
  }
  return z;
}

}  // namespace

Round::Round(int index, std::vector<ArmId> arms, std::vector<Vector> features,
             std::vector<int> rewards)
    : index_(index),
      arms_(std::move(arms)),
      features_(std::move(features)),
      rewards_(std::move(rewards)) {
  if (arms_.empty()) throw Error(ErrorCode::kInvalidArgument, "round has no arms");
  if (features_.size() != arms_.size() || rewards_.size() != arms_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "round needs one feature vector and one reward per arm");
  }
  std::set<ArmId> seen(arms_.begin(), arms_.end());
  if (seen.size() != arms_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate arm id in round");
  }
  const std::size_t d = features_.front().size();
  for (const auto& x : features_) {
    if (x.size() != d || d == 0) {
      throw Error(ErrorCode::kInvalidArgument, "ragged or empty feature vectors");
    }
    if (numerics::norm2(x) > 1.0 + kNormSlack) {
      throw Error(ErrorCode::kInvalidArgument, "feature vector norm exceeds 1");
    }
  }
  for (int r : rewards_) {
    if (r != 0 && r != 1) throw Error(ErrorCode::kInvalidArgument, "reward not in {0,1}");
  }
}

std::size_t Round::position(ArmId arm) const {
  for (std::size_t i = 0; i < arms_.size(); ++i)
    if (arms_[i] == arm) return i;
  throw Error(ErrorCode::kArmNotAvailable,
              "arm " + std::to_string(arm) + " not available in round " +
                  std::to_string(index_));
}

int Round::best_reward() const { return *std::max_element(rewards_.begin(), rewards_.end()); }

double GroundTruth::mean_reward(std::span<const double> x) const {
  return numerics::dot(theta_star, x);
}

void EnvironmentConfig::validate() const {
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "environment dim must be >= 2");
  if (arms < 2) throw Error(ErrorCode::kInvalidArgument, "environment needs >= 2 arms");
  if (!(sleeping_rate >= 0.0 && sleeping_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sleeping_rate must lie in [0, 1]");
  }
  if (!(mean_spread > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mean_spread must be positive");
  }
}

SyntheticEnvironment::SyntheticEnvironment(const EnvironmentConfig& config,
                                           std::uint64_t seed)
    : config_(config) {
  config_.validate();
  const std::size_t attr_dim = dim() - 1;
  // Each difference coordinate lies in [-2, 2] and the intercept is 0.5.
  feature_scale_ = std::sqrt(4.0 * static_cast<double>(attr_dim) + kIntercept * kIntercept);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector direction(attr_dim);
  do {
    for (double& g : direction) g = normal(rng);
  } while (numerics::norm2(direction) == 0.0);

  // Var of one difference coordinate: (1/3) * (1 + 1/(K-1)) for U[-1,1] attributes.
  const double coord_var = (1.0 + 1.0 / (config_.arms - 1)) / 3.0;
  const double w_norm = config_.mean_spread * feature_scale_ / std::sqrt(coord_var);
  truth_.theta_star = numerics::scale(direction, w_norm / numerics::norm2(direction));
  // Intercept coordinate is 0.5 / scale, so this contributes exactly 0.5.
  truth_.theta_star.push_back(feature_scale_);
  truth_.sigma = 0.5;
}

CandidateSet SyntheticEnvironment::draw_candidates(Rng& rng, bool sleeping) const {
  const std::size_t attr_dim = dim() - 1;
  const auto k = static_cast<std::size_t>(config_.arms);
  std::vector<Vector> attrs(k, Vector(attr_dim));

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    for (auto& a : attrs)
      for (double& v : a) v = 2.0 * uniform01(rng) - 1.0;

    std::vector<std::size_t> keep{0};
    std::vector<std::size_t> removed;
    for (std::size_t a = 1; a < k; ++a) {
      if (sleeping && config_.sleeping_rate > 0.0 && bernoulli(rng, config_.sleeping_rate)) {
        removed.push_back(a);
      } else {
        keep.push_back(a);
      }
    }
    if (keep.size() < 2) {
      const auto pick = static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<int>(removed.size()) - 1));
      keep.push_back(removed[pick]);
      std::sort(keep.begin(), keep.end());
    }

    CandidateSet out;
    bool in_range = true;
    for (std::size_t a : keep) {
      Vector x = difference_embedding(attrs, keep, a);
      x.push_back(kIntercept);
      for (double& v : x) v /= feature_scale_;
      const double mean = truth_.mean_reward(x);
      if (mean < kMinMeanReward || mean > kMaxMeanReward) {
        in_range = false;
        break;
      }
      out.arms.push_back(static_cast<ArmId>(a + 1));
      out.features.push_back(std::move(x));
    }
    if (in_range) return out;
  }
  throw Error(ErrorCode::kInfeasibleScaling,
              "could not draw arms with means in [0.05, 0.95] after 1000 attempts");
}

std::vector<Round> SyntheticEnvironment::stream(int horizon, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<Round> rounds;
  rounds.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  for (int t = 1; t <= horizon; ++t) {
    CandidateSet c = draw_candidates(rng, true);
    std::vector<int> rewards;
    rewards.reserve(c.arms.size());
    for (const auto& x : c.features) rewards.push_back(bernoulli(rng, truth_.mean_reward(x)) ? 1 : 0);
    rounds.emplace_back(t, std::move(c.arms), std::move(c.features), std::move(rewards));
  }
  return rounds;
}

std::pair<std::vector<Round>, GroundTruth> generate_synthetic_stream(
    int d, int horizon, int arms, double sleeping_rate, std::uint64_t seed) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  EnvironmentConfig config;
  config.dim = d;
  config.arms = arms;
  config.sleeping_rate = sleeping_rate;
  SyntheticEnvironment environment(config, derive_seed({seed, tag("theta")}));
  return {environment.stream(horizon, derive_seed({seed, tag("stream")})),
          environment.truth()};
}

GroundTruth inject_misalignment(const GroundTruth& truth,
                                std::span<const double> delta_direction,
                                double delta_scale) {
  if (delta_direction.size() != truth.theta_star.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "misalignment direction dimension");
  }
  const double n = numerics::norm2(delta_direction);
  if (n == 0.0) throw Error(ErrorCode::kZeroDirection, "misalignment direction is zero");
  if (delta_scale < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "misalignment scale must be non-negative");
  }
  GroundTruth shifted = truth;
  numerics::axpy(delta_scale / n, delta_direction, shifted.theta_star);
  return shifted;
}

// --- conjoint ingestion -----------------------------------------------------

namespace {

std::vector<CategoricalColumn> parse_columns(const nlohmann::json& doc, const char* key) {
  std::vector<CategoricalColumn> out;
  if (!doc.contains(key)) return out;
  if (!doc.at(key).is_array()) schema_error(std::string(key) + " must be an array");
  for (const auto& entry : doc.at(key)) {
    CategoricalColumn col;
    col.name = entry.at("name").get<std::string>();
    col.levels = entry.at("levels").get<std::vector<std::string>>();
    if (col.levels.empty()) schema_error("column " + col.name + " declares no levels");
    std::set<std::string> unique(col.levels.begin(), col.levels.end());
    if (unique.size() != col.levels.size()) schema_error("column " + col.name + " repeats a level");
    out.push_back(std::move(col));
  }
  return out;
}

void append_one_hot(const CategoricalColumn& col, const std::string& value, Vector& out) {
  const auto it = std::find(col.levels.begin(), col.levels.end(), value);
  if (it == col.levels.end()) {
    schema_error("unknown level '" + value + "' in column " + col.name);
  }
  const auto offset = out.size();
  out.resize(offset + col.levels.size(), 0.0);
  out[offset + static_cast<std::size_t>(it - col.levels.begin())] = 1.0;
}

}  // namespace

ConjointSchema ConjointSchema::from_json(const nlohmann::json& doc) {
  try {
    ConjointSchema s;
    s.respondent_column = doc.at("respondent_column").get<std::string>();
    s.task_column = doc.at("task_column").get<std::string>();
    s.choice_column = doc.at("choice_column").get<std::string>();
    s.arms_per_task = doc.at("arms_per_task").get<int>();
    s.demographics = parse_columns(doc, "demographics");
    s.attributes = parse_columns(doc, "attributes");
    if (s.arms_per_task < 2) schema_error("arms_per_task must be >= 2");
    if (s.attributes.empty()) schema_error("schema declares no attribute columns");
    return s;
  } catch (const nlohmann::json::exception& e) {
    schema_error(std::string("malformed schema: ") + e.what());
  }
}

ConjointSchema ConjointSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    schema_error(std::string("schema is not valid JSON: ") + e.what());
  }
}

std::size_t ConjointSchema::demographic_dim() const {
  std::size_t n = 0;
  for (const auto& c : demographics) n += c.levels.size();
  return n;
}

std::size_t ConjointSchema::attribute_dim() const {
  std::size_t n = 0;
  for (const auto& c : attributes) n += c.levels.size();
  return n;
}

std::vector<ConjointTask> read_conjoint_tasks(std::istream& in, const ConjointSchema& schema) {
  const csv::Table table = csv::parse(in);
  if (table.rows.empty()) throw Error(ErrorCode::kEmptyFile, "conjoint CSV has no data rows");

  auto column = [&](const std::string& name) {
    auto idx = table.find_column(name);
    if (!idx) schema_error("missing column " + name);
    return *idx;
  };
  const std::size_t respondent_col = column(schema.respondent_column);
  const std::size_t task_col = column(schema.task_column);
  const std::size_t choice_col = column(schema.choice_column);
  std::vector<std::size_t> demo_cols, attr_cols;
  for (const auto& c : schema.demographics) demo_cols.push_back(column(c.name));
  for (const auto& c : schema.attributes) attr_cols.push_back(column(c.name));

  std::vector<ConjointTask> tasks;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      schema_error("row " + std::to_string(r + 2) + " has " + std::to_string(row.size()) +
                   " fields, header has " + std::to_string(table.header.size()));
    }
    long long choice = 0;
    try {
      choice = csv::parse_int(row[choice_col]);
    } catch (const Error&) {
      schema_error("bad choice value '" + row[choice_col] + "'");
    }
    if (choice < 1 || choice > schema.arms_per_task) {
      schema_error("choice value " + row[choice_col] + " outside 1.." +
                   std::to_string(schema.arms_per_task));
    }

    std::map<std::string, std::string> demo;
    for (std::size_t i = 0; i < demo_cols.size(); ++i) {
      const auto& col = schema.demographics[i];
      const auto& value = row[demo_cols[i]];
      if (std::find(col.levels.begin(), col.levels.end(), value) == col.levels.end()) {
        schema_error("unknown level '" + value + "' in column " + col.name);
      }
      demo[col.name] = value;
    }
    std::map<std::string, std::string> attrs;
    for (std::size_t i = 0; i < attr_cols.size(); ++i) {
      const auto& col = schema.attributes[i];
      const auto& value = row[attr_cols[i]];
      if (std::find(col.levels.begin(), col.levels.end(), value) == col.levels.end()) {
        schema_error("unknown level '" + value + "' in column " + col.name);
      }
      attrs[col.name] = value;
    }

    const auto key = std::make_pair(row[respondent_col], row[task_col]);
    auto [it, inserted] = index.try_emplace(key, tasks.size());
    if (inserted) {
      ConjointTask task;
      task.respondent = key.first;
      task.task = key.second;
      task.demographics = std::move(demo);
      task.chosen = static_cast<int>(choice);
      tasks.push_back(std::move(task));
    } else {
      const ConjointTask& task = tasks[it->second];
      if (task.chosen != choice) {
        schema_error("choice differs across rows of task " + key.first + "/" + key.second);
      }
      if (task.demographics != demo) {
        schema_error("demographics differ across rows of task " + key.first + "/" + key.second);
      }
    }
    tasks[it->second].arm_attributes.push_back(std::move(attrs));
  }

  for (const auto& task : tasks) {
    if (static_cast<int>(task.arm_attributes.size()) != schema.arms_per_task) {
      schema_error("task " + task.respondent + "/" + task.task + " has " +
                   std::to_string(task.arm_attributes.size()) + " rows, expected " +
                   std::to_string(schema.arms_per_task));
    }
  }
  return tasks;
}

std::vector<Round> encode_conjoint_tasks(const std::vector<ConjointTask>& tasks,
                                         const ConjointSchema& schema,
                                         bool reduce_to_binary, std::uint64_t seed) {
  const int k = schema.arms_per_task;
  if (reduce_to_binary && k > 3) {
    schema_error("binary reduction is defined for 3 arms per task, got " + std::to_string(k));
  }
  const bool reduce = reduce_to_binary && k == 3;
  Rng rng(seed);

  struct Encoded {
    std::vector<ArmId> arms;
    std::vector<Vector> features;
    std::vector<int> rewards;
  };
  std::vector<Encoded> encoded;
  encoded.reserve(tasks.size());
  double max_norm = 0.0;

  for (const auto& task : tasks) {
    Vector user;
    for (const auto& col : schema.demographics) append_one_hot(col, task.demographics.at(col.name), user);

    std::vector<Vector> attrs;
    for (const auto& arm : task.arm_attributes) {
      Vector onehot;
      for (const auto& col : schema.attributes) append_one_hot(col, arm.at(col.name), onehot);
      attrs.push_back(std::move(onehot));
    }

    std::vector<std::size_t> keep;
    if (reduce) {
      std::vector<std::size_t> unchosen;
      for (int a = 0; a < k; ++a)
        if (a + 1 != task.chosen) unchosen.push_back(static_cast<std::size_t>(a));
      const std::size_t other = unchosen[static_cast<std::size_t>(uniform_int(rng, 0, 1))];
      keep = {static_cast<std::size_t>(task.chosen - 1), other};
      std::sort(keep.begin(), keep.end());
    } else {
      for (int a = 0; a < k; ++a) keep.push_back(static_cast<std::size_t>(a));
    }

    Encoded e;
    for (std::size_t a : keep) {
      Vector x = user;
      const Vector z = difference_embedding(attrs, keep, a);
      x.insert(x.end(), z.begin(), z.end());
      max_norm = std::max(max_norm, numerics::norm2(x));
      e.arms.push_back(static_cast<ArmId>(a + 1));
      e.features.push_back(std::move(x));
      e.rewards.push_back(static_cast<int>(a + 1) == task.chosen ? 1 : 0);
    }
    encoded.push_back(std::move(e));
  }

  std::vector<Round> rounds;
  rounds.reserve(encoded.size());
  int t = 0;
  for (auto& e : encoded) {
    if (max_norm > 0.0)
      for (auto& x : e.features)
        for (double& v : x) v /= max_norm;
    rounds.emplace_back(++t, std::move(e.arms), std::move(e.features), std::move(e.rewards));
  }
  return rounds;
}

std::vector<Round> ingest_conjoint_csv(const std::filesystem::path& path,
                                       const ConjointSchema& schema,
                                       bool reduce_to_binary, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return encode_conjoint_tasks(read_conjoint_tasks(in, schema), schema, reduce_to_binary, seed);
}

}  // namespace warmstart::env
