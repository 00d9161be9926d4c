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

#include "warmstart/noise.hpp"

#include <cmath>
#include <string>

#include "warmstart/error.hpp"
#include "warmstart/random.hpp"

namespace warmstart::noise {

namespace {

void check_inputs(const std::vector<int>& labels, int arm_count, double p) {
  if (arm_count < 1) throw Error(ErrorCode::kInvalidArgument, "arm count must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "rate outside [0, 1]");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > arm_count) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(labels[i]) +
                                                   " at row " + std::to_string(i) +
                                                   " outside 1.." + std::to_string(arm_count));
    }
  }
}

template <typename Relabel>
LabelCorruption corrupt_rows(const std::vector<int>& labels, double p, std::uint64_t seed,
                             Relabel relabel) {
  Rng rng(seed);
  LabelCorruption out{labels, std::vector<bool>(labels.size(), false)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!bernoulli(rng, p)) continue;
    out.mask[i] = true;
    out.labels[i] = relabel(labels[i], rng);
  }
  return out;
}

}  // namespace

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseKind::kNone;
  if (name == "random_replacement") return NoiseKind::kRandomReplacement;
  if (name == "preference_flipping") return NoiseKind::kPreferenceFlipping;
  throw Error(ErrorCode::kConfigError, "unknown noise kind '" + std::string(name) + "'");
}

std::string_view noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kRandomReplacement: return "random_replacement";
    case NoiseKind::kPreferenceFlipping: return "preference_flipping";
  }
  return "";
}

std::size_t LabelCorruption::changed_count(const std::vector<int>& original) const {
  if (original.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "label vectors differ in length");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) n += labels[i] != original[i];
  return n;
}

LabelCorruption random_replacement(const std::vector<int>& labels, int arm_count, double p,
                                   std::uint64_t seed) {
  check_inputs(labels, arm_count, p);
  return corrupt_rows(labels, p, seed,
                      [arm_count](int, Rng& rng) { return uniform_int(rng, 1, arm_count); });
}

LabelCorruption preference_flip(const std::vector<int>& labels, int arm_count, double p,
                                std::uint64_t seed) {
  check_inputs(labels, arm_count, p);
  return corrupt_rows(labels, p, seed,
                      [arm_count](int a, Rng&) { return a % arm_count + 1; });
}

CorruptedDataset corrupt(std::shared_ptr<const oracle::PreferenceDataset> base,
                         const NoiseSpec& spec) {
  if (!base) throw Error(ErrorCode::kInvalidArgument, "no base dataset");
  const int k = static_cast<int>(base->arm_count());
  LabelCorruption c;
  switch (spec.kind) {
    case NoiseKind::kNone:
      check_inputs(base->labels, k, spec.p);
      c = {base->labels, std::vector<bool>(base->labels.size(), false)};
      break;
    case NoiseKind::kRandomReplacement:
      c = random_replacement(base->labels, k, spec.p, spec.seed);
      break;
    case NoiseKind::kPreferenceFlipping:
      c = preference_flip(base->labels, k, spec.p, spec.seed);
      break;
  }
  return {std::move(base), spec, std::move(c.labels), std::move(c.mask)};
}

double effective_rate(double p_hat) { return std::min(p_hat, 1.0 - p_hat); }

numerics::Vector flip_proxy_targets(const numerics::Matrix& x, std::span<const double> theta,
                                    double p, double sigma_s, std::uint64_t seed) {
  if (p >= 0.5) {
    throw Error(ErrorCode::kRateNotRecoded,
                "flip rate " + std::to_string(p) + " >= 0.5; recode with effective_rate first");
  }
  return detail::flip_proxy_targets_unchecked(x, theta, p, sigma_s, seed);
}

namespace detail {

numerics::Vector flip_proxy_targets_unchecked(const numerics::Matrix& x,
                                              std::span<const double> theta, double p,
                                              double sigma_s, std::uint64_t seed) {
  if (x.cols() != theta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "design columns differ from theta length");
  }
  if (p < 0.0 || sigma_s < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative rate or scale");
  numerics::Vector y = x.multiply(theta);
  const double half_width = sigma_s * std::sqrt(3.0);
  Rng rng(seed);
  std::uniform_real_distribution<double> eps(-half_width, half_width);
  for (double& v : y) {
    v = (1.0 - 2.0 * p) * v + p;
    if (half_width > 0.0) v += eps(rng);
  }
  return y;
}

}  // namespace detail

}  // namespace warmstart::noise
