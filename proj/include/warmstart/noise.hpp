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

// Label corruption for pre-training sets, plus the additive regression proxy
// used by the prior-error theory.

#ifndef WARMSTART_NOISE_HPP_
#define WARMSTART_NOISE_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "warmstart/numerics.hpp"
#include "warmstart/oracle.hpp"

namespace warmstart::noise {

enum class NoiseKind { kNone, kRandomReplacement, kPreferenceFlipping };

// "none", "random_replacement", "preference_flipping". Throws
// Error(kConfigError) for anything else.
NoiseKind parse_noise_kind(std::string_view name);
std::string_view noise_kind_name(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double p = 0.0;
  std::uint64_t seed = 0;
};

// Labels after corruption; mask[i] records whether row i was selected,
// which for random replacement does not imply the label changed.
struct LabelCorruption {
  std::vector<int> labels;
  std::vector<bool> mask;

  std::size_t changed_count(const std::vector<int>& original) const;
};

// Each row is selected independently with probability p and relabelled with
// a uniform draw from {1..K}. Throws Error(kLabelOutOfRange) for labels
// outside {1..K}, Error(kInvalidArgument) for p outside [0, 1].
LabelCorruption random_replacement(const std::vector<int>& labels, int arm_count, double p,
                                   std::uint64_t seed);

// Each row is selected independently with probability p and mapped
// a -> (a mod K) + 1, which swaps 1 and 2 when K = 2.
LabelCorruption preference_flip(const std::vector<int>& labels, int arm_count, double p,
                                std::uint64_t seed);

struct CorruptedDataset {
  std::shared_ptr<const oracle::PreferenceDataset> base;
  NoiseSpec spec;
  std::vector<int> labels;
  std::vector<bool> mask;

  std::size_t size() const noexcept { return labels.size(); }
};

// Applies `spec` to base->labels. kNone copies the labels with an all-false
// mask.
CorruptedDataset corrupt(std::shared_ptr<const oracle::PreferenceDataset> base,
                         const NoiseSpec& spec);

// min(p, 1 - p).
double effective_rate(double p_hat);

// (1 - 2p) X theta + p + eps, eps uniform on [-sigma_s sqrt(3), sigma_s sqrt(3)].
// Throws Error(kRateNotRecoded) when p >= 0.5; pass effective_rate(p).
numerics::Vector flip_proxy_targets(const numerics::Matrix& x, std::span<const double> theta,
                                    double p, double sigma_s, std::uint64_t seed);

namespace detail {
// Same as flip_proxy_targets without the p < 0.5 guard. Tests only.
numerics::Vector flip_proxy_targets_unchecked(const numerics::Matrix& x,
                                              std::span<const double> theta, double p,
                                              double sigma_s, std::uint64_t seed);
}  // namespace detail

}  // namespace warmstart::noise

#endif  // WARMSTART_NOISE_HPP_
