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

// Preference labels for pre-training pairs. `simulated_oracle` draws labels
// from a known parameter; `llm_oracle` asks an OpenAI-compatible chat
// endpoint using the fixed survey prompts and parses the "[Final Answer]"
// marker out of the reply.

#ifndef WARMSTART_ORACLE_HPP_
#define WARMSTART_ORACLE_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "warmstart/env.hpp"
#include "warmstart/numerics.hpp"
#include "warmstart/random.hpp"

namespace warmstart::oracle {

using numerics::Vector;

struct PreferenceQuery {
  std::string user_descriptor;
  std::vector<std::string> arm_descriptors;  // empty, or one per arm
  std::vector<Vector> pair_features;          // one per arm

  std::size_t arm_count() const noexcept { return pair_features.size(); }
  // Throws Error(kInvalidArgument) unless K >= 2, norms <= 1 and
  // dimensions agree.
  void validate() const;
};

struct PreferenceLabel {
  int chosen_arm = 1;  // 1-based
  std::optional<std::string> raw_response;
};

// K = 2: arm 1 with probability clip(theta*^T x_1, 0, 1), else arm 2.
// K > 2: argmax of theta*^T x, ties broken uniformly from `rng`.
PreferenceLabel simulated_oracle(const PreferenceQuery& query, const env::GroundTruth& truth,
                                 Rng& rng);

// A synthetic pre-training set: n queries with one label each.
struct PreferenceDataset {
  std::vector<PreferenceQuery> queries;
  std::vector<int> labels;                       // 1-based chosen arm
  std::vector<std::string> raw_response_paths;  // empty string when absent

  std::size_t size() const noexcept { return queries.size(); }
  std::size_t dim() const;
  std::size_t arm_count() const;
};

// Feature sets come from `features` (no sleeping); labels come from
// simulated_oracle under `labeling_truth`, which may differ from the
// environment's own parameter to model misalignment.
PreferenceDataset simulate_dataset(const env::SyntheticEnvironment& features,
                                   const env::GroundTruth& labeling_truth, int n,
                                   std::uint64_t seed);

// Columns: query_id, arm_count, chosen_arm, arm<a>_x<j> for every arm and
// coordinate, raw_response_path, and `mask` when one is supplied.
void write_dataset_csv(std::ostream& out, const PreferenceDataset& data,
                       const std::vector<int>& labels, const std::vector<bool>* mask = nullptr);
void write_dataset_csv(const std::filesystem::path& path, const PreferenceDataset& data,
                       const std::vector<int>& labels, const std::vector<bool>* mask = nullptr);
// Reads the format above; a mask column, when present, is ignored.
PreferenceDataset read_dataset_csv(const std::filesystem::path& path);
PreferenceDataset read_dataset_csv(std::istream& in);

// --- LLM client -------------------------------------------------------------

enum class PromptTemplate { kCovid, kImmigration, kTravel };

PromptTemplate parse_template_name(std::string_view name);
std::string_view template_name(PromptTemplate t);
std::string_view template_text(PromptTemplate t);

// Substitutes [User] and the two arm placeholders. Requires K = 2 and one
// descriptor per arm.
std::string render_prompt(PromptTemplate t, const PreferenceQuery& query);

// Locates the last "[Final Answer]" (any case) and returns the first
// standalone letter A-C after it, as a 1-based arm index.
// Throws Error(kParseError) without a marker or for a letter beyond
// arm_count; Error(kRefusalError) when no letter follows the marker.
int parse_final_answer(std::string_view response, int arm_count);

struct LlmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  PromptTemplate prompt = PromptTemplate::kCovid;
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.5;
  double top_p = 1.0;
  std::optional<int> max_tokens;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};
  int max_in_flight = 4;

  static LlmConfig from_json(const nlohmann::json& doc);
  static LlmConfig load(const std::filesystem::path& path);
};

// Chat-completion request body for one query.
nlohmann::json build_chat_request(const LlmConfig& config, const PreferenceQuery& query);

// Moves a request body to the endpoint and returns the response body.
// Implementations throw Error(kNetworkError) on transport failures and
// non-2xx statuses. Must be callable from several threads at once.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string post(const LlmConfig& config, const std::string& body) = 0;
};

// cpp-httplib backed transport; a fresh client per request.
class HttpChatTransport final : public ChatTransport {
 public:
  std::string post(const LlmConfig& config, const std::string& body) override;
};

// Sends the prompt (retrying NetworkError with exponential backoff up to
// config.max_attempts) and parses the reply. raw_response holds the reply
// text.
PreferenceLabel llm_oracle(const PreferenceQuery& query, const LlmConfig& config,
                           ChatTransport& transport);
PreferenceLabel llm_oracle(const PreferenceQuery& query, const LlmConfig& config);

struct LabelOutcome {
  std::optional<PreferenceLabel> label;
  std::string error;  // set when label is empty
};

// Labels every query with at most config.max_in_flight requests in flight.
// Failed queries are reported, not thrown, so callers can skip them.
std::vector<LabelOutcome> llm_label_all(const std::vector<PreferenceQuery>& queries,
                                        const LlmConfig& config, ChatTransport& transport);

}  // namespace warmstart::oracle

#endif  // WARMSTART_ORACLE_HPP_
