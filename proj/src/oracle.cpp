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

#include "warmstart/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "warmstart/csv.hpp"
#include "warmstart/error.hpp"

namespace warmstart::oracle {

namespace {

constexpr double kNormSlack = 1e-12;

constexpr std::string_view kCovidPrompt =
    "Consider you are in the middle of the COVID pandemic, where vaccines are just being "
    "produced. Pretend to be the following user: [User]. Now you are given two vaccine "
    "choices for COVID. The description of each vaccine is as follows: [Vaccine A] Now the "
    "next one: [Vaccine B]. Which one do you take? A or B? Let's think step by step. Print "
    "the final answer as [Final Answer] at the end as well.";

constexpr std::string_view kImmigrationPrompt =
    "Pretend to be the following user: [User]. You are now evaluating two immigrants "
    "applying for admission to the United States. The description of each immigrant is as "
    "follows: [Immigrant A] Now the next one: [Immigrant B]. Which immigrant do you admit? "
    "A or B? Let's think step by step. Print the final answer as [Final Answer] at the end.";

constexpr std::string_view kTravelPrompt =
    "Consider you are planning a U.S. vacation and some states have recently passed "
    "policies that weaken democratic principles. Pretend to be the following user: [User]. "
    "Now you are given two locations for vacationing. The description of each location is "
    "as follows: [Location A], now the next one: [Location B]. Which location do you visit? "
    "A or B? Let's think step by step. Print the final answer as [Final Answer].";

std::pair<std::string_view, std::string_view> arm_placeholders(PromptTemplate t) {
  switch (t) {
    case PromptTemplate::kCovid: return {"[Vaccine A]", "[Vaccine B]"};
    case PromptTemplate::kImmigration: return {"[Immigrant A]", "[Immigrant B]"};
    case PromptTemplate::kTravel: return {"[Location A]", "[Location B]"};
  }
  return {"", ""};
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "endpoint needs a scheme: " + endpoint);
  }
  const auto slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

}  // namespace

void PreferenceQuery::validate() const {
  if (pair_features.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "preference query needs at least two arms");
  }
  if (!arm_descriptors.empty() && arm_descriptors.size() != pair_features.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one descriptor per arm required");
  }
  const std::size_t d = pair_features.front().size();
  for (const auto& x : pair_features) {
    if (x.size() != d) throw Error(ErrorCode::kDimensionMismatch, "ragged pair features");
    if (numerics::norm2(x) > 1.0 + kNormSlack) {
      throw Error(ErrorCode::kInvalidArgument, "pair feature norm exceeds 1");
    }
  }
}

PreferenceLabel simulated_oracle(const PreferenceQuery& query, const env::GroundTruth& truth,
                                 Rng& rng) {
  query.validate();
  if (query.pair_features.front().size() != truth.theta_star.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "query features do not match theta*");
  }
  PreferenceLabel label;
  if (query.arm_count() == 2) {
    const double p = std::clamp(truth.mean_reward(query.pair_features[0]), 0.0, 1.0);
    label.chosen_arm = bernoulli(rng, p) ? 1 : 2;
    return label;
  }
  std::vector<double> means;
  for (const auto& x : query.pair_features) means.push_back(truth.mean_reward(x));
  const double best = *std::max_element(means.begin(), means.end());
  std::vector<int> ties;
  for (std::size_t a = 0; a < means.size(); ++a)
    if (means[a] == best) ties.push_back(static_cast<int>(a + 1));
  label.chosen_arm =
      ties.size() == 1 ? ties.front()
                       : ties[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(ties.size()) - 1))];
  return label;
}

std::size_t PreferenceDataset::dim() const {
  return queries.empty() ? 0 : queries.front().pair_features.front().size();
}

std::size_t PreferenceDataset::arm_count() const {
  return queries.empty() ? 0 : queries.front().arm_count();
}

PreferenceDataset simulate_dataset(const env::SyntheticEnvironment& features,
                                   const env::GroundTruth& labeling_truth, int n,
                                   std::uint64_t seed) {
  Rng rng(seed);
  PreferenceDataset data;
  data.queries.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    env::CandidateSet c = features.draw_candidates(rng, false);
    PreferenceQuery q;
    q.pair_features = std::move(c.features);
    data.labels.push_back(simulated_oracle(q, labeling_truth, rng).chosen_arm);
    data.queries.push_back(std::move(q));
    data.raw_response_paths.emplace_back();
  }
  return data;
}

void write_dataset_csv(std::ostream& out, const PreferenceDataset& data,
                       const std::vector<int>& labels, const std::vector<bool>* mask) {
  if (labels.size() != data.size() || (mask && mask->size() != data.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "labels/mask length differs from dataset");
  }
  const std::size_t k = data.arm_count();
  const std::size_t d = data.dim();
  std::vector<std::string> header{"query_id", "arm_count", "chosen_arm"};
  for (std::size_t a = 1; a <= k; ++a)
    for (std::size_t j = 0; j < d; ++j)
      header.push_back("arm" + std::to_string(a) + "_x" + std::to_string(j));
  header.emplace_back("raw_response_path");
  if (mask) header.emplace_back("mask");
  out << csv::join_row(header) << '\n';

  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& q = data.queries[i];
    if (q.arm_count() != k || q.pair_features.front().size() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "dataset mixes arm counts or dimensions");
    }
    std::vector<std::string> row{std::to_string(i), std::to_string(k), std::to_string(labels[i])};
    for (const auto& x : q.pair_features)
      for (double v : x) row.push_back(csv::format_exact(v));
    row.push_back(i < data.raw_response_paths.size() ? data.raw_response_paths[i] : "");
    if (mask) row.emplace_back((*mask)[i] ? "1" : "0");
    out << csv::join_row(row) << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const PreferenceDataset& data,
                       const std::vector<int>& labels, const std::vector<bool>* mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_dataset_csv(out, data, labels, mask);
}

PreferenceDataset read_dataset_csv(std::istream& in) {
  const csv::Table table = csv::parse(in);
  if (table.rows.empty()) throw Error(ErrorCode::kEmptyFile, "dataset CSV has no rows");
  auto column = [&](const std::string& name) {
    auto idx = table.find_column(name);
    if (!idx) throw Error(ErrorCode::kSchemaViolation, "dataset CSV lacks column " + name);
    return *idx;
  };
  const std::size_t arm_count_col = column("arm_count");
  const std::size_t chosen_col = column("chosen_arm");
  const std::size_t raw_col = column("raw_response_path");

  const auto k = static_cast<std::size_t>(csv::parse_int(table.rows.front()[arm_count_col]));
  std::size_t d = 0;
  while (table.find_column("arm1_x" + std::to_string(d))) ++d;
  if (k < 2 || d == 0) throw Error(ErrorCode::kSchemaViolation, "dataset CSV has no feature columns");
  std::vector<std::vector<std::size_t>> feature_cols(k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t j = 0; j < d; ++j)
      feature_cols[a].push_back(column("arm" + std::to_string(a + 1) + "_x" + std::to_string(j)));

  PreferenceDataset data;
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::kSchemaViolation, "dataset CSV row has wrong field count");
    }
    if (static_cast<std::size_t>(csv::parse_int(row[arm_count_col])) != k) {
      throw Error(ErrorCode::kSchemaViolation, "dataset CSV mixes arm counts");
    }
    const long long chosen = csv::parse_int(row[chosen_col]);
    if (chosen < 1 || chosen > static_cast<long long>(k)) {
      throw Error(ErrorCode::kLabelOutOfRange, "chosen_arm " + row[chosen_col] + " out of range");
    }
    PreferenceQuery q;
    for (std::size_t a = 0; a < k; ++a) {
      Vector x;
      for (std::size_t col : feature_cols[a]) x.push_back(csv::parse_double(row[col]));
      q.pair_features.push_back(std::move(x));
    }
    q.validate();
    data.queries.push_back(std::move(q));
    data.labels.push_back(static_cast<int>(chosen));
    data.raw_response_paths.push_back(row[raw_col]);
  }
  return data;
}

PreferenceDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_dataset_csv(in);
}

// --- LLM client -------------------------------------------------------------

PromptTemplate parse_template_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "covid") return PromptTemplate::kCovid;
  if (n == "immigration") return PromptTemplate::kImmigration;
  if (n == "travel") return PromptTemplate::kTravel;
  throw Error(ErrorCode::kConfigError, "unknown prompt template '" + std::string(name) + "'");
}

std::string_view template_name(PromptTemplate t) {
  switch (t) {
    case PromptTemplate::kCovid: return "covid";
    case PromptTemplate::kImmigration: return "immigration";
    case PromptTemplate::kTravel: return "travel";
  }
  return "";
}

std::string_view template_text(PromptTemplate t) {
  switch (t) {
    case PromptTemplate::kCovid: return kCovidPrompt;
    case PromptTemplate::kImmigration: return kImmigrationPrompt;
    case PromptTemplate::kTravel: return kTravelPrompt;
  }
  return "";
}

std::string render_prompt(PromptTemplate t, const PreferenceQuery& query) {
  if (query.arm_descriptors.size() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "prompt templates compare exactly two arms");
  }
  std::string text(template_text(t));
  const auto [first, second] = arm_placeholders(t);
  replace_all(text, "[User]", query.user_descriptor);
  replace_all(text, first, query.arm_descriptors[0]);
  replace_all(text, second, query.arm_descriptors[1]);
  return text;
}

int parse_final_answer(std::string_view response, int arm_count) {
  static constexpr std::string_view kMarker = "[final answer]";
  const std::string folded = lower(response);
  const auto pos = folded.rfind(kMarker);
  if (pos == std::string::npos) {
    throw Error(ErrorCode::kParseError, "response has no [Final Answer] marker");
  }
  for (std::size_t i = pos + kMarker.size(); i < response.size(); ++i) {
    const char c = response[i];
    if (c < 'A' || c > 'C') continue;
    const bool left_ok = !is_word_char(response[i - 1]);
    const bool right_ok = i + 1 == response.size() || !is_word_char(response[i + 1]);
    if (!left_ok || !right_ok) continue;
    const int arm = c - 'A' + 1;
    if (arm > arm_count) {
      throw Error(ErrorCode::kParseError, std::string("answer letter ") + c + " exceeds " +
                                              std::to_string(arm_count) + " arms");
    }
    return arm;
  }
  throw Error(ErrorCode::kRefusalError, "no choice follows the [Final Answer] marker");
}

LlmConfig LlmConfig::from_json(const nlohmann::json& doc) {
  LlmConfig c;
  try {
    c.endpoint = doc.value("endpoint", c.endpoint);
    c.model = doc.value("model", c.model);
    if (doc.contains("template")) c.prompt = parse_template_name(doc.at("template").get<std::string>());
    c.api_key_env = doc.value("api_key_env", c.api_key_env);
    c.temperature = doc.value("temperature", c.temperature);
    c.top_p = doc.value("top_p", c.top_p);
    if (doc.contains("max_tokens")) c.max_tokens = doc.at("max_tokens").get<int>();
    c.max_attempts = doc.value("max_attempts", c.max_attempts);
    c.initial_backoff = std::chrono::milliseconds(doc.value("initial_backoff_ms", 500));
    c.timeout = std::chrono::seconds(doc.value("timeout_seconds", 120));
    c.max_in_flight = doc.value("max_in_flight", c.max_in_flight);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad LLM config: ") + e.what());
  }
  if (c.max_attempts < 1 || c.max_in_flight < 1) {
    throw Error(ErrorCode::kConfigError, "max_attempts and max_in_flight must be >= 1");
  }
  split_endpoint(c.endpoint);
  return c;
}

LlmConfig LlmConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, std::string("LLM config is not JSON: ") + e.what());
  }
}

nlohmann::json build_chat_request(const LlmConfig& config, const PreferenceQuery& query) {
  nlohmann::json request = {
      {"model", config.model},
      {"messages", nlohmann::json::array({{{"role", "user"},
                                           {"content", render_prompt(config.prompt, query)}}})},
      {"temperature", config.temperature},
      {"top_p", config.top_p},
      {"frequency_penalty", 0.0},
      {"presence_penalty", 0.0},
  };
  if (config.max_tokens) request["max_tokens"] = *config.max_tokens;
  return request;
}

std::string HttpChatTransport::post(const LlmConfig& config, const std::string& body) {
  const auto [base, path] = split_endpoint(config.endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kNetworkError, "request to " + config.endpoint +
                                              " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kNetworkError, "HTTP " + std::to_string(res->status) + " from " +
                                              config.endpoint);
  }
  return res->body;
}

PreferenceLabel llm_oracle(const PreferenceQuery& query, const LlmConfig& config,
                           ChatTransport& transport) {
  const std::string body = build_chat_request(config, query).dump();
  std::string response;
  auto backoff = config.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      response = transport.post(config, body);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNetworkError || attempt >= config.max_attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(response);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::kParseError, "chat endpoint returned non-JSON body");
  }
  const nlohmann::json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const auto& message = doc["choices"][0]["message"];
    if (message.is_object() && message.contains("content") && message["content"].is_string()) {
      content = &message["content"];
    } else if (message.is_object() && message.contains("refusal") && message["refusal"].is_string()) {
      throw Error(ErrorCode::kRefusalError, message["refusal"].get<std::string>());
    }
  }
  if (content == nullptr) throw Error(ErrorCode::kRefusalError, "response carries no message content");

  PreferenceLabel label;
  label.raw_response = content->get<std::string>();
  label.chosen_arm = parse_final_answer(*label.raw_response, static_cast<int>(query.arm_count()));
  return label;
}

PreferenceLabel llm_oracle(const PreferenceQuery& query, const LlmConfig& config) {
  HttpChatTransport transport;
  return llm_oracle(query, config, transport);
}

std::vector<LabelOutcome> llm_label_all(const std::vector<PreferenceQuery>& queries,
                                        const LlmConfig& config, ChatTransport& transport) {
  std::vector<LabelOutcome> outcomes(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        outcomes[i].label = llm_oracle(queries[i], config, transport);
      } catch (const Error& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight),
                                             std::max<std::size_t>(queries.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace warmstart::oracle
