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

// warmstart: sweep | audit | gen | verify.
//
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 verification
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "warmstart/env.hpp"
#include "warmstart/error.hpp"
#include "warmstart/harness.hpp"
#include "warmstart/noise.hpp"
#include "warmstart/oracle.hpp"
#include "warmstart/prior.hpp"

namespace fs = std::filesystem;
using namespace warmstart;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kConfigError ? kExitConfig : kExitData;
}

struct SweepArgs {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> horizon;
  std::optional<int> threads;
};

struct AuditArgs {
  std::string synthetic;
  std::string real;
  std::string schema;
  bool reduce = false;
  double tau = 1.0;
  double p = 0.0;
  double sigma_s = 0.5;
  double delta_s = 0.1;
  std::string encoding = "both_rows";
  std::uint64_t seed = 0;
  std::string out;
};

struct GenArgs {
  std::string out;
  std::string oracle = "simulated";
  int n = 1000;
  int dim = 20;
  int arms = 2;
  double mean_spread = 0.15;
  double misalignment = 0.0;
  std::string llm_config;
  std::string conjoint;
  std::string schema;
  std::string raw_dir;
  std::string noise = "none";
  double p = 0.0;
  std::uint64_t seed = 0;
};

void log(bool quiet, const std::string& line) {
  if (!quiet) std::cerr << line << '\n';
}

int run_sweep(const SweepArgs& a, bool quiet) {
  harness::SweepConfig config = harness::SweepConfig::load(a.config);
  if (a.seed) config.master_seed = *a.seed;
  if (a.trials) config.trials = *a.trials;
  if (a.horizon) config.horizon = *a.horizon;
  if (a.threads) config.threads = *a.threads;
  config.validate();
  const auto result = harness::run_sweep_to_directory(config, a.out);
  for (const auto& c : result.cells) {
    char line[200];
    std::snprintf(line, sizeof(line), "%-20s p=%-4g N=%-6d pct=%8.3f +- %.3f",
                  std::string(noise::noise_kind_name(c.kind)).c_str(), c.p, c.n, c.pct.mean,
                  c.pct.ci95);
    log(quiet, line);
  }
  log(quiet, "wrote " + a.out);
  return kExitOk;
}

// Preference-format real data: the chosen arm earns reward 1.
std::vector<env::Round> rounds_from_preferences(const oracle::PreferenceDataset& data) {
  std::vector<env::Round> rounds;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& q = data.queries[i];
    std::vector<env::ArmId> arms;
    std::vector<int> rewards;
    for (std::size_t a = 0; a < q.arm_count(); ++a) {
      arms.push_back(static_cast<env::ArmId>(a + 1));
      rewards.push_back(static_cast<int>(a + 1) == data.labels[i] ? 1 : 0);
    }
    rounds.emplace_back(static_cast<int>(i + 1), arms, q.pair_features, rewards);
  }
  return rounds;
}

int run_audit(const AuditArgs& a, bool quiet) {
  auto synthetic = std::make_shared<const oracle::PreferenceDataset>(oracle::read_dataset_csv(a.synthetic));
  const std::vector<env::Round> real =
      a.schema.empty() ? rounds_from_preferences(oracle::read_dataset_csv(a.real))
                       : env::ingest_conjoint_csv(a.real, env::ConjointSchema::load(a.schema),
                                                  a.reduce, a.seed);
  const noise::CorruptedDataset data = noise::corrupt(synthetic, {});
  const auto encoding = prior::parse_target_encoding(a.encoding);
  const harness::DiagnosticReport report = harness::estimate_B0_hat(data, real, a.tau, encoding);

  const auto rows = prior::regression_rows(*synthetic, synthetic->labels, encoding);
  nlohmann::json doc = report.to_json();
  doc["prior_error"] = prior::prior_error_report(report.synthetic_prior, rows.x, report.theta_real,
                                                 noise::effective_rate(a.p), a.sigma_s, a.delta_s)
                           .to_json();
  doc["n_synthetic"] = synthetic->size();
  doc["n_real_rounds"] = real.size();
  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(a.out);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + a.out);
    f << text;
  }
  char line[160];
  std::snprintf(line, sizeof(line), "B0_hat=%.4g cold_proxy=%.4g verdict=%s", report.B0_hat,
                report.B0_cold_proxy, std::string(harness::verdict_name(report.verdict)).c_str());
  log(quiet, line);
  return kExitOk;
}

std::string describe(const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& [k, v] : values) {
    if (!out.empty()) out += "; ";
    out += k + ": " + v;
  }
  return out;
}

oracle::PreferenceDataset llm_dataset(const GenArgs& a, bool quiet) {
  if (a.conjoint.empty() || a.schema.empty() || a.llm_config.empty()) {
    throw Error(ErrorCode::kConfigError, "--oracle llm needs --conjoint, --schema and --llm-config");
  }
  const auto schema = env::ConjointSchema::load(a.schema);
  if (schema.arms_per_task != 2) {
    throw Error(ErrorCode::kConfigError, "LLM prompts compare two arms; schema has " +
                                             std::to_string(schema.arms_per_task));
  }
  std::ifstream in(a.conjoint, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + a.conjoint);
  const auto tasks = env::read_conjoint_tasks(in, schema);
  const auto rounds = env::encode_conjoint_tasks(tasks, schema, false, a.seed);

  std::vector<oracle::PreferenceQuery> queries;
  const std::size_t n = std::min(tasks.size(), static_cast<std::size_t>(a.n));
  for (std::size_t i = 0; i < n; ++i) {
    oracle::PreferenceQuery q;
    q.user_descriptor = describe(tasks[i].demographics);
    for (const auto& arm : tasks[i].arm_attributes) q.arm_descriptors.push_back(describe(arm));
    q.pair_features = rounds[i].features();
    queries.push_back(std::move(q));
  }
  const auto config = oracle::LlmConfig::load(a.llm_config);
  oracle::HttpChatTransport transport;
  const auto outcomes = oracle::llm_label_all(queries, config, transport);

  if (!a.raw_dir.empty()) fs::create_directories(a.raw_dir);
  oracle::PreferenceDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    if (!outcomes[i].label) {
      log(quiet, "query " + std::to_string(i) + " skipped: " + outcomes[i].error);
      continue;
    }
    std::string raw_path;
    if (!a.raw_dir.empty()) {
      raw_path = (fs::path(a.raw_dir) / ("response_" + std::to_string(i) + ".txt")).string();
      std::ofstream f(raw_path, std::ios::binary);
      f << outcomes[i].label->raw_response.value_or("");
    }
    data.queries.push_back(queries[i]);
    data.labels.push_back(outcomes[i].label->chosen_arm);
    data.raw_response_paths.push_back(raw_path);
  }
  if (data.size() == 0) throw Error(ErrorCode::kEmptyFile, "no query received a usable label");
  return data;
}

int run_gen(const GenArgs& a, bool quiet) {
  oracle::PreferenceDataset data;
  if (a.oracle == "simulated") {
    const env::SyntheticEnvironment environment({a.dim, a.arms, 0.0, a.mean_spread},
                                                derive_seed({a.seed, tag("theta")}));
    env::GroundTruth labeling = environment.truth();
    if (a.misalignment > 0.0) {
      Rng rng(derive_seed({a.seed, tag("misalignment")}));
      std::normal_distribution<double> normal(0.0, 1.0);
      numerics::Vector dir(environment.dim(), 0.0);
      for (std::size_t j = 0; j + 1 < dir.size(); ++j) dir[j] = normal(rng);
      labeling = env::inject_misalignment(labeling, dir,
                                          a.misalignment * numerics::norm2(labeling.theta_star));
    }
    data = oracle::simulate_dataset(environment, labeling, a.n, derive_seed({a.seed, tag("synthetic")}));
  } else if (a.oracle == "llm") {
    data = llm_dataset(a, quiet);
  } else {
    throw Error(ErrorCode::kConfigError, "--oracle must be simulated or llm");
  }

  const noise::NoiseKind kind = noise::parse_noise_kind(a.noise);
  auto base = std::make_shared<const oracle::PreferenceDataset>(std::move(data));
  const noise::CorruptedDataset corrupted =
      noise::corrupt(base, {kind, a.p, derive_seed({a.seed, tag("noise")})});
  oracle::write_dataset_csv(fs::path(a.out), *base, corrupted.labels,
                            kind == noise::NoiseKind::kNone ? nullptr : &corrupted.mask);
  log(quiet, "wrote " + std::to_string(base->size()) + " queries to " + a.out);
  return kExitOk;
}

int run_verify(std::uint64_t seed, bool quiet) {
  bool all = true;
  for (const auto& c : harness::run_verification(seed)) {
    all = all && c.passed;
    if (!quiet || !c.passed) {
      std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
    }
  }
  return all ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warm-started sleeping LinUCB experiments"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress progress output");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a noise sweep from a JSON config");
  sweep_cmd->add_option("--config", sweep.config, "Sweep config JSON")->required();
  sweep_cmd->add_option("--out", sweep.out, "Output directory");
  sweep_cmd->add_option("--seed", sweep.seed, "Override master_seed");
  sweep_cmd->add_option("--trials", sweep.trials, "Override trials");
  sweep_cmd->add_option("--horizon", sweep.horizon, "Override horizon");
  sweep_cmd->add_option("--threads", sweep.threads, "Override threads");
  sweep_cmd->add_flag("--quiet", quiet);

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "B0-hat diagnostic for a synthetic/real pair");
  audit_cmd->add_option("--synthetic", audit.synthetic, "Synthetic preference CSV")->required();
  audit_cmd->add_option("--real", audit.real, "Real data CSV")->required();
  audit_cmd->add_option("--schema", audit.schema, "Conjoint schema JSON (real CSV is conjoint)");
  audit_cmd->add_flag("--reduce-to-binary", audit.reduce, "Reduce 3-arm tasks to pairs");
  audit_cmd->add_option("--tau", audit.tau, "Ridge regularizer");
  audit_cmd->add_option("--p", audit.p, "Assumed flip rate for the bound report");
  audit_cmd->add_option("--sigma-s", audit.sigma_s, "Pretraining noise proxy");
  audit_cmd->add_option("--delta-s", audit.delta_s, "High-probability bound level");
  audit_cmd->add_option("--encoding", audit.encoding, "both_rows | chosen_only");
  audit_cmd->add_option("--seed", audit.seed, "Seed for binary reduction");
  audit_cmd->add_option("--out", audit.out, "Write JSON here instead of stdout");
  audit_cmd->add_flag("--quiet", quiet);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a labelled preference dataset");
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();
  gen_cmd->add_option("--oracle", gen.oracle, "simulated | llm");
  gen_cmd->add_option("--n", gen.n, "Number of queries");
  gen_cmd->add_option("--dim", gen.dim, "Feature dimension (simulated)");
  gen_cmd->add_option("--arms", gen.arms, "Arms per query (simulated)");
  gen_cmd->add_option("--mean-spread", gen.mean_spread, "Spread of arm means (simulated)");
  gen_cmd->add_option("--misalignment", gen.misalignment, "||Delta|| / ||theta*|| (simulated)");
  gen_cmd->add_option("--llm-config", gen.llm_config, "LLM client config JSON");
  gen_cmd->add_option("--conjoint", gen.conjoint, "Conjoint CSV supplying queries (llm)");
  gen_cmd->add_option("--schema", gen.schema, "Conjoint schema JSON (llm)");
  gen_cmd->add_option("--raw-dir", gen.raw_dir, "Directory for raw LLM responses");
  gen_cmd->add_option("--noise", gen.noise, "none | random_replacement | preference_flipping");
  gen_cmd->add_option("--p", gen.p, "Corruption rate");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_flag("--quiet", quiet);

  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run the theory-check suite");
  verify_cmd->add_option("--seed", verify_seed, "Seed");
  verify_cmd->add_flag("--quiet", quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sweep_cmd) return run_sweep(sweep, quiet);
    if (*audit_cmd) return run_audit(audit, quiet);
    if (*gen_cmd) return run_gen(gen, quiet);
    if (*verify_cmd) return run_verify(verify_seed, quiet);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
