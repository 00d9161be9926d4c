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

#include "warmstart/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "warmstart/csv.hpp"
#include "warmstart/error.hpp"
#include "warmstart/random.hpp"

namespace warmstart::harness {

namespace {

constexpr double kZ95 = 1.96;
constexpr double kMarginalBand = 1.10;

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double quantile95(std::size_t n, CiMethod method) {
  if (method == CiMethod::kNormal) return kZ95;
  boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string ci_method_name(CiMethod m) { return m == CiMethod::kNormal ? "normal" : "t"; }
std::string pairing_name(Pairing p) { return p == Pairing::kPaired ? "paired" : "unpaired"; }
std::string alpha_kind_name(bandit::AlphaMode::Kind k) {
  return k == bandit::AlphaMode::Kind::kFixed ? "fixed" : "adaptive";
}

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

void check_keys(const nlohmann::json& doc, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!doc.is_object()) config_error(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

// Every available arm's (features, realized reward) as ridge rows.
prior::RidgePrior fit_stream(const std::vector<env::Round>& stream, double tau_pre) {
  if (stream.empty()) throw Error(ErrorCode::kInvalidArgument, "empty real stream");
  numerics::Matrix x(0, stream.front().dim());
  numerics::Vector y;
  for (const auto& r : stream) {
    for (std::size_t a = 0; a < r.size(); ++a) {
      x.append_row(r.features()[a]);
      y.push_back(r.rewards()[a]);
    }
  }
  return prior::fit_ridge_prior(x, y, tau_pre);
}

std::vector<double> column_mean(const std::vector<std::vector<double>>& trials, std::size_t t) {
  std::vector<double> v;
  v.reserve(trials.size());
  for (const auto& tr : trials) v.push_back(tr[t]);
  return v;
}

}  // namespace

// --- config -----------------------------------------------------------------

void SweepConfig::validate() const {
  if (noise_kinds.empty()) config_error("noise_kinds is empty");
  if (p_grid.empty()) config_error("p_grid is empty");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0)) config_error("p_grid values must lie in [0, 1]");
  if (synthetic_sizes.empty()) config_error("synthetic_sizes is empty");
  for (int n : synthetic_sizes)
    if (n < 1) config_error("synthetic_sizes must be positive");
  if (trials < 2) config_error("trials must be >= 2");
  if (horizon < 1) config_error("horizon must be >= 1");
  if (!(tau_pre > 0.0)) config_error("tau_pre must be > 0");
  if (alpha < 0.0) config_error("alpha must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) config_error("delta must lie in (0, 1)");
  if (sigma < 0.0 || sigma_s < 0.0) config_error("sigma and sigma_s must be >= 0");
  if (threads < 1) config_error("threads must be >= 1");
  if (environment.misalignment_scale < 0.0) config_error("misalignment_scale must be >= 0");
  if (real_data && !synthetic_data) config_error("real_data requires synthetic_data");
  if (real_data && environment.misalignment_scale > 0.0) {
    config_error("misalignment_scale applies to synthetic environments only");
  }
  env::EnvironmentConfig e{environment.dim, environment.arms, environment.sleeping_rate,
                           environment.mean_spread};
  try {
    e.validate();
  } catch (const Error& err) {
    config_error(err.what());
  }
}

SweepConfig SweepConfig::from_json(const nlohmann::json& doc) {
  check_keys(doc,
             {"noise_kinds", "p_grid", "synthetic_sizes", "trials", "horizon", "tau_pre", "alpha",
              "delta", "sigma", "sigma_s", "master_seed", "environment", "synthetic_data",
              "real_data", "target_encoding", "bandit_mode", "alpha_mode", "pairing",
              "ci_method", "threads"},
             "sweep config");
  SweepConfig c;
  try {
    if (doc.contains("noise_kinds")) {
      c.noise_kinds.clear();
      for (const auto& k : doc.at("noise_kinds")) c.noise_kinds.push_back(noise::parse_noise_kind(k.get<std::string>()));
    }
    c.p_grid = doc.value("p_grid", c.p_grid);
    c.synthetic_sizes = doc.value("synthetic_sizes", c.synthetic_sizes);
    c.trials = doc.value("trials", c.trials);
    c.horizon = doc.value("horizon", c.horizon);
    c.tau_pre = doc.value("tau_pre", c.tau_pre);
    c.alpha = doc.value("alpha", c.alpha);
    c.delta = doc.value("delta", c.delta);
    c.sigma = doc.value("sigma", c.sigma);
    c.sigma_s = doc.value("sigma_s", c.sigma_s);
    c.master_seed = doc.value("master_seed", c.master_seed);
    if (doc.contains("environment")) {
      const auto& e = doc.at("environment");
      check_keys(e, {"dim", "arms", "sleeping_rate", "mean_spread", "misalignment_scale"},
                 "environment");
      c.environment.dim = e.value("dim", c.environment.dim);
      c.environment.arms = e.value("arms", c.environment.arms);
      c.environment.sleeping_rate = e.value("sleeping_rate", c.environment.sleeping_rate);
      c.environment.mean_spread = e.value("mean_spread", c.environment.mean_spread);
      c.environment.misalignment_scale =
          e.value("misalignment_scale", c.environment.misalignment_scale);
    }
    if (doc.contains("synthetic_data")) c.synthetic_data = doc.at("synthetic_data").get<std::string>();
    if (doc.contains("real_data")) {
      const auto& r = doc.at("real_data");
      check_keys(r, {"csv", "schema", "reduce_to_binary"}, "real_data");
      c.real_data = RealDataSpec{r.at("csv").get<std::string>(), r.at("schema").get<std::string>(),
                                 r.value("reduce_to_binary", false)};
    }
    if (doc.contains("target_encoding"))
      c.target_encoding = prior::parse_target_encoding(doc.at("target_encoding").get<std::string>());
    if (doc.contains("bandit_mode"))
      c.bandit_mode = bandit::parse_bandit_mode(doc.at("bandit_mode").get<std::string>());
    if (doc.contains("alpha_mode")) {
      const auto m = doc.at("alpha_mode").get<std::string>();
      if (m == "fixed") c.alpha_mode = bandit::AlphaMode::Kind::kFixed;
      else if (m == "adaptive") c.alpha_mode = bandit::AlphaMode::Kind::kAdaptive;
      else config_error("alpha_mode must be fixed or adaptive");
    }
    if (doc.contains("pairing")) {
      const auto m = doc.at("pairing").get<std::string>();
      if (m == "paired") c.pairing = Pairing::kPaired;
      else if (m == "unpaired") c.pairing = Pairing::kUnpaired;
      else config_error("pairing must be paired or unpaired");
    }
    if (doc.contains("ci_method")) {
      const auto m = doc.at("ci_method").get<std::string>();
      if (m == "normal") c.ci_method = CiMethod::kNormal;
      else if (m == "t") c.ci_method = CiMethod::kStudentT;
      else config_error("ci_method must be normal or t");
    }
    c.threads = doc.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

SweepConfig SweepConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    config_error(std::string("config is not JSON: ") + e.what());
  }
  SweepConfig c = from_json(doc);
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (p.is_relative()) p = base / p;
  };
  if (c.synthetic_data) resolve(*c.synthetic_data);
  if (c.real_data) {
    resolve(c.real_data->csv);
    resolve(c.real_data->schema);
  }
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : noise_kinds) kinds.push_back(std::string(noise::noise_kind_name(k)));
  nlohmann::json doc = {
      {"noise_kinds", kinds},
      {"p_grid", p_grid},
      {"synthetic_sizes", synthetic_sizes},
      {"trials", trials},
      {"horizon", horizon},
      {"tau_pre", tau_pre},
      {"alpha", alpha},
      {"delta", delta},
      {"sigma", sigma},
      {"sigma_s", sigma_s},
      {"master_seed", master_seed},
      {"environment",
       {{"dim", environment.dim},
        {"arms", environment.arms},
        {"sleeping_rate", environment.sleeping_rate},
        {"mean_spread", environment.mean_spread},
        {"misalignment_scale", environment.misalignment_scale}}},
      {"target_encoding", std::string(prior::target_encoding_name(target_encoding))},
      {"bandit_mode", std::string(bandit::bandit_mode_name(bandit_mode))},
      {"alpha_mode", alpha_kind_name(alpha_mode)},
      {"pairing", pairing_name(pairing)},
      {"ci_method", ci_method_name(ci_method)},
      {"threads", threads},
  };
  if (synthetic_data) doc["synthetic_data"] = synthetic_data->string();
  if (real_data) {
    doc["real_data"] = {{"csv", real_data->csv.string()},
                        {"schema", real_data->schema.string()},
                        {"reduce_to_binary", real_data->reduce_to_binary}};
  }
  return doc;
}

// --- trials and statistics ---------------------------------------------------

bandit::RegretLedger run_trial(const std::vector<env::Round>& stream,
                               const prior::RidgePrior* prior, const TrialConfig& config,
                               const TrialHooks& hooks) {
  bandit::RegretLedger ledger;
  if (config.horizon <= 0) return ledger;
  if (stream.size() < static_cast<std::size_t>(config.horizon)) {
    throw Error(ErrorCode::kInvalidArgument, "stream shorter than horizon");
  }
  const std::size_t d = stream.front().dim();
  bandit::LinUcbPolicy policy(config.mode, prior ? bandit::init_warm(*prior, config.alpha)
                                                 : bandit::init_cold(d, config.alpha));
  ledger.instantaneous.reserve(static_cast<std::size_t>(config.horizon));
  ledger.cumulative.reserve(static_cast<std::size_t>(config.horizon));
  for (int t = 0; t < config.horizon; ++t) {
    const env::Round& round = stream[static_cast<std::size_t>(t)];
    const env::ArmId arm = hooks.selector ? hooks.selector(round) : policy.select(round);
    const int reward = round.reward_of(arm);
    policy.observe(arm, round.features_of(arm), reward);
    if (hooks.after_update) hooks.after_update(policy, round);
    bandit::record_regret(ledger, round, arm);
  }
  return ledger;
}

double ci95_half_width(const std::vector<double>& values, CiMethod method) {
  if (values.size() < 2) throw Error(ErrorCode::kInvalidArgument, "CI needs at least two values");
  return quantile95(values.size(), method) * stddev(values) /
         std::sqrt(static_cast<double>(values.size()));
}

PctDelta pct_delta_regret(const std::vector<double>& warm_finals,
                          const std::vector<double>& cold_finals, Pairing pairing,
                          CiMethod method) {
  if (warm_finals.size() < 2 || cold_finals.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two trials per arm of the comparison");
  }
  if (pairing == Pairing::kPaired && warm_finals.size() != cold_finals.size()) {
    throw Error(ErrorCode::kInvalidArgument, "paired comparison needs equal trial counts");
  }
  const double cold_mean = mean(cold_finals);
  if (!(cold_mean > 0.0)) throw Error(ErrorCode::kZeroColdRegret, "mean cold regret is zero");
  PctDelta out;
  out.mean = 100.0 * (cold_mean - mean(warm_finals)) / cold_mean;
  if (pairing == Pairing::kPaired) {
    std::vector<double> per_trial;
    for (std::size_t i = 0; i < warm_finals.size(); ++i)
      per_trial.push_back(100.0 * (cold_finals[i] - warm_finals[i]) / cold_mean);
    out.ci95 = ci95_half_width(per_trial, method);
  } else {
    const double nw = static_cast<double>(warm_finals.size());
    const double nc = static_cast<double>(cold_finals.size());
    const double sw = stddev(warm_finals);
    const double sc = stddev(cold_finals);
    const double se = std::sqrt(sw * sw / nw + sc * sc / nc);
    out.ci95 = quantile95(std::min(warm_finals.size(), cold_finals.size()), method) * 100.0 * se /
               cold_mean;
  }
  return out;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kWarmFavored: return "warm_favored";
    case Verdict::kMarginal: return "marginal";
    case Verdict::kColdFavored: return "cold_favored";
  }
  return "";
}

Verdict classify(double b0_hat, double cold_proxy) {
  if (b0_hat < cold_proxy) return Verdict::kWarmFavored;
  if (b0_hat <= kMarginalBand * cold_proxy) return Verdict::kMarginal;
  return Verdict::kColdFavored;
}

nlohmann::json DiagnosticReport::to_json() const {
  return {{"B0_hat", B0_hat},
          {"B0_cold_proxy", B0_cold_proxy},
          {"verdict", std::string(verdict_name(verdict))},
          {"theta0", synthetic_prior.theta0},
          {"theta_real", theta_real}};
}

DiagnosticReport estimate_B0_hat(const noise::CorruptedDataset& synthetic,
                                 const std::vector<env::Round>& real_stream, double tau_pre,
                                 prior::TargetEncoding encoding) {
  if (!synthetic.base) throw Error(ErrorCode::kInvalidArgument, "no synthetic dataset");
  if (real_stream.empty()) throw Error(ErrorCode::kInvalidArgument, "empty real stream");
  if (synthetic.base->dim() != real_stream.front().dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "synthetic and real feature dims differ");
  }
  const prior::RegressionRows rows = prior::regression_rows(*synthetic.base, synthetic.labels, encoding);
  DiagnosticReport r;
  r.synthetic_prior = prior::fit_ridge_prior(rows.x, rows.y, tau_pre);
  r.theta_real = fit_stream(real_stream, tau_pre).theta0;
  r.B0_hat = prior::prior_error_B0(r.synthetic_prior, r.theta_real);
  r.B0_cold_proxy = numerics::norm2(r.theta_real);
  r.verdict = classify(r.B0_hat, r.B0_cold_proxy);
  return r;
}

// --- sweep -------------------------------------------------------------------

namespace {

// Everything a cell needs that does not depend on (kind, p).
struct SweepContext {
  const SweepConfig& config;
  std::optional<env::SyntheticEnvironment> environment;
  std::optional<env::GroundTruth> labeling_truth;
  std::shared_ptr<const oracle::PreferenceDataset> loaded;
  std::vector<std::vector<env::Round>> streams;       // per trial
  std::vector<std::vector<env::Round>> cold_streams;  // unpaired only
  std::vector<bandit::RegretLedger> cold;             // per trial
  std::vector<double> cold_proxy;                     // per trial

  explicit SweepContext(const SweepConfig& c) : config(c) {}

  bool synthetic() const { return environment.has_value(); }
  std::size_t dim() const {
    return synthetic() ? environment->dim() : loaded->dim();
  }
};

std::vector<env::Round> shuffled_prefix(const std::vector<env::Round>& rounds, int horizon,
                                        std::uint64_t seed) {
  if (rounds.size() < static_cast<std::size_t>(horizon)) {
    throw Error(ErrorCode::kConfigError, "real data has " + std::to_string(rounds.size()) +
                                             " rounds, fewer than the horizon");
  }
  std::vector<std::size_t> order(rounds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<env::Round> out;
  for (int t = 0; t < horizon; ++t) {
    const auto& r = rounds[order[static_cast<std::size_t>(t)]];
    out.emplace_back(t + 1, r.arms(), r.features(), r.rewards());
  }
  return out;
}

numerics::Vector misalignment_direction(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  numerics::Vector v(dim, 0.0);
  do {
    for (std::size_t j = 0; j + 1 < dim; ++j) v[j] = normal(rng);
  } while (numerics::norm2(v) == 0.0);
  return v;  // intercept coordinate stays 0
}

bandit::AlphaMode alpha_for(const SweepConfig& c, double b0) {
  return c.alpha_mode == bandit::AlphaMode::Kind::kFixed
             ? bandit::AlphaMode::fixed(c.alpha)
             : bandit::AlphaMode::adaptive(c.delta, c.sigma, b0);
}

SweepContext prepare(const SweepConfig& config) {
  config.validate();
  SweepContext ctx(config);
  const std::uint64_t master = config.master_seed;
  const auto g = static_cast<std::size_t>(config.trials);

  std::vector<env::Round> real_rounds;
  if (config.real_data) {
    const auto schema = env::ConjointSchema::load(config.real_data->schema);
    real_rounds = env::ingest_conjoint_csv(config.real_data->csv, schema,
                                           config.real_data->reduce_to_binary,
                                           derive_seed({master, tag("reduce")}));
  } else {
    env::EnvironmentConfig e{config.environment.dim, config.environment.arms,
                             config.environment.sleeping_rate, config.environment.mean_spread};
    ctx.environment.emplace(e, derive_seed({master, tag("theta")}));
    ctx.labeling_truth = ctx.environment->truth();
    if (config.environment.misalignment_scale > 0.0) {
      const auto& theta = ctx.environment->truth().theta_star;
      ctx.labeling_truth = env::inject_misalignment(
          ctx.environment->truth(),
          misalignment_direction(theta.size(), derive_seed({master, tag("misalignment")})),
          config.environment.misalignment_scale * numerics::norm2(theta));
    }
  }
  if (config.synthetic_data) {
    ctx.loaded = std::make_shared<const oracle::PreferenceDataset>(
        oracle::read_dataset_csv(*config.synthetic_data));
    if (ctx.loaded->dim() != ctx.dim() && ctx.synthetic()) {
      throw Error(ErrorCode::kConfigError, "synthetic_data dimension differs from environment");
    }
    if (!real_rounds.empty() && ctx.loaded->dim() != real_rounds.front().dim()) {
      throw Error(ErrorCode::kConfigError, "synthetic_data dimension differs from real data");
    }
    for (int n : config.synthetic_sizes) {
      if (static_cast<std::size_t>(n) > ctx.loaded->size()) {
        throw Error(ErrorCode::kConfigError, "synthetic_data has fewer than " + std::to_string(n) + " queries");
      }
    }
  }

  auto make_stream = [&](std::uint64_t seed) {
    return ctx.synthetic() ? ctx.environment->stream(config.horizon, seed)
                           : shuffled_prefix(real_rounds, config.horizon, seed);
  };
  ctx.streams.resize(g);
  if (config.pairing == Pairing::kUnpaired) ctx.cold_streams.resize(g);
  ctx.cold.resize(g);
  ctx.cold_proxy.resize(g);
  parallel_for(g, config.threads, [&](std::size_t i) {
    ctx.streams[i] = make_stream(derive_seed({master, tag("stream"), i}));
    const auto& cold_stream = config.pairing == Pairing::kPaired
                                  ? ctx.streams[i]
                                  : (ctx.cold_streams[i] = make_stream(derive_seed({master, tag("cold-stream"), i})));
    ctx.cold_proxy[i] = numerics::norm2(fit_stream(ctx.streams[i], config.tau_pre).theta0);
    const double b0_cold = ctx.synthetic() ? numerics::norm2(ctx.environment->truth().theta_star)
                                           : ctx.cold_proxy[i];
    TrialConfig tc{config.horizon, config.bandit_mode, alpha_for(config, b0_cold)};
    ctx.cold[i] = run_trial(cold_stream, nullptr, tc);
  });
  return ctx;
}

std::shared_ptr<const oracle::PreferenceDataset> base_dataset(const SweepContext& ctx, int n,
                                                              std::size_t trial) {
  if (ctx.loaded) {
    auto subset = std::make_shared<oracle::PreferenceDataset>();
    const auto count = static_cast<std::ptrdiff_t>(n);
    subset->queries.assign(ctx.loaded->queries.begin(), ctx.loaded->queries.begin() + count);
    subset->labels.assign(ctx.loaded->labels.begin(), ctx.loaded->labels.begin() + count);
    subset->raw_response_paths.assign(ctx.loaded->raw_response_paths.begin(),
                                      ctx.loaded->raw_response_paths.begin() + count);
    return subset;
  }
  return std::make_shared<const oracle::PreferenceDataset>(oracle::simulate_dataset(
      *ctx.environment, *ctx.labeling_truth, n,
      derive_seed({ctx.config.master_seed, tag("synthetic"), static_cast<std::uint64_t>(n), trial})));
}

void fill_trajectory(const std::vector<std::vector<double>>& trials, CiMethod method,
                     std::vector<double>& means, std::vector<double>& cis) {
  const std::size_t horizon = trials.front().size();
  means.resize(horizon);
  cis.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto v = column_mean(trials, t);
    means[t] = mean(v);
    cis[t] = ci95_half_width(v, method);
  }
}

std::vector<double> as_doubles(const bandit::RegretLedger& ledger) {
  return {ledger.cumulative.begin(), ledger.cumulative.end()};
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, const CellSink& on_cell) {
  const SweepContext ctx = prepare(config);
  const auto g = static_cast<std::size_t>(config.trials);

  // Base datasets depend only on (N, trial); share them across noise cells.
  std::vector<std::vector<std::shared_ptr<const oracle::PreferenceDataset>>> bases(
      config.synthetic_sizes.size(), std::vector<std::shared_ptr<const oracle::PreferenceDataset>>(g));
  for (std::size_t ni = 0; ni < config.synthetic_sizes.size(); ++ni) {
    parallel_for(g, config.threads, [&](std::size_t i) {
      bases[ni][i] = base_dataset(ctx, config.synthetic_sizes[ni], i);
    });
  }

  std::vector<std::vector<double>> cold_trajectories;
  for (const auto& l : ctx.cold) cold_trajectories.push_back(as_doubles(l));
  std::vector<double> cold_mean, cold_ci;
  fill_trajectory(cold_trajectories, config.ci_method, cold_mean, cold_ci);

  SweepResult result;
  for (noise::NoiseKind kind : config.noise_kinds) {
    for (std::size_t pi = 0; pi < config.p_grid.size(); ++pi) {
      for (std::size_t ni = 0; ni < config.synthetic_sizes.size(); ++ni) {
        const int n = config.synthetic_sizes[ni];
        CellResult cell;
        cell.kind = kind;
        cell.p = config.p_grid[pi];
        cell.n = n;
        std::vector<std::vector<double>> warm(g);
        std::vector<double> b0_true(g), b0_hat(g);
        parallel_for(g, config.threads, [&](std::size_t i) {
          const noise::NoiseSpec spec{
              kind, cell.p,
              derive_seed({config.master_seed, tag(noise::noise_kind_name(kind)), pi,
                           static_cast<std::uint64_t>(n), i})};
          const noise::CorruptedDataset data = noise::corrupt(bases[ni][i], spec);
          const DiagnosticReport diag =
              estimate_B0_hat(data, ctx.streams[i], config.tau_pre, config.target_encoding);
          const prior::RidgePrior& fitted = diag.synthetic_prior;
          b0_hat[i] = diag.B0_hat;
          double b0 = diag.B0_hat;
          if (ctx.synthetic()) {
            b0_true[i] = prior::prior_error_B0(fitted, ctx.environment->truth().theta_star);
            b0 = b0_true[i];
          }
          TrialConfig tc{config.horizon, config.bandit_mode, alpha_for(config, b0)};
          warm[i] = as_doubles(run_trial(ctx.streams[i], &fitted, tc));
        });
        fill_trajectory(warm, config.ci_method, cell.warm_mean, cell.warm_ci95);
        cell.cold_mean = cold_mean;
        cell.cold_ci95 = cold_ci;
        for (std::size_t i = 0; i < g; ++i) {
          cell.warm_finals.push_back(warm[i].back());
          cell.cold_finals.push_back(cold_trajectories[i].back());
        }
        if (ctx.synthetic()) cell.b0_true = b0_true;
        cell.b0_hat = b0_hat;
        cell.cold_proxy = ctx.cold_proxy;
        cell.pct = pct_delta_regret(cell.warm_finals, cell.cold_finals, config.pairing,
                                    config.ci_method);
        if (on_cell) on_cell(cell);
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

// --- output ------------------------------------------------------------------

namespace {
std::string num(double v) { return csv::format_number(v, 6); }
}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "noise_kind,p,N,pct_delta_regret,ci95,warm_mean_final,cold_mean_final\n";
  for (const auto& c : cells) {
    out << noise::noise_kind_name(c.kind) << ',' << num(c.p) << ',' << c.n << ','
        << num(c.pct.mean) << ',' << num(c.pct.ci95) << ',' << num(c.warm_mean.back()) << ','
        << num(c.cold_mean.back()) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const CellResult& cell) {
  out << "t,warm_mean,warm_ci95,cold_mean,cold_ci95\n";
  for (std::size_t t = 0; t < cell.warm_mean.size(); ++t) {
    out << t + 1 << ',' << num(cell.warm_mean[t]) << ',' << num(cell.warm_ci95[t]) << ','
        << num(cell.cold_mean[t]) << ',' << num(cell.cold_ci95[t]) << '\n';
  }
}

void write_trials_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "noise_kind,p,N,trial,warm_final,cold_final,B0,B0_hat,B0_cold_proxy\n";
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < c.warm_finals.size(); ++i) {
      out << noise::noise_kind_name(c.kind) << ',' << num(c.p) << ',' << c.n << ',' << i << ','
          << num(c.warm_finals[i]) << ',' << num(c.cold_finals[i]) << ','
          << (c.b0_true.empty() ? std::string() : num(c.b0_true[i])) << ',' << num(c.b0_hat[i])
          << ',' << num(c.cold_proxy[i]) << '\n';
    }
  }
}

nlohmann::json diagnostics_json(const std::vector<CellResult>& cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cells) {
    const double hat = mean(c.b0_hat);
    const double proxy = mean(c.cold_proxy);
    nlohmann::json cell = {{"noise_kind", std::string(noise::noise_kind_name(c.kind))},
                           {"p", c.p},
                           {"N", c.n},
                           {"B0_hat", hat},
                           {"B0_cold_proxy", proxy},
                           {"verdict", std::string(verdict_name(classify(hat, proxy)))},
                           {"pct_delta_regret", c.pct.mean},
                           {"ci95", c.pct.ci95}};
    cell["B0_true"] = c.b0_true.empty() ? nlohmann::json(nullptr) : nlohmann::json(mean(c.b0_true));
    out.push_back(std::move(cell));
  }
  return out;
}

std::string trajectory_file_name(const CellResult& cell) {
  return "trajectory_" + std::string(noise::noise_kind_name(cell.kind)) + "_" + num(cell.p) +
         "_" + std::to_string(cell.n) + ".csv";
}

SweepResult run_sweep_to_directory(const SweepConfig& config, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + (out_dir / name).string());
    return f;
  };

  std::ofstream summary = open("summary.csv");
  write_summary_csv(summary, {});
  summary.flush();
  SweepResult result = run_sweep(config, [&](const CellResult& cell) {
    std::ostringstream row;
    write_summary_csv(row, {cell});
    const std::string text = row.str();
    summary << text.substr(text.find('\n') + 1);
    summary.flush();
    std::ofstream traj = open(trajectory_file_name(cell));
    write_trajectory_csv(traj, cell);
  });

  std::ofstream trials = open("trials.csv");
  write_trials_csv(trials, result.cells);
  std::ofstream diag = open("diagnostics.json");
  diag << nlohmann::json{{"config", config.to_json()}, {"cells", diagnostics_json(result.cells)}}.dump(2)
       << '\n';
  return result;
}

}  // namespace warmstart::harness
