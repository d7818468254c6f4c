#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <iostream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ziptail/error.hpp"
#include "ziptail/rng.hpp"

namespace ziptail {

struct Summary {
  double mean = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be non-empty and ascending.
double quantile_sorted(std::span<const double> sorted, double p);

/// Mean, quantiles at (1 -/+ level) / 2 and sample standard deviation.
/// Throws StatError on empty input.
Summary summarize(std::span<const double> values, double level = 0.95);

enum class Scenario {
  iid_scan,
  bias_variance,
  loglog_occupation,
  markov_kde,
  split_chain,
  averaged_estimator,
  positive_recurrent,
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::iid_scan;
  std::size_t replicates = 1;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  double level = 0.95;
  nlohmann::json params = nlohmann::json::object();
};

/// Parses and validates a config; fills scenario defaults for n and
/// replicates when absent. Throws ConfigError.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& config);

struct RunManifest {
  nlohmann::json config;
  std::string code_version;
  std::vector<std::uint64_t> seeds;  // one per replicate, in replicate order
  std::vector<std::string> outputs;  // relative to the output directory
  std::size_t failed_replicates = 0;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
};

/// Runs every replicate, writes the scenario's CSV files and manifest.json
/// into `out_dir`. Throws StatError when more than 10% of replicates fail.
RunManifest run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Fraction of failed replicates above which a run is aborted.
inline constexpr double kMaxFailedFraction = 0.10;

std::string code_version();

/// Runs f(rng, index) for index in [0, count) on `threads` workers, replicate
/// i drawing from make_stream(master_seed, i). Failures raised as
/// ziptail::Error are logged and leave an empty slot; results are returned in
/// replicate order, so the output is independent of the thread count.
template <class R>
std::vector<std::optional<R>> run_replicates(std::size_t count, std::uint64_t master_seed, unsigned threads,
                                             const std::function<R(Rng&, std::size_t)>& f) {
  std::vector<std::optional<R>> results(count);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      Rng rng = make_stream(master_seed, i);
      try {
        results[i] = f(rng, i);
      } catch (const Error& e) {
        std::lock_guard lock(log_mutex);
        std::cerr << "replicate " << i << " failed: " << e.what() << '\n';
      }
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  return results;
}

}  // namespace ziptail
