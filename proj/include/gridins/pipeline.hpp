#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridins/actuarial.hpp"
#include "gridins/model.hpp"

namespace gridins::pipeline {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SimulateOptions {
  std::string config_path;
  std::optional<std::int64_t> seed;       // highest precedence
  std::optional<int> years;               // horizon override
  std::optional<std::string> scenario;    // named sweep point, S1..S6
  std::optional<double> correlation;      // copula override
  std::string out_dir = ".";
  int workers = 1;
};

struct SimulateOutcome {
  std::int64_t seed = 1;
  std::string scenario_label;  // named override or "config"
  double elc = 0.0;
  double efc = 0.0;
  int clipped_chains = 0;
  std::vector<StageTiming> timings;
  std::string manifest_path, losses_path, reliability_path;
};

// Master seed: --seed flag, else config seed, else GRIDINS_SEED, else 1.
std::int64_t resolve_seed(const std::optional<std::int64_t>& flag,
                          const std::optional<std::int64_t>& config_seed);

// Named sweep points: S1..S3 run one, two, three job threads without smart
// monitoring; S4..S6 the same ladder with monitoring on.  Clears per-host
// overrides so the sweep is uniform.
void apply_scenario(ScenarioConfig& scenario, const std::string& name);

SimulateOutcome run_simulate(const SimulateOptions& options);

struct PremiumsOptions {
  std::string losses_path;
  double risk_level = 0.1;
  std::string delta = "tail";       // "tail" or "ecdf:<threshold>"
  std::string pi2 = "coalitional";  // premium rule for design 2
  std::string pi1 = "tce";          // "tce" or "allocated"
  std::string out_dir = ".";
};

actuarial::PremiumReport run_premiums(const PremiumsOptions& options);

// Joins reliability, loss-statistics and premium tables under a run
// directory (or its immediate subdirectories) into summary.csv/summary.json.
void run_report(const std::string& run_dir, const std::string& format);

// Exit status 0 iff the config loads; prints one JSON diagnostic line.
int run_validate(const std::string& config_path);

}  // namespace gridins::pipeline
