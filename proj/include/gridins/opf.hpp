#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridins/epidemic.hpp"
#include "gridins/lp.hpp"
#include "gridins/model.hpp"

namespace gridins::opf {

// Outcome of one curtailment dispatch.
struct DispatchResult {
  std::vector<double> angles;       // rad per bus
  std::vector<double> generation;   // MW per bus
  std::vector<double> curtailment;  // MW per bus (informational per bus;
                                    // totals are the asserted quantity)
  std::vector<double> flows;        // MW per line
  double total_curtailment = 0.0;   // MW
};

// Availability of each substation (1 = operating), keyed by id.
struct SubstationAvailability {
  std::vector<std::string> substations;
  std::vector<std::uint8_t> on;
};

// The linear program behind solve_curtailment, exposed so independent
// solvers can certify the optimum.  Variable layout: bus angles, then per-bus
// generation, then per-bus curtailment, then line flows.
lp::Problem curtailment_problem(const GridModel& grid,
                                std::span<const std::uint8_t> bus_generation_on);

// Minimizes total curtailment subject to DC power flow, line thermal limits
// and availability-gated generation.  Always feasible (full curtailment with
// no dispatch is a feasible point).
DispatchResult solve_curtailment(const GridModel& grid,
                                 const SubstationAvailability& availability);

// Per-step curtailment and fault counts over a sampled horizon.
struct LossSeries {
  std::vector<std::string> tg_ids;
  long steps = 0;
  std::vector<double> tg_curtailment;     // [step * tg_count + tg], MW
  std::vector<double> total_curtailment;  // MW per step
  std::vector<int> faulty_count;          // substations with EN = 0 per step

  double tg_at(long step, int tg) const {
    return tg_curtailment[static_cast<size_t>(step) * tg_ids.size() + tg];
  }
};

// Dispatches every step of the state sequences.  Distinct availability
// patterns are solved once and cached; workers split the horizon.
LossSeries run_mcs(const GridModel& grid, const epidemic::StateSequences& seq,
                   const ScenarioConfig& scenario, int workers = 1);

// Mean per-step total curtailment, in MW, or per-unit when a base is given.
double elc(const LossSeries& series,
           std::optional<double> power_base_mw = std::nullopt);

// Mean per-step count of faulty substations.
double efc(const LossSeries& series);

// Per-TG annual monetary losses at the given value of lost load.
struct LossDistribution {
  std::vector<std::string> tg_ids;
  int years = 0;
  std::vector<std::vector<double>> annual_losses;  // [tg][year], currency
};

LossDistribution monetize(const LossSeries& series, double voll,
                          int steps_per_year);

}  // namespace gridins::opf
