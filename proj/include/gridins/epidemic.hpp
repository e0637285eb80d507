#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gridins/model.hpp"
#include "gridins/rng.hpp"

namespace gridins::epidemic {

// One row of equicorrelated uniforms: a shared factor plus an idiosyncratic
// factor per coordinate, pushed through the standard normal CDF.  Every
// coordinate is marginally U(0,1); any two share the given normal-scale
// correlation.
std::vector<double> correlated_uniform_row(double correlation, int dims,
                                           Substream& stream);

// rows x dims matrix of such draws.
std::vector<std::vector<double>> equicorrelated_uniforms(int dims,
                                                         double correlation,
                                                         int rows,
                                                         Substream& stream);

// Elementwise product: shrinks each base compromise time by its uniform.
std::vector<double> sampled_compromise_times(std::span<const double> base_hours,
                                             std::span<const double> uniforms);

// Hours a neighbor needs to clean up: reproduction_hours for each of its
// coupled links, each link active with probability `coupling`.
double sample_recovery(int neighbor_count, double reproduction_hours,
                       double coupling, Substream& stream);

// Chance per step that a substation is under successful attack, from the
// infection-pressure hours (neighbors' takeover times plus the external
// entry time) and the recovery hours (neighbors' cleanup times plus the
// external floor).  Averaged infection pressure of +inf means the substation
// is unreachable and the chance is zero.
double infection_probability(std::span<const double> infection_hours,
                             std::span<const double> recovery_hours);

// Hourly on/off state per substation: 1 = operating, 0 = under attack.
struct StateSequences {
  long steps = 0;
  std::vector<std::string> substations;  // sorted ids
  std::vector<std::uint8_t> values;      // indexed [sub * steps + step]

  std::uint8_t at(int sub, long step) const {
    return values[static_cast<size_t>(sub) * steps + step];
  }
};

// Samples the whole horizon.  All randomness is addressed by (step, host),
// so the result is byte-identical for any worker count.
StateSequences generate_state_sequences(
    const GridModel& grid, const AttackGraph& graph,
    const std::map<std::string, double>& compromise_time_by_host,
    const ScenarioConfig& scenario, std::uint64_t seed, int workers = 1);

}  // namespace gridins::epidemic
