#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gridins/model.hpp"
#include "gridins/rng.hpp"

namespace gridins::cps {

// Sentinel compromise time for hosts an intruder cannot reach.
inline constexpr double kNeverCompromised =
    std::numeric_limits<double>::infinity();

// Chances that a replacement worker thread is recruited before the currently
// running threads die.  With failure rate f per thread and recruitment rate
// g, a single survivor is rescued with probability g/(g+f) and a pair with
// probability g/(g+2f).
struct HandoffProbs {
  double recruit_before_one = 0.0;
  double recruit_before_two = 0.0;
};

HandoffProbs transition_probs(double failure_rate, double recruit_rate);

// Expected hours until a substation server loses its last worker thread,
// starting from the given redundancy level.  A successful recruitment
// restores full redundancy; failures cascade one thread at a time.
double sojourn_time(JobThreads threads, double failure_rate, double recruit_rate);

struct MonitorState {
  std::string label;       // as written in the element table
  double entry_rate = 0.0; // per hour, from the fully-up state
  double repair_rate = 0.0;
};

// Star-shaped server health model assembled from the component rate table:
// one fully-up hub, degraded-but-operating satellites and outage satellites.
struct MarkovMonitorModel {
  std::vector<MonitorState> degraded_up;  // Up_1..Up_M
  std::vector<MonitorState> down;         // Dn_0..Dn_N
  double base_failure_rate = 0.0;         // lumped two-state failure rate
  double base_repair_rate = 0.0;          // lumped two-state repair rate
};

// Groups rate rows by their state label.  Requires at least one outage state;
// the lumped rates come from the "Dn_b" row when present, otherwise the
// failure rate defaults to the sum of outage entry rates and the repair rate
// to the primary outage repair rate.  A provided lumped failure rate must
// agree with the outage-entry sum within 1% (the table may carry rounded
// values).
MarkovMonitorModel monitor_model_from_elements(std::span<const ElementRate> rows);

// Two-state equivalent of the star model: failure rate = total rate of
// falling into an outage state; repair rate chosen so the two-state model
// reproduces the exact long-run availability.
struct CompositeRates {
  double failure_rate = 0.0;
  double repair_rate = 0.0;
  double up_probability = 0.0;
};

CompositeRates composite_rates(const MarkovMonitorModel& model);

// Chance an intruder exploits a flaw, scaled from its CVSS score.
double exploit_probability(double cvss_score);

struct ExploitStep {
  std::string node_id;
  double exploit_prob = 0.0;        // chance the flaw is attempted
  double success_given_node = 0.0;  // chance of success once attempted
  double joint_prob = 0.0;          // attempt and success together
  double total_success = 0.0;       // running success mass up to this step
};

struct ExploitChain {
  std::vector<ExploitStep> steps;
  bool clipped = false;  // true when the running total had to be capped at 1
};

// Builds the step-by-step exploit ladder along an attack path.  Each node
// multiplies the previous success chance by its own draw from U(0.8, 1).
ExploitChain build_exploit_chain(std::span<const VulnerabilityNode> path,
                                 std::span<const double> success_factors);
ExploitChain build_exploit_chain(std::span<const VulnerabilityNode> path,
                                 Substream& draws);

// Mean hours an intruder needs to take over the chain's target: the sojourn
// times of the traversed nodes weighted by each step's share of the total
// success mass.  Returns kNeverCompromised when the chain has no success
// mass at all.
double substation_compromise_time(const ExploitChain& chain,
                                  const std::map<std::string, double>& sojourn_by_node);

// Pipeline driver: per-host takeover times for every substation and control
// center.  Per-node success factors are drawn once, keyed by node id, so two
// scenarios for the same model and seed share them.
struct CompromiseAnalysis {
  std::map<std::string, double> hours_by_host;
  std::map<std::string, double> sojourn_by_host;
  CompositeRates composite;
  int clipped_chains = 0;
};

CompromiseAnalysis compromise_times(const GridModel& grid,
                                    const AttackGraph& graph,
                                    const ScenarioConfig& scenario,
                                    std::uint64_t seed);

// Deterministic attack path for each host: every ancestor of the host's
// vulnerabilities plus the host's own nodes, in topological order with ties
// broken by node id.
std::map<std::string, std::vector<int>> host_attack_paths(const AttackGraph& graph);

}  // namespace gridins::cps
