#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridins {

// Raised when input text cannot be decoded into the model schema.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a decoded model violates a structural rule; the message names
// the offending entity.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Number of worker threads a substation server dedicates to its control job.
enum class JobThreads { J1 = 1, J2 = 2, J3 = 3 };

enum class AnomalyKind { Rob, Dos, Other };

struct Bus {
  std::string id;
  std::string substation_id;
  double load_capacity = 0.0;        // MW
  double generation_capacity = 0.0;  // MW
};

struct Line {
  std::string from_bus;
  std::string to_bus;
  double susceptance = 0.0;    // MW per radian of angle difference
  double thermal_limit = 0.0;  // MW, symmetric
};

struct TransmissionGrid {
  std::string id;
  std::vector<std::string> substation_ids;
  std::string control_center_id;
};

struct GridModel {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<TransmissionGrid> tgs;

  // Lookup tables built by finalize().
  std::map<std::string, int> bus_by_id;
  std::map<std::string, int> tg_by_id;
  std::map<std::string, int> tg_of_substation;     // substation -> tg index
  std::map<std::string, int> tg_of_control_center; // cc -> tg index
  std::vector<std::string> substations;            // sorted, unique
  std::map<std::string, std::vector<int>> buses_of_substation;

  double total_load() const;
  double total_generation() const;

  // Builds lookups and checks structural rules; throws ValidationError.
  void finalize();
};

struct VulnerabilityNode {
  std::string id;
  std::string host_id;  // substation or control center the flaw lives on
  double cvss_score = 0.0;
  AnomalyKind anomaly_kind = AnomalyKind::Other;
};

struct AttackGraph {
  std::vector<VulnerabilityNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // from -> to
  std::vector<std::string> entry_nodes;

  // Lookup tables built by finalize().
  std::map<std::string, int> node_by_id;
  std::vector<std::vector<int>> successors;
  std::vector<std::vector<int>> predecessors;

  // Validates host references, acyclicity, entry nodes and coverage.
  void finalize(const GridModel& grid);
};

// Two-state epidemic timing parameters shared by every substation.
struct EpidemicParams {
  double reproduction_hours = 2.0;         // recovery hours per coupled neighbor
  double coupling = 0.8;                   // chance a neighbor link is active
  double external_infection_hours = 2000.0;  // background threat entry
  double external_recovery_hours = 4.0;      // background cleanup floor
};

// One row of the component reliability table for the monitored server.
// `state` labels the composite state the component drives the server into
// when it fails: "Dn_0".."Dn_N" are outage states, "Up_1".."Up_M" are
// degraded-but-operating states, and "Dn_b" carries the lumped two-state
// rates used when smart monitoring is disabled.
struct ElementRate {
  std::string element;
  double failure_rate = 0.0;  // per hour
  double repair_rate = 0.0;   // per hour
  std::string state;
};

struct ScenarioConfig {
  JobThreads default_job_threads = JobThreads::J1;
  std::map<std::string, JobThreads> job_threads_overrides;  // by host id
  bool default_smart_monitoring = false;
  std::map<std::string, bool> smart_monitoring_overrides;   // by host id
  double correlation = 0.0;  // cross-grid threat correlation in [0,1]
  double risk_level = 0.1;   // tail level for risk measures, in (0,1)
  EpidemicParams epidemic;
  int horizon_years = 1;
  int steps_per_year = 8760;
  double voll = 10000.0;  // value of lost load, currency per MWh
  std::optional<std::int64_t> seed;
  bool reachability_gating = true;
  std::vector<ElementRate> elements;
  std::optional<double> power_base_mw;  // when set, reliability is per-unit

  JobThreads job_threads_for(const std::string& host) const;
  bool smart_monitoring_for(const std::string& host) const;
  long total_steps() const {
    return static_cast<long>(horizon_years) * steps_per_year;
  }

  void validate(const GridModel& grid) const;  // throws ValidationError
};

struct LoadedModel {
  GridModel grid;
  AttackGraph attack_graph;
  ScenarioConfig scenario;
};

// Decodes and validates a JSON model document.
LoadedModel load_model(const std::string& text);
LoadedModel load_model_file(const std::string& path);

// Canonical JSON encoding; load_model(serialize_model(m)) reproduces m.
std::string serialize_model(const LoadedModel& model);

// Maps each transmission grid id to the set of buses it operates; the sets
// partition the bus set.
std::map<std::string, std::set<std::string>> partition_by_tg(const GridModel& grid);

// Substations of `tg` that can still reach their control center over hosts
// that are not infected.  No infection means no blockage, so the full
// substation set comes back; an infected control center blocks everything.
// Traversal stays within the grid's own hosts.
std::set<std::string> good_route_reachable(const AttackGraph& graph,
                                           const TransmissionGrid& tg,
                                           const std::set<std::string>& infected);

// Cyber topology collapsed to hosts (substations and control centers).
struct HostGraph {
  std::vector<std::string> hosts;  // substations first, then control centers
  std::map<std::string, int> index;
  std::vector<std::vector<int>> neighbors;  // undirected, deduplicated
  std::vector<int> tg_index;
  std::vector<char> is_substation;
};

HostGraph build_host_graph(const GridModel& grid, const AttackGraph& graph);

std::string to_string(JobThreads t);
std::string to_string(AnomalyKind k);

}  // namespace gridins
