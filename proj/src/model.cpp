#include "gridins/model.hpp"

#include <algorithm>
#include <queue>

namespace gridins {

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

double GridModel::total_load() const {
  double sum = 0.0;
  for (const auto& b : buses) sum += b.load_capacity;
  return sum;
}

double GridModel::total_generation() const {
  double sum = 0.0;
  for (const auto& b : buses) sum += b.generation_capacity;
  return sum;
}

void GridModel::finalize() {
  bus_by_id.clear();
  tg_by_id.clear();
  tg_of_substation.clear();
  tg_of_control_center.clear();
  substations.clear();
  buses_of_substation.clear();

  check(!buses.empty(), "grid: at least one bus is required");
  check(!tgs.empty(), "grid: at least one transmission grid is required");

  for (int i = 0; i < static_cast<int>(buses.size()); ++i) {
    const Bus& b = buses[i];
    check(!b.id.empty(), "bus #" + std::to_string(i) + ": empty id");
    check(bus_by_id.emplace(b.id, i).second, "bus " + b.id + ": duplicate id");
    check(!b.substation_id.empty(), "bus " + b.id + ": empty substation_id");
    check(b.load_capacity >= 0.0,
          "bus " + b.id + ": load_capacity must be >= 0");
    check(b.generation_capacity >= 0.0,
          "bus " + b.id + ": generation_capacity must be >= 0");
  }

  for (int t = 0; t < static_cast<int>(tgs.size()); ++t) {
    const TransmissionGrid& tg = tgs[t];
    check(!tg.id.empty(), "transmission grid #" + std::to_string(t) + ": empty id");
    check(tg_by_id.emplace(tg.id, t).second,
          "transmission grid " + tg.id + ": duplicate id");
    check(!tg.substation_ids.empty(),
          "transmission grid " + tg.id + ": needs at least one substation");
    check(!tg.control_center_id.empty(),
          "transmission grid " + tg.id + ": empty control_center_id");
    for (const auto& s : tg.substation_ids) {
      check(tg_of_substation.emplace(s, t).second,
            "substation " + s + ": listed under more than one transmission grid");
    }
    check(tg_of_substation.find(tg.control_center_id) == tg_of_substation.end(),
          "transmission grid " + tg.id +
              ": control center id collides with a substation id");
    check(tg_of_control_center.emplace(tg.control_center_id, t).second,
          "control center " + tg.control_center_id +
              ": shared by more than one transmission grid");
  }

  for (const auto& [sub, tg] : tg_of_substation) {
    (void)tg;
    substations.push_back(sub);
  }

  for (int i = 0; i < static_cast<int>(buses.size()); ++i) {
    const Bus& b = buses[i];
    check(tg_of_substation.count(b.substation_id) > 0,
          "bus " + b.id + ": substation " + b.substation_id +
              " is not operated by any transmission grid");
    buses_of_substation[b.substation_id].push_back(i);
  }

  for (int l = 0; l < static_cast<int>(lines.size()); ++l) {
    const Line& ln = lines[l];
    const std::string name =
        "line #" + std::to_string(l) + " (" + ln.from_bus + "-" + ln.to_bus + ")";
    check(bus_by_id.count(ln.from_bus) > 0,
          name + ": references absent bus " + ln.from_bus);
    check(bus_by_id.count(ln.to_bus) > 0,
          name + ": references absent bus " + ln.to_bus);
    check(ln.from_bus != ln.to_bus, name + ": self-loop is not allowed");
    check(ln.susceptance > 0.0, name + ": susceptance must be > 0");
    check(ln.thermal_limit > 0.0, name + ": thermal_limit must be > 0");
  }

  // The electrical graph must be connected so that one angle reference pins
  // the whole network.
  std::vector<std::vector<int>> adj(buses.size());
  for (const auto& ln : lines) {
    int a = bus_by_id[ln.from_bus];
    int b = bus_by_id[ln.to_bus];
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(buses.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  check(reached == static_cast<int>(buses.size()),
        "grid: the bus graph is not connected");
}

void AttackGraph::finalize(const GridModel& grid) {
  node_by_id.clear();
  successors.assign(nodes.size(), {});
  predecessors.assign(nodes.size(), {});

  check(!nodes.empty(), "attack graph: at least one vulnerability is required");

  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    const VulnerabilityNode& n = nodes[i];
    check(!n.id.empty(), "vulnerability #" + std::to_string(i) + ": empty id");
    check(node_by_id.emplace(n.id, i).second,
          "vulnerability " + n.id + ": duplicate id");
    check(n.cvss_score >= 0.0 && n.cvss_score <= 10.0,
          "vulnerability " + n.id + ": cvss_score " +
              std::to_string(n.cvss_score) + " outside [0,10]");
    const bool on_substation = grid.tg_of_substation.count(n.host_id) > 0;
    const bool on_control_center = grid.tg_of_control_center.count(n.host_id) > 0;
    check(on_substation || on_control_center,
          "vulnerability " + n.id + ": host " + n.host_id +
              " is neither a substation nor a control center");
  }

  for (const auto& [from, to] : edges) {
    check(node_by_id.count(from) > 0,
          "attack edge " + from + "->" + to + ": unknown vulnerability " + from);
    check(node_by_id.count(to) > 0,
          "attack edge " + from + "->" + to + ": unknown vulnerability " + to);
    check(from != to, "attack edge " + from + "->" + to + ": self-loop");
    successors[node_by_id[from]].push_back(node_by_id[to]);
    predecessors[node_by_id[to]].push_back(node_by_id[from]);
  }

  // Acyclicity via Kahn's algorithm.
  {
    std::vector<int> indegree(nodes.size(), 0);
    for (int v = 0; v < static_cast<int>(nodes.size()); ++v)
      indegree[v] = static_cast<int>(predecessors[v].size());
    std::queue<int> ready;
    for (int v = 0; v < static_cast<int>(nodes.size()); ++v)
      if (indegree[v] == 0) ready.push(v);
    int emitted = 0;
    while (!ready.empty()) {
      int v = ready.front();
      ready.pop();
      ++emitted;
      for (int w : successors[v])
        if (--indegree[w] == 0) ready.push(w);
    }
    check(emitted == static_cast<int>(nodes.size()),
          "attack graph: contains a cycle");
  }

  check(!entry_nodes.empty(), "attack graph: entry_nodes must not be empty");
  for (const auto& e : entry_nodes) {
    check(node_by_id.count(e) > 0,
          "attack graph: entry node " + e + " is not a vulnerability");
    check(predecessors[node_by_id.at(e)].empty(),
          "attack graph: entry node " + e + " has incoming edges");
  }

  // Every substation must expose at least one vulnerability so a compromise
  // time is defined for it.
  std::set<std::string> covered;
  for (const auto& n : nodes) covered.insert(n.host_id);
  for (const auto& s : grid.substations) {
    check(covered.count(s) > 0,
          "substation " + s + ": hosts no vulnerability node");
  }
}

JobThreads ScenarioConfig::job_threads_for(const std::string& host) const {
  auto it = job_threads_overrides.find(host);
  return it == job_threads_overrides.end() ? default_job_threads : it->second;
}

bool ScenarioConfig::smart_monitoring_for(const std::string& host) const {
  auto it = smart_monitoring_overrides.find(host);
  return it == smart_monitoring_overrides.end() ? default_smart_monitoring
                                                : it->second;
}

void ScenarioConfig::validate(const GridModel& grid) const {
  check(correlation >= 0.0 && correlation <= 1.0,
        "scenario: correlation must lie in [0,1]");
  check(risk_level > 0.0 && risk_level < 1.0,
        "scenario: risk_level must lie in (0,1)");
  check(horizon_years >= 1, "scenario: horizon_years must be >= 1");
  check(steps_per_year >= 1, "scenario: steps_per_year must be >= 1");
  check(voll >= 0.0, "scenario: voll must be >= 0");
  check(epidemic.reproduction_hours >= 0.0,
        "scenario: epidemic.epsilon must be >= 0");
  check(epidemic.coupling >= 0.0 && epidemic.coupling <= 1.0,
        "scenario: epidemic.c must lie in [0,1]");
  check(epidemic.external_infection_hours > 0.0,
        "scenario: epidemic.z_epi must be > 0");
  check(epidemic.external_recovery_hours > 0.0,
        "scenario: epidemic.r_epi must be > 0");
  if (power_base_mw.has_value())
    check(*power_base_mw > 0.0, "scenario: power_base_mw must be > 0");

  auto known_host = [&](const std::string& h) {
    return grid.tg_of_substation.count(h) > 0 ||
           grid.tg_of_control_center.count(h) > 0;
  };
  for (const auto& [host, t] : job_threads_overrides) {
    (void)t;
    check(known_host(host),
          "scenario: job_threads override names unknown host " + host);
  }
  for (const auto& [host, f] : smart_monitoring_overrides) {
    (void)f;
    check(known_host(host),
          "scenario: smart_monitoring override names unknown host " + host);
  }
  for (const auto& row : elements) {
    check(!row.element.empty(), "scenario: element row with empty name");
    check(row.failure_rate > 0.0,
          "element " + row.element + ": lambda must be > 0");
    check(row.repair_rate > 0.0, "element " + row.element + ": mu must be > 0");
  }
}

std::map<std::string, std::set<std::string>> partition_by_tg(const GridModel& grid) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& tg : grid.tgs) out[tg.id];
  for (const auto& b : grid.buses) {
    const int t = grid.tg_of_substation.at(b.substation_id);
    out[grid.tgs[t].id].insert(b.id);
  }
  return out;
}

HostGraph build_host_graph(const GridModel& grid, const AttackGraph& graph) {
  HostGraph hg;
  for (const auto& s : grid.substations) {
    hg.index.emplace(s, static_cast<int>(hg.hosts.size()));
    hg.hosts.push_back(s);
    hg.tg_index.push_back(grid.tg_of_substation.at(s));
    hg.is_substation.push_back(1);
  }
  std::vector<std::string> ccs;
  for (const auto& [cc, t] : grid.tg_of_control_center) {
    (void)t;
    ccs.push_back(cc);
  }
  std::sort(ccs.begin(), ccs.end());
  for (const auto& cc : ccs) {
    hg.index.emplace(cc, static_cast<int>(hg.hosts.size()));
    hg.hosts.push_back(cc);
    hg.tg_index.push_back(grid.tg_of_control_center.at(cc));
    hg.is_substation.push_back(0);
  }

  std::vector<std::set<int>> nbr(hg.hosts.size());
  for (const auto& [from, to] : graph.edges) {
    const auto& a = graph.nodes[graph.node_by_id.at(from)].host_id;
    const auto& b = graph.nodes[graph.node_by_id.at(to)].host_id;
    if (a == b) continue;
    int ia = hg.index.at(a);
    int ib = hg.index.at(b);
    nbr[ia].insert(ib);
    nbr[ib].insert(ia);
  }
  hg.neighbors.resize(hg.hosts.size());
  for (size_t i = 0; i < nbr.size(); ++i)
    hg.neighbors[i].assign(nbr[i].begin(), nbr[i].end());
  return hg;
}

std::set<std::string> good_route_reachable(const AttackGraph& graph,
                                           const TransmissionGrid& tg,
                                           const std::set<std::string>& infected) {
  std::set<std::string> members(tg.substation_ids.begin(), tg.substation_ids.end());
  for (const auto& bad : infected) {
    if (members.count(bad) == 0 && bad != tg.control_center_id)
      throw std::domain_error("good_route_reachable: " + bad +
                              " is not a host of " + tg.id);
  }
  if (infected.count(tg.control_center_id)) return {};
  if (infected.empty()) return members;  // no infection, no blockage

  // Host-level undirected adjacency restricted to this grid's hosts.
  std::map<std::string, std::set<std::string>> adj;
  auto in_tg = [&](const std::string& h) {
    return members.count(h) > 0 || h == tg.control_center_id;
  };
  for (const auto& [from, to] : graph.edges) {
    const auto& a = graph.nodes[graph.node_by_id.at(from)].host_id;
    const auto& b = graph.nodes[graph.node_by_id.at(to)].host_id;
    if (a == b || !in_tg(a) || !in_tg(b)) continue;
    adj[a].insert(b);
    adj[b].insert(a);
  }

  std::set<std::string> reached;
  std::vector<std::string> stack{tg.control_center_id};
  std::set<std::string> visited{tg.control_center_id};
  while (!stack.empty()) {
    std::string h = stack.back();
    stack.pop_back();
    for (const auto& w : adj[h]) {
      if (visited.count(w) || infected.count(w)) continue;
      visited.insert(w);
      if (members.count(w)) reached.insert(w);
      stack.push_back(w);
    }
  }
  return reached;
}

std::string to_string(JobThreads t) {
  switch (t) {
    case JobThreads::J1: return "J1";
    case JobThreads::J2: return "J2";
    case JobThreads::J3: return "J3";
  }
  return "J1";
}

std::string to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::Rob: return "ROB";
    case AnomalyKind::Dos: return "DoS";
    case AnomalyKind::Other: return "other";
  }
  return "other";
}

}  // namespace gridins
