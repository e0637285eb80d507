#include "gridins/cps.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace gridins::cps {

namespace {

void require_rates(double failure_rate, double recruit_rate) {
  if (!(failure_rate > 0.0))
    throw std::domain_error("job model: failure rate must be > 0");
  if (!(recruit_rate >= 0.0))
    throw std::domain_error("job model: recruitment rate must be >= 0");
}

}  // namespace

HandoffProbs transition_probs(double failure_rate, double recruit_rate) {
  require_rates(failure_rate, recruit_rate);
  HandoffProbs p;
  p.recruit_before_one = recruit_rate / (recruit_rate + failure_rate);
  p.recruit_before_two = recruit_rate / (recruit_rate + 2.0 * failure_rate);
  return p;
}

double sojourn_time(JobThreads threads, double failure_rate, double recruit_rate) {
  require_rates(failure_rate, recruit_rate);
  const HandoffProbs p = transition_probs(failure_rate, recruit_rate);
  const double stage1 = 1.0 / failure_rate;
  if (threads == JobThreads::J1) return stage1;
  const double stage2 =
      1.0 / (2.0 * failure_rate * (1.0 - p.recruit_before_one));
  if (threads == JobThreads::J2) return stage1 + stage2;
  const double stage3 = 1.0 / (3.0 * failure_rate *
                               (1.0 - p.recruit_before_one) *
                               (1.0 - p.recruit_before_two));
  return stage1 + stage2 + stage3;
}

MarkovMonitorModel monitor_model_from_elements(std::span<const ElementRate> rows) {
  MarkovMonitorModel m;
  bool have_lumped = false;
  bool have_primary_down = false;
  for (const auto& row : rows) {
    if (!(row.failure_rate > 0.0) || !(row.repair_rate > 0.0))
      throw ValidationError("element " + row.element +
                            ": rates must be positive");
    if (row.state == "Dn_b") {
      if (have_lumped)
        throw ValidationError("element table: more than one Dn_b row");
      have_lumped = true;
      m.base_failure_rate = row.failure_rate;
      m.base_repair_rate = row.repair_rate;
      continue;
    }
    MonitorState st{row.element, row.failure_rate, row.repair_rate};
    if (row.state.rfind("Up_", 0) == 0) {
      m.degraded_up.push_back(std::move(st));
    } else if (row.state.rfind("Dn_", 0) == 0) {
      if (row.state == "Dn_0") {
        if (have_primary_down)
          throw ValidationError("element table: more than one Dn_0 row");
        have_primary_down = true;
        m.down.insert(m.down.begin(), std::move(st));
      } else {
        m.down.push_back(std::move(st));
      }
    } else {
      throw ValidationError("element " + row.element + ": state label '" +
                            row.state + "' must start with Up_ or Dn_");
    }
  }
  if (m.down.empty())
    throw ValidationError("element table: needs at least one outage (Dn_*) state");
  if (!have_primary_down)
    throw ValidationError("element table: missing the Dn_0 row");

  double entry_sum = 0.0;
  for (const auto& st : m.down) entry_sum += st.entry_rate;
  for (const auto& st : m.degraded_up) entry_sum += st.entry_rate;
  if (have_lumped) {
    // Published tables round their lumped rate, so allow 1% slack.
    const double rel = std::abs(m.base_failure_rate - entry_sum) / entry_sum;
    if (rel > 0.01)
      throw ValidationError(
          "element table: lumped failure rate disagrees with the total entry "
          "rate sum by more than 1%");
    for (size_t i = 1; i < m.down.size(); ++i) {
      if (m.base_repair_rate > m.down[i].repair_rate * (1.0 + 1e-12))
        throw ValidationError("element " + m.down[i].label +
                              ": outage repair rate below the lumped repair rate");
    }
  } else {
    m.base_failure_rate = entry_sum;
    m.base_repair_rate = m.down.front().repair_rate;
  }
  return m;
}

CompositeRates composite_rates(const MarkovMonitorModel& model) {
  if (model.down.empty())
    throw std::domain_error("composite rates: no outage state");

  // Degenerate star: no degraded states and a single outage state is already
  // a two-state model, so return its rates untouched.
  if (model.degraded_up.empty() && model.down.size() == 1) {
    CompositeRates r;
    r.failure_rate = model.down.front().entry_rate;
    r.repair_rate = model.down.front().repair_rate;
    r.up_probability = r.repair_rate / (r.repair_rate + r.failure_rate);
    return r;
  }

  // In the star model every satellite state i holds stationary probability
  // proportional to entry_rate_i / repair_rate_i relative to the hub.
  double up_weight = 1.0;  // the hub
  for (const auto& st : model.degraded_up)
    up_weight += st.entry_rate / st.repair_rate;
  double down_weight = 0.0;
  for (const auto& st : model.down)
    down_weight += st.entry_rate / st.repair_rate;

  CompositeRates r;
  for (const auto& st : model.down) r.failure_rate += st.entry_rate;
  r.up_probability = up_weight / (up_weight + down_weight);
  // Repair rate that makes the two-state chain match the availability:
  // failure_rate * p_up = repair_rate * (1 - p_up).
  r.repair_rate = r.failure_rate * up_weight / down_weight;
  return r;
}

double exploit_probability(double cvss_score) {
  if (cvss_score < 0.0 || cvss_score > 10.0)
    throw std::domain_error("exploit probability: cvss score outside [0,10]");
  return cvss_score / 10.0;
}

ExploitChain build_exploit_chain(std::span<const VulnerabilityNode> path,
                                 std::span<const double> success_factors) {
  if (success_factors.size() != path.size())
    throw std::invalid_argument(
        "exploit chain: one success factor per node is required");
  ExploitChain chain;
  chain.steps.reserve(path.size());
  double conditional = 1.0;
  double total = 0.0;
  for (size_t h = 0; h < path.size(); ++h) {
    const double u = success_factors[h];
    if (!(u >= 0.0 && u <= 1.0))
      throw std::domain_error("exploit chain: success factor outside [0,1]");
    ExploitStep step;
    step.node_id = path[h].id;
    step.exploit_prob = exploit_probability(path[h].cvss_score);
    conditional *= u;
    step.success_given_node = conditional;
    step.joint_prob = step.exploit_prob * step.success_given_node;
    total += step.joint_prob;
    if (total > 1.0) {
      total = 1.0;
      chain.clipped = true;
    }
    step.total_success = total;
    chain.steps.push_back(std::move(step));
  }
  return chain;
}

ExploitChain build_exploit_chain(std::span<const VulnerabilityNode> path,
                                 Substream& draws) {
  std::vector<double> factors(path.size());
  for (auto& u : factors) u = 0.8 + 0.2 * draws.next_uniform();
  return build_exploit_chain(path, factors);
}

double substation_compromise_time(const ExploitChain& chain,
                                  const std::map<std::string, double>& sojourn_by_node) {
  double weighted = 0.0;
  double mass = 0.0;
  for (const auto& step : chain.steps) {
    auto it = sojourn_by_node.find(step.node_id);
    if (it == sojourn_by_node.end())
      throw std::invalid_argument("compromise time: no sojourn time for node " +
                                  step.node_id);
    weighted += it->second * step.joint_prob;
    mass += step.joint_prob;
  }
  if (mass <= 0.0) return kNeverCompromised;
  return weighted / mass;
}

std::map<std::string, std::vector<int>> host_attack_paths(const AttackGraph& graph) {
  const int n = static_cast<int>(graph.nodes.size());

  // Topological order with deterministic (node id) tie-breaking.
  std::vector<int> order;
  order.reserve(n);
  {
    std::vector<int> indegree(n, 0);
    for (int v = 0; v < n; ++v)
      indegree[v] = static_cast<int>(graph.predecessors[v].size());
    auto by_id = [&](int a, int b) { return graph.nodes[a].id > graph.nodes[b].id; };
    std::priority_queue<int, std::vector<int>, decltype(by_id)> ready(by_id);
    for (int v = 0; v < n; ++v)
      if (indegree[v] == 0) ready.push(v);
    while (!ready.empty()) {
      int v = ready.top();
      ready.pop();
      order.push_back(v);
      for (int w : graph.successors[v])
        if (--indegree[w] == 0) ready.push(w);
    }
  }
  std::vector<int> rank(n, 0);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;

  // Ancestor closure per node, then merged per host.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int idx : order) {
    reach[idx][idx] = 1;
    for (int p : graph.predecessors[idx])
      for (int a = 0; a < n; ++a)
        if (reach[p][a]) reach[idx][a] = 1;
  }

  std::map<std::string, std::vector<int>> paths;
  for (int v = 0; v < n; ++v) {
    auto& merged = paths[graph.nodes[v].host_id];
    std::vector<char> member(n, 0);
    for (int a : merged) member[a] = 1;
    for (int a = 0; a < n; ++a)
      if (reach[v][a] && !member[a]) merged.push_back(a);
  }
  for (auto& [host, path] : paths) {
    (void)host;
    std::sort(path.begin(), path.end(),
              [&](int a, int b) { return rank[a] < rank[b]; });
  }
  return paths;
}

CompromiseAnalysis compromise_times(const GridModel& grid,
                                    const AttackGraph& graph,
                                    const ScenarioConfig& scenario,
                                    std::uint64_t seed) {
  CompromiseAnalysis out;
  const MarkovMonitorModel monitor =
      monitor_model_from_elements(scenario.elements);
  out.composite = composite_rates(monitor);

  // Per-host sojourn time of the server's job chain under the host's own
  // monitoring mode and thread redundancy.
  std::vector<std::string> hosts = grid.substations;
  for (const auto& [cc, t] : grid.tg_of_control_center) {
    (void)t;
    hosts.push_back(cc);
  }
  for (const auto& h : hosts) {
    const bool monitored = scenario.smart_monitoring_for(h);
    const double f =
        monitored ? out.composite.failure_rate : monitor.base_failure_rate;
    const double g =
        monitored ? out.composite.repair_rate : monitor.base_repair_rate;
    out.sojourn_by_host[h] = sojourn_time(scenario.job_threads_for(h), f, g);
  }

  // One success factor per vulnerability, keyed by node id so every scenario
  // sharing the seed sees identical draws.
  std::vector<double> factor(graph.nodes.size());
  for (size_t v = 0; v < graph.nodes.size(); ++v) {
    Substream stream(seed, "chain-success", fnv1a64(graph.nodes[v].id));
    factor[v] = 0.8 + 0.2 * stream.next_uniform();
  }

  std::map<std::string, double> sojourn_by_node;
  for (const auto& n : graph.nodes)
    sojourn_by_node[n.id] = out.sojourn_by_host.at(n.host_id);

  const auto paths = host_attack_paths(graph);
  for (const auto& h : hosts) {
    auto it = paths.find(h);
    if (it == paths.end()) {
      out.hours_by_host[h] = kNeverCompromised;
      continue;
    }
    std::vector<VulnerabilityNode> path;
    std::vector<double> factors;
    path.reserve(it->second.size());
    for (int v : it->second) {
      path.push_back(graph.nodes[v]);
      factors.push_back(factor[v]);
    }
    ExploitChain chain = build_exploit_chain(path, factors);
    if (chain.clipped) ++out.clipped_chains;
    out.hours_by_host[h] = substation_compromise_time(chain, sojourn_by_node);
  }
  return out;
}

}  // namespace gridins::cps
