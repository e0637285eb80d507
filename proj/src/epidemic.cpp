#include "gridins/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace gridins::epidemic {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

}  // namespace

std::vector<double> correlated_uniform_row(double correlation, int dims,
                                           Substream& stream) {
  if (correlation < 0.0 || correlation > 1.0)
    throw std::domain_error("correlated uniforms: correlation outside [0,1]");
  if (dims < 1)
    throw std::domain_error("correlated uniforms: dims must be >= 1");
  const double shared_w = std::sqrt(correlation);
  const double own_w = std::sqrt(1.0 - correlation);
  const double shared = stream.next_normal();
  std::vector<double> row(dims);
  for (int i = 0; i < dims; ++i) {
    const double own = stream.next_normal();
    row[i] = normal_cdf(shared_w * shared + own_w * own);
  }
  return row;
}

std::vector<std::vector<double>> equicorrelated_uniforms(int dims,
                                                         double correlation,
                                                         int rows,
                                                         Substream& stream) {
  if (rows < 0) throw std::domain_error("correlated uniforms: rows must be >= 0");
  std::vector<std::vector<double>> out;
  out.reserve(rows);
  for (int i = 0; i < rows; ++i)
    out.push_back(correlated_uniform_row(correlation, dims, stream));
  return out;
}

std::vector<double> sampled_compromise_times(std::span<const double> base_hours,
                                             std::span<const double> uniforms) {
  if (base_hours.size() != uniforms.size())
    throw std::invalid_argument(
        "sampled compromise times: size mismatch between bases and uniforms");
  std::vector<double> out(base_hours.size());
  for (size_t i = 0; i < base_hours.size(); ++i) out[i] = base_hours[i] * uniforms[i];
  return out;
}

double sample_recovery(int neighbor_count, double reproduction_hours,
                       double coupling, Substream& stream) {
  if (neighbor_count < 0)
    throw std::domain_error("recovery sample: neighbor count must be >= 0");
  if (coupling < 0.0 || coupling > 1.0)
    throw std::domain_error("recovery sample: coupling outside [0,1]");
  int active = 0;
  for (int i = 0; i < neighbor_count; ++i)
    if (stream.next_bernoulli(coupling)) ++active;
  return reproduction_hours * active;
}

double infection_probability(std::span<const double> infection_hours,
                             std::span<const double> recovery_hours) {
  if (infection_hours.empty() || recovery_hours.empty())
    throw std::domain_error("infection probability: empty timing vector");
  double sum = 0.0;
  for (double v : infection_hours) sum += v;
  const double pressure = sum / static_cast<double>(infection_hours.size());
  double recovery = 0.0;
  for (double v : recovery_hours) recovery = std::max(recovery, v);
  if (std::isinf(pressure)) return 0.0;
  const double denom = pressure + recovery;
  if (!(denom > 0.0))
    throw std::domain_error(
        "infection probability: infection and recovery hours are both zero");
  return recovery / denom;
}

namespace {

struct TgGroup {
  std::vector<int> substations;     // host indices
  std::string control_center;
  int cc_host = -1;
};

// Substations of one grid that keep a clean path to the control center.
// `infected` is a bitmask over the grid's own substation positions.
// Depth-first search over the grid's hosts, never stepping onto an infected
// substation.  pos_in_tg maps host index -> member position + 1, 0 when the
// host belongs to another grid, -1 for this grid's control center.
std::vector<char> reachable_in_tg(const std::vector<int>& members, int cc_host,
                                  const std::vector<std::vector<int>>& neighbors,
                                  const std::vector<int>& pos_in_tg,
                                  std::uint64_t infected_mask) {
  std::vector<char> reach(members.size(), 0);
  std::vector<int> stack{cc_host};
  std::vector<char> visited_member(members.size(), 0);
  while (!stack.empty()) {
    int h = stack.back();
    stack.pop_back();
    for (int w : neighbors[h]) {
      const int pos = pos_in_tg[w];
      if (pos == 0) continue;  // outside this grid
      if (pos > 0) {
        const int member_pos = pos - 1;
        if (visited_member[member_pos]) continue;
        if ((infected_mask >> member_pos) & 1ULL) continue;  // blocked
        visited_member[member_pos] = 1;
        reach[member_pos] = 1;
        stack.push_back(w);
      }
      // pos == -1 is the control center itself; it is the start, so skip.
    }
  }
  return reach;
}

}  // namespace

StateSequences generate_state_sequences(
    const GridModel& grid, const AttackGraph& graph,
    const std::map<std::string, double>& compromise_time_by_host,
    const ScenarioConfig& scenario, std::uint64_t seed, int workers) {
  const HostGraph hg = build_host_graph(grid, graph);
  const int host_count = static_cast<int>(hg.hosts.size());
  const int tg_count = static_cast<int>(grid.tgs.size());
  const long steps = scenario.total_steps();
  const EpidemicParams& ep = scenario.epidemic;

  std::vector<double> base_hours(host_count);
  for (int h = 0; h < host_count; ++h) {
    auto it = compromise_time_by_host.find(hg.hosts[h]);
    if (it == compromise_time_by_host.end())
      throw std::invalid_argument("state sampling: no compromise time for host " +
                                  hg.hosts[h]);
    base_hours[h] = it->second;
  }

  std::vector<int> sub_hosts;  // host index of every substation, sorted order
  for (int h = 0; h < host_count; ++h)
    if (hg.is_substation[h]) sub_hosts.push_back(h);
  const int sub_count = static_cast<int>(sub_hosts.size());

  StateSequences seq;
  seq.steps = steps;
  for (int s = 0; s < sub_count; ++s)
    seq.substations.push_back(hg.hosts[sub_hosts[s]]);
  seq.values.assign(static_cast<size_t>(sub_count) * steps, 1);

  // Per-grid membership tables for the gating pass.
  std::vector<TgGroup> groups(tg_count);
  std::vector<int> sub_pos_of_host(host_count, -1);
  for (int s = 0; s < sub_count; ++s) sub_pos_of_host[sub_hosts[s]] = s;
  for (int t = 0; t < tg_count; ++t)
    groups[t].control_center = grid.tgs[t].control_center_id;
  for (int s = 0; s < sub_count; ++s)
    groups[hg.tg_index[sub_hosts[s]]].substations.push_back(sub_hosts[s]);
  for (int h = 0; h < host_count; ++h)
    if (!hg.is_substation[h]) groups[hg.tg_index[h]].cc_host = h;
  // Host -> position inside its grid: member position + 1, -1 for the
  // control center, 0 for hosts of other grids.
  std::vector<std::vector<int>> pos_in_tg(
      tg_count, std::vector<int>(host_count, 0));
  for (int t = 0; t < tg_count; ++t) {
    for (size_t i = 0; i < groups[t].substations.size(); ++i)
      pos_in_tg[t][groups[t].substations[i]] = static_cast<int>(i) + 1;
    if (groups[t].cc_host >= 0) pos_in_tg[t][groups[t].cc_host] = -1;
  }
  for (int t = 0; t < tg_count; ++t) {
    if (groups[t].substations.size() > 64)
      throw std::domain_error(
          "state sampling: a transmission grid with more than 64 substations "
          "is not supported");
  }

  auto run_chunk = [&](long begin, long end) {
    std::vector<double> that_c(host_count);
    std::vector<double> that_r(host_count);
    std::vector<std::unordered_map<std::uint64_t, std::vector<char>>> reach_cache(
        tg_count);
    for (long step = begin; step < end; ++step) {
      Substream copula(seed, "copula-step", static_cast<std::uint64_t>(step));
      const std::vector<double> row =
          correlated_uniform_row(scenario.correlation, tg_count, copula);

      for (int h = 0; h < host_count; ++h) {
        that_c[h] = base_hours[h] * row[hg.tg_index[h]];
        Substream rec(seed, "recovery-step", static_cast<std::uint64_t>(step),
                      static_cast<std::uint64_t>(h));
        that_r[h] = sample_recovery(static_cast<int>(hg.neighbors[h].size()),
                                    ep.reproduction_hours, ep.coupling, rec);
      }

      for (int s = 0; s < sub_count; ++s) {
        const int h = sub_hosts[s];
        double pressure_sum = ep.external_infection_hours;
        double recovery_max = ep.external_recovery_hours;
        for (int j : hg.neighbors[h]) {
          pressure_sum += that_c[j];
          recovery_max = std::max(recovery_max, that_r[j]);
        }
        const double pressure =
            pressure_sum / static_cast<double>(hg.neighbors[h].size() + 1);
        double p_atk;
        if (std::isinf(pressure))
          p_atk = 0.0;
        else
          p_atk = recovery_max / (pressure + recovery_max);
        const double threat = row[hg.tg_index[h]];
        seq.values[static_cast<size_t>(s) * steps + step] =
            threat >= p_atk ? 1 : 0;
      }

      if (!scenario.reachability_gating) continue;

      for (int t = 0; t < tg_count; ++t) {
        const auto& members = groups[t].substations;
        std::uint64_t mask = 0;
        for (size_t i = 0; i < members.size(); ++i) {
          const int s = sub_pos_of_host[members[i]];
          if (seq.values[static_cast<size_t>(s) * steps + step] == 0)
            mask |= 1ULL << i;
        }
        if (mask == 0) continue;
        auto& cache = reach_cache[t];
        auto it = cache.find(mask);
        if (it == cache.end()) {
          it = cache
                   .emplace(mask, reachable_in_tg(members, groups[t].cc_host,
                                                  hg.neighbors, pos_in_tg[t],
                                                  mask))
                   .first;
        }
        const std::vector<char>& reach = it->second;
        for (size_t i = 0; i < members.size(); ++i) {
          if ((mask >> i) & 1ULL) continue;  // already under attack
          if (!reach[i]) {
            const int s = sub_pos_of_host[members[i]];
            seq.values[static_cast<size_t>(s) * steps + step] = 0;
          }
        }
      }
    }
  };

  if (workers <= 1 || steps < 2048) {
    run_chunk(0, steps);
  } else {
    const int n = std::min<long>(workers, std::max<long>(1, steps / 1024));
    std::vector<std::thread> pool;
    const long chunk = (steps + n - 1) / n;
    for (int w = 0; w < n; ++w) {
      const long begin = w * chunk;
      const long end = std::min(steps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_chunk, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  return seq;
}

}  // namespace gridins::epidemic
