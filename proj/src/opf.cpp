#include "gridins/opf.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace gridins::opf {

namespace {

struct VarLayout {
  int n = 0;  // buses
  int m = 0;  // lines
  int theta(int bus) const { return bus; }
  int gen(int bus) const { return n + bus; }
  int cut(int bus) const { return 2 * n + bus; }
  int flow(int line) const { return 3 * n + line; }
  int total() const { return 3 * n + m; }
};

// Lexicographically smallest bus id with usable generation; -1 when dark.
int reference_bus(const GridModel& grid,
                  std::span<const std::uint8_t> bus_generation_on) {
  int ref = -1;
  for (int i = 0; i < static_cast<int>(grid.buses.size()); ++i) {
    if (!bus_generation_on[i] || grid.buses[i].generation_capacity <= 0.0)
      continue;
    if (ref < 0 || grid.buses[i].id < grid.buses[ref].id) ref = i;
  }
  return ref;
}

}  // namespace

lp::Problem curtailment_problem(const GridModel& grid,
                                std::span<const std::uint8_t> bus_generation_on) {
  const int n = static_cast<int>(grid.buses.size());
  const int m = static_cast<int>(grid.lines.size());
  if (static_cast<int>(bus_generation_on.size()) != n)
    throw std::invalid_argument("curtailment: availability length mismatch");
  VarLayout v{n, m};

  lp::Problem p;
  p.num_vars = v.total();
  p.objective.assign(p.num_vars, 0.0);
  p.lower.assign(p.num_vars, 0.0);
  p.upper.assign(p.num_vars, 0.0);

  for (int i = 0; i < n; ++i) {
    p.lower[v.theta(i)] = -lp::kInf;
    p.upper[v.theta(i)] = lp::kInf;
    p.lower[v.gen(i)] = 0.0;
    p.upper[v.gen(i)] =
        bus_generation_on[i] ? grid.buses[i].generation_capacity : 0.0;
    p.lower[v.cut(i)] = 0.0;
    p.upper[v.cut(i)] = grid.buses[i].load_capacity;
    p.objective[v.cut(i)] = 1.0;
  }
  for (int l = 0; l < m; ++l) {
    p.lower[v.flow(l)] = -grid.lines[l].thermal_limit;
    p.upper[v.flow(l)] = grid.lines[l].thermal_limit;
  }

  const int ref = reference_bus(grid, bus_generation_on);
  if (ref >= 0) {
    p.lower[v.theta(ref)] = 0.0;
    p.upper[v.theta(ref)] = 0.0;
  }

  // Nodal balance: outflow - generation - curtailment = -load.
  p.rows.assign(n + m, std::vector<double>(p.num_vars, 0.0));
  p.rhs.assign(n + m, 0.0);
  for (int l = 0; l < m; ++l) {
    const int a = grid.bus_by_id.at(grid.lines[l].from_bus);
    const int b = grid.bus_by_id.at(grid.lines[l].to_bus);
    p.rows[a][v.flow(l)] += 1.0;
    p.rows[b][v.flow(l)] -= 1.0;
  }
  for (int i = 0; i < n; ++i) {
    p.rows[i][v.gen(i)] = -1.0;
    p.rows[i][v.cut(i)] = -1.0;
    p.rhs[i] = -grid.buses[i].load_capacity;
  }
  // Flow definition: flow - susceptance * (angle_from - angle_to) = 0.
  for (int l = 0; l < m; ++l) {
    const int a = grid.bus_by_id.at(grid.lines[l].from_bus);
    const int b = grid.bus_by_id.at(grid.lines[l].to_bus);
    auto& row = p.rows[n + l];
    row[v.flow(l)] = 1.0;
    row[v.theta(a)] = -grid.lines[l].susceptance;
    row[v.theta(b)] = grid.lines[l].susceptance;
  }
  return p;
}

namespace {

DispatchResult dispatch_from_solution(const GridModel& grid,
                                      const lp::Solution& sol) {
  const int n = static_cast<int>(grid.buses.size());
  const int m = static_cast<int>(grid.lines.size());
  VarLayout v{n, m};
  DispatchResult r;
  r.angles.assign(n, 0.0);
  r.generation.assign(n, 0.0);
  r.curtailment.assign(n, 0.0);
  r.flows.assign(m, 0.0);
  for (int i = 0; i < n; ++i) {
    r.angles[i] = sol.x[v.theta(i)];
    r.generation[i] = std::max(0.0, sol.x[v.gen(i)]);
    r.curtailment[i] = std::max(0.0, sol.x[v.cut(i)]);
    r.total_curtailment += r.curtailment[i];
  }
  for (int l = 0; l < m; ++l) r.flows[l] = sol.x[v.flow(l)];

  // Sanity net: the dispatch must satisfy the model to solver tolerance.
  for (int i = 0; i < n; ++i) {
    double net = r.generation[i] + r.curtailment[i] - grid.buses[i].load_capacity;
    for (int l = 0; l < m; ++l) {
      const int a = grid.bus_by_id.at(grid.lines[l].from_bus);
      const int b = grid.bus_by_id.at(grid.lines[l].to_bus);
      if (a == i) net -= r.flows[l];
      if (b == i) net += r.flows[l];
    }
    if (std::abs(net) > 1e-6)
      throw std::runtime_error("curtailment: dispatch violates nodal balance");
  }
  for (int l = 0; l < m; ++l) {
    if (std::abs(r.flows[l]) > grid.lines[l].thermal_limit + 1e-6)
      throw std::runtime_error("curtailment: dispatch violates a thermal limit");
  }
  return r;
}

DispatchResult solve_for_bus_availability(
    const GridModel& grid, std::span<const std::uint8_t> bus_generation_on) {
  const int n = static_cast<int>(grid.buses.size());
  const int ref = reference_bus(grid, bus_generation_on);
  if (ref < 0) {
    // No generation anywhere: full curtailment, flat angles, no flows.
    DispatchResult r;
    r.angles.assign(n, 0.0);
    r.generation.assign(n, 0.0);
    r.curtailment.resize(n);
    r.flows.assign(grid.lines.size(), 0.0);
    for (int i = 0; i < n; ++i) {
      r.curtailment[i] = grid.buses[i].load_capacity;
      r.total_curtailment += r.curtailment[i];
    }
    return r;
  }
  const lp::Problem p = curtailment_problem(grid, bus_generation_on);
  const lp::Solution sol = lp::solve(p);
  if (sol.status != lp::SolveStatus::Optimal)
    throw std::runtime_error(
        sol.status == lp::SolveStatus::Infeasible
            ? "curtailment: solver reported an infeasible dispatch model"
            : "curtailment: solver exceeded its iteration budget");
  return dispatch_from_solution(grid, sol);
}

}  // namespace

DispatchResult solve_curtailment(const GridModel& grid,
                                 const SubstationAvailability& availability) {
  if (availability.substations.size() != availability.on.size())
    throw std::invalid_argument("curtailment: availability vectors mismatch");
  std::vector<std::uint8_t> bus_on(grid.buses.size(), 1);
  std::map<std::string, std::uint8_t> by_sub;
  for (size_t i = 0; i < availability.substations.size(); ++i)
    by_sub[availability.substations[i]] = availability.on[i];
  for (const auto& s : grid.substations) {
    if (by_sub.find(s) == by_sub.end())
      throw std::invalid_argument("curtailment: no availability for substation " + s);
  }
  for (size_t i = 0; i < grid.buses.size(); ++i)
    bus_on[i] = by_sub.at(grid.buses[i].substation_id);
  return solve_for_bus_availability(grid, bus_on);
}

LossSeries run_mcs(const GridModel& grid, const epidemic::StateSequences& seq,
                   const ScenarioConfig& scenario, int workers) {
  (void)scenario;
  const int tg_count = static_cast<int>(grid.tgs.size());
  const int sub_count = static_cast<int>(seq.substations.size());
  const long steps = seq.steps;
  for (const auto& s : grid.substations) {
    if (std::find(seq.substations.begin(), seq.substations.end(), s) ==
        seq.substations.end())
      throw std::invalid_argument("mcs: state sequences missing substation " + s);
  }

  // Bus -> position of its substation in the sequence ordering.
  std::map<std::string, int> sub_pos;
  for (int i = 0; i < sub_count; ++i) sub_pos[seq.substations[i]] = i;
  const int n = static_cast<int>(grid.buses.size());
  std::vector<int> bus_sub(n);
  std::vector<int> bus_tg(n);
  for (int i = 0; i < n; ++i) {
    bus_sub[i] = sub_pos.at(grid.buses[i].substation_id);
    bus_tg[i] = grid.tg_of_substation.at(grid.buses[i].substation_id);
  }

  LossSeries out;
  for (const auto& tg : grid.tgs) out.tg_ids.push_back(tg.id);
  out.steps = steps;
  out.tg_curtailment.assign(static_cast<size_t>(steps) * tg_count, 0.0);
  out.total_curtailment.assign(steps, 0.0);
  out.faulty_count.assign(steps, 0);

  struct CachedDispatch {
    std::vector<double> tg_curtailment;
    double total = 0.0;
  };

  auto run_chunk = [&](long begin, long end) {
    std::unordered_map<std::string, CachedDispatch> cache;
    std::string key(sub_count, '1');
    std::vector<std::uint8_t> bus_on(n, 1);
    for (long step = begin; step < end; ++step) {
      int faulty = 0;
      for (int s = 0; s < sub_count; ++s) {
        const std::uint8_t on = seq.at(s, step);
        key[s] = on ? '1' : '0';
        if (!on) ++faulty;
      }
      out.faulty_count[step] = faulty;
      auto it = cache.find(key);
      if (it == cache.end()) {
        for (int i = 0; i < n; ++i) bus_on[i] = key[bus_sub[i]] == '1';
        DispatchResult d;
        try {
          d = solve_for_bus_availability(grid, bus_on);
        } catch (const std::exception& e) {
          throw std::runtime_error("mcs: step " + std::to_string(step) + ": " +
                                   e.what());
        }
        CachedDispatch c;
        c.tg_curtailment.assign(tg_count, 0.0);
        for (int i = 0; i < n; ++i)
          c.tg_curtailment[bus_tg[i]] += d.curtailment[i];
        c.total = d.total_curtailment;
        it = cache.emplace(key, std::move(c)).first;
      }
      const CachedDispatch& c = it->second;
      for (int t = 0; t < tg_count; ++t)
        out.tg_curtailment[static_cast<size_t>(step) * tg_count + t] =
            c.tg_curtailment[t];
      out.total_curtailment[step] = c.total;
    }
  };

  if (workers <= 1 || steps < 1024) {
    run_chunk(0, steps);
  } else {
    const int nw = static_cast<int>(
        std::min<long>(workers, std::max<long>(1, steps / 512)));
    std::vector<std::thread> pool;
    const long chunk = (steps + nw - 1) / nw;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < nw; ++w) {
      const long begin = w * chunk;
      const long end = std::min(steps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          run_chunk(begin, end);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return out;
}

double elc(const LossSeries& series, std::optional<double> power_base_mw) {
  if (series.steps <= 0) throw std::domain_error("elc: empty series");
  double sum = 0.0;
  for (double v : series.total_curtailment) sum += v;
  const double mean = sum / static_cast<double>(series.steps);
  if (power_base_mw.has_value()) {
    if (!(*power_base_mw > 0.0))
      throw std::domain_error("elc: power base must be > 0");
    return mean / *power_base_mw;
  }
  return mean;
}

double efc(const LossSeries& series) {
  if (series.steps <= 0) throw std::domain_error("efc: empty series");
  double sum = 0.0;
  for (int v : series.faulty_count) sum += v;
  return sum / static_cast<double>(series.steps);
}

LossDistribution monetize(const LossSeries& series, double voll,
                          int steps_per_year) {
  if (!(voll > 0.0)) throw std::domain_error("monetize: voll must be > 0");
  if (steps_per_year <= 0)
    throw std::domain_error("monetize: steps_per_year must be > 0");
  if (series.steps < steps_per_year)
    throw std::domain_error("monetize: horizon shorter than one year");
  const int years = static_cast<int>(series.steps / steps_per_year);
  const int tg_count = static_cast<int>(series.tg_ids.size());

  LossDistribution out;
  out.tg_ids = series.tg_ids;
  out.years = years;
  out.annual_losses.assign(tg_count, std::vector<double>(years, 0.0));
  // One step spans one hour, so MW curtailed contributes MWh one-to-one.
  for (int y = 0; y < years; ++y) {
    const long base = static_cast<long>(y) * steps_per_year;
    for (long s = 0; s < steps_per_year; ++s) {
      for (int t = 0; t < tg_count; ++t)
        out.annual_losses[t][y] += series.tg_at(base + s, t);
    }
  }
  for (int t = 0; t < tg_count; ++t)
    for (int y = 0; y < years; ++y) out.annual_losses[t][y] *= voll;
  return out;
}

}  // namespace gridins::opf
