#include "gridins/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridins::lp {

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr double kDegenerateStep = 1e-11;

enum class VarState { Basic, AtLower, AtUpper, FreeAtZero };

struct Tableau {
  int n = 0;       // structural variables
  int m = 0;       // rows (= artificial variables)
  int total = 0;   // n + m
  std::vector<std::vector<double>> t;  // m x total, equals B^-1 * A
  std::vector<double> x;               // current value of every variable
  std::vector<double> lo, hi;
  std::vector<VarState> state;
  std::vector<int> basis;  // variable index of each row's basic variable
};

double reduced_cost(const Tableau& tab, const std::vector<double>& cost, int j) {
  double d = cost[j];
  for (int i = 0; i < tab.m; ++i) {
    const double tij = tab.t[i][j];
    if (tij != 0.0) d -= cost[tab.basis[i]] * tij;
  }
  return d;
}

// Runs the simplex loop for the given cost vector.  Returns false when the
// iteration cap is exceeded.
bool iterate(Tableau& tab, const std::vector<double>& cost, long max_iters) {
  bool bland = false;
  long degenerate_streak = 0;
  for (long iter = 0; iter < max_iters; ++iter) {
    // Entering variable: a nonbasic variable whose movement direction
    // improves the objective.
    int enter = -1;
    int dir = 0;
    double best_violation = kCostTol;
    for (int j = 0; j < tab.total; ++j) {
      const VarState st = tab.state[j];
      if (st == VarState::Basic) continue;
      if (tab.lo[j] == tab.hi[j]) continue;  // pinned
      const double d = reduced_cost(tab, cost, j);
      int cand_dir = 0;
      double violation = 0.0;
      if ((st == VarState::AtLower || st == VarState::FreeAtZero) &&
          d < -kCostTol) {
        cand_dir = +1;
        violation = -d;
      } else if ((st == VarState::AtUpper || st == VarState::FreeAtZero) &&
                 d > kCostTol) {
        cand_dir = -1;
        violation = d;
      }
      if (cand_dir == 0) continue;
      if (bland) {
        enter = j;
        dir = cand_dir;
        break;  // lowest index wins
      }
      if (violation > best_violation) {
        best_violation = violation;
        enter = j;
        dir = cand_dir;
      }
    }
    if (enter < 0) return true;  // optimal for this cost vector

    // Ratio test: how far can x[enter] move before a bound is hit.
    double t_basic = kInf;
    int leave_row = -1;
    double best_pivot = 0.0;
    for (int i = 0; i < tab.m; ++i) {
      const double tie = tab.t[i][enter];
      if (std::abs(tie) <= kPivotTol) continue;
      const double g = -static_cast<double>(dir) * tie;  // d x_basic / d t
      const int bvar = tab.basis[i];
      double room;
      if (g > 0.0)
        room = std::isfinite(tab.hi[bvar]) ? (tab.hi[bvar] - tab.x[bvar]) / g
                                           : kInf;
      else
        room = std::isfinite(tab.lo[bvar]) ? (tab.x[bvar] - tab.lo[bvar]) / (-g)
                                           : kInf;
      if (room < 0.0) room = 0.0;  // tiny infeasibility from roundoff
      if (room < t_basic - 1e-12) {
        t_basic = room;
        leave_row = i;
        best_pivot = std::abs(tie);
      } else if (room <= t_basic + 1e-12 && leave_row >= 0) {
        // Tie: Bland's rule picks the lowest variable index, the default
        // picks the numerically strongest pivot.
        const bool take = bland ? tab.basis[i] < tab.basis[leave_row]
                                : std::abs(tie) > best_pivot;
        if (take) {
          t_basic = std::min(t_basic, room);
          leave_row = i;
          best_pivot = std::abs(tie);
        }
      }
    }
    // The entering variable's own opposite bound also limits the move.
    double t_own = kInf;
    if (std::isfinite(tab.lo[enter]) && std::isfinite(tab.hi[enter]))
      t_own = tab.hi[enter] - tab.lo[enter];
    const double t_limit = std::min(t_own, t_basic);
    if (!std::isfinite(t_limit)) return false;  // unbounded direction
    if (t_basic > t_own) leave_row = -1;        // bound flip wins

    if (t_limit <= kDegenerateStep) {
      if (++degenerate_streak > 64) bland = true;
    } else {
      degenerate_streak = 0;
    }

    // Move the solution.
    const double step = t_limit * dir;
    if (t_limit > 0.0) {
      for (int i = 0; i < tab.m; ++i) {
        const double tie = tab.t[i][enter];
        if (tie != 0.0) tab.x[tab.basis[i]] -= step * tie;
      }
      tab.x[enter] += step;
    }

    if (leave_row < 0) {
      // Bound flip: the entering variable traverses its whole range.
      tab.state[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      tab.x[enter] = dir > 0 ? tab.hi[enter] : tab.lo[enter];
      continue;
    }

    // Pivot: entering replaces the leaving basic variable.
    const int leave_var = tab.basis[leave_row];
    const double g = -static_cast<double>(dir) * tab.t[leave_row][enter];
    if (g > 0.0) {
      tab.state[leave_var] = VarState::AtUpper;
      tab.x[leave_var] = tab.hi[leave_var];
    } else {
      tab.state[leave_var] = VarState::AtLower;
      tab.x[leave_var] = tab.lo[leave_var];
    }

    const double pivot = tab.t[leave_row][enter];
    auto& prow = tab.t[leave_row];
    const double inv = 1.0 / pivot;
    for (int j = 0; j < tab.total; ++j) prow[j] *= inv;
    prow[enter] = 1.0;  // cancel roundoff
    for (int i = 0; i < tab.m; ++i) {
      if (i == leave_row) continue;
      const double factor = tab.t[i][enter];
      if (factor == 0.0) continue;
      auto& row = tab.t[i];
      for (int j = 0; j < tab.total; ++j) row[j] -= factor * prow[j];
      row[enter] = 0.0;
    }
    tab.basis[leave_row] = enter;
    tab.state[enter] = VarState::Basic;
  }
  return false;
}

}  // namespace

Solution solve(const Problem& p) {
  const int n = p.num_vars;
  const int m = static_cast<int>(p.rows.size());
  if (static_cast<int>(p.objective.size()) != n ||
      static_cast<int>(p.lower.size()) != n ||
      static_cast<int>(p.upper.size()) != n ||
      static_cast<int>(p.rhs.size()) != m)
    throw std::invalid_argument("lp: inconsistent problem dimensions");
  for (int j = 0; j < n; ++j)
    if (p.lower[j] > p.upper[j])
      throw std::invalid_argument("lp: empty variable range");

  Tableau tab;
  tab.n = n;
  tab.m = m;
  tab.total = n + m;
  tab.x.assign(tab.total, 0.0);
  tab.lo.assign(tab.total, 0.0);
  tab.hi.assign(tab.total, 0.0);
  tab.state.assign(tab.total, VarState::AtLower);
  tab.basis.resize(m);

  for (int j = 0; j < n; ++j) {
    tab.lo[j] = p.lower[j];
    tab.hi[j] = p.upper[j];
    if (std::isfinite(p.lower[j])) {
      tab.x[j] = p.lower[j];
      tab.state[j] = VarState::AtLower;
    } else if (std::isfinite(p.upper[j])) {
      tab.x[j] = p.upper[j];
      tab.state[j] = VarState::AtUpper;
    } else {
      tab.x[j] = 0.0;
      tab.state[j] = VarState::FreeAtZero;
    }
  }

  // Artificial variable per row, sign-matched to the residual so it starts
  // feasible and basic.
  tab.t.assign(m, std::vector<double>(tab.total, 0.0));
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(p.rows[i].size()) != n)
      throw std::invalid_argument("lp: row width mismatch");
    double residual = p.rhs[i];
    for (int j = 0; j < n; ++j) residual -= p.rows[i][j] * tab.x[j];
    const double sign = residual >= 0.0 ? 1.0 : -1.0;
    // Tableau row = B^-1 A with B = diag(sign): scale the whole row.
    for (int j = 0; j < n; ++j) tab.t[i][j] = sign * p.rows[i][j];
    tab.t[i][n + i] = 1.0;
    tab.lo[n + i] = 0.0;
    tab.hi[n + i] = kInf;
    tab.x[n + i] = std::abs(residual);
    tab.state[n + i] = VarState::Basic;
    tab.basis[i] = n + i;
  }

  const long max_iters = 2000 + 200L * tab.total;

  std::vector<double> phase1_cost(tab.total, 0.0);
  for (int i = 0; i < m; ++i) phase1_cost[n + i] = 1.0;
  Solution sol;
  if (!iterate(tab, phase1_cost, max_iters)) {
    sol.status = SolveStatus::IterationLimit;
    return sol;
  }
  double artificial_mass = 0.0;
  for (int i = 0; i < m; ++i) artificial_mass += tab.x[n + i];
  double scale = 1.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(p.rhs[i]));
  if (artificial_mass > 1e-7 * scale) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  // Pin the artificials at zero for phase 2.
  for (int i = 0; i < m; ++i) {
    tab.hi[n + i] = 0.0;
    tab.x[n + i] = 0.0;
    if (tab.state[n + i] != VarState::Basic)
      tab.state[n + i] = VarState::AtLower;
  }

  std::vector<double> phase2_cost(tab.total, 0.0);
  for (int j = 0; j < n; ++j) phase2_cost[j] = p.objective[j];
  if (!iterate(tab, phase2_cost, max_iters)) {
    sol.status = SolveStatus::IterationLimit;
    return sol;
  }

  sol.status = SolveStatus::Optimal;
  sol.x.assign(tab.x.begin(), tab.x.begin() + n);
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += p.objective[j] * sol.x[j];
  sol.objective = obj;
  return sol;
}

}  // namespace gridins::lp
