#pragma once

#include <limits>
#include <string>
#include <vector>

namespace gridins::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimize c.x subject to A x = b and lower <= x <= upper (entries may be
// +/-inf; a free variable uses both infinities).
struct Problem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::vector<double>> rows;  // dense equality rows
  std::vector<double> rhs;
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

struct Solution {
  SolveStatus status = SolveStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
};

// Bounded-variable two-phase primal simplex with anti-cycling fallback.
Solution solve(const Problem& problem);

}  // namespace gridins::lp
