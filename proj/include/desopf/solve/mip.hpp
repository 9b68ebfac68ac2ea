#pragma once

#include <vector>

#include "desopf/solve/simplex.hpp"

namespace desopf::solve {

enum class MipStatus { Optimal, Infeasible, Unbounded, LimitWithIncumbent, NoIncumbent, Stalled };

struct MipOptions {
    double rel_gap = 0.0;
    double int_tol = 1e-6;
    long node_limit = 100000;
    double time_limit_s = 600.0;
    LpOptions lp;
};

struct MipSolution {
    MipStatus status = MipStatus::NoIncumbent;
    double objective = 0.0;
    std::vector<double> x;
    double rel_gap = 0.0;
    long nodes = 0;
    std::vector<int> infeasible_rows;
};

/// Branch and bound over the LP relaxation: most-fractional branching,
/// depth-first with a rounding heuristic at the root.
MipSolution solve_mip(const LpProblem& problem, const std::vector<bool>& integral,
                      const MipOptions& options = {});

}  // namespace desopf::solve
