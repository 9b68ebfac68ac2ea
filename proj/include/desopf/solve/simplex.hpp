#pragma once

#include <vector>

#include "desopf/model/constraint_system.hpp"

namespace desopf::solve {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOptions {
    double feas_tol = 1e-8;
    double opt_tol = 1e-9;
    int max_iterations = 0;   // 0: derived from problem size
    int refactor_every = 200;
};

struct LpRow {
    std::vector<model::LinearTerm> terms;  // var is a local column index
    model::Sense sense = model::Sense::Equal;
    double rhs = 0.0;
    int source_row = -1;  // caller bookkeeping (e.g. index into ConstraintSystem rows)
};

struct LpProblem {
    int num_cols = 0;
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LpRow> rows;
};

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<int> infeasible_rows;  // source_row ids left infeasible (status Infeasible)
    int iterations = 0;
};

/// Two-phase bounded-variable revised simplex (dense basis inverse).
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace desopf::solve
