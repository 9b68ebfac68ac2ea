#pragma once

#include <vector>

#include "desopf/model/constraint_system.hpp"

namespace desopf::solve {

enum class IpStatus { LocallyOptimal, Infeasible, IterationLimit, Error };

struct IpOptions {
    double tol = 1e-8;
    int max_iter = 400;
    double time_limit_s = 600.0;
    double mu0 = 0.1;
};

struct IpResult {
    IpStatus status = IpStatus::Error;
    double objective = 0.0;           // includes the system's objective constant
    std::vector<double> x_full;       // full variable vector (fixed values included)
    int iterations = 0;
    double constraint_violation = 0.0;
    double dual_infeasibility = 0.0;
};

/// Restriction of a ConstraintSystem to one independent block: the variables the
/// solver may move and the rows that touch them. `x_base` carries fixed values
/// (and rest values for variables outside the block) at full length.
struct NlpView {
    const model::ConstraintSystem* system = nullptr;
    std::vector<int> free_vars;
    std::vector<int> linear_rows;
    std::vector<int> nonlinear_rows;
    std::vector<double> x_base;
    std::vector<double> start_full;  // optional; falls back to Variable::start
};

/// Primal-dual interior-point solver with exact first and second derivatives.
IpResult solve_nlp(const NlpView& view, const IpOptions& options = {});

}  // namespace desopf::solve
