#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "desopf/model/constraint_system.hpp"

namespace desopf::solve {

enum class SolveStatus {
    Optimal,          // proven for MILP
    LocallyOptimal,   // NLP local solution
    Infeasible,
    Unbounded,
    IterationLimit,
    NoIncumbent,
    Error
};

const char* to_string(SolveStatus status);

struct MilpSolveOptions {
    double rel_gap = 0.0;
    double int_tol = 1e-6;
    double feas_tol = 1e-6;
    long node_limit = 100000;
    double time_limit_s = 600.0;
};

struct NlpSolveOptions {
    double tol = 1e-8;
    double feas_tol = 1e-6;
    int max_iter = 400;
    double time_limit_s = 600.0;
};

struct BackendResult {
    SolveStatus status = SolveStatus::Error;
    double objective = 0.0;
    std::vector<double> x;
    double rel_gap = 0.0;              // MILP only
    long nodes = 0;                    // MILP only
    int iterations = 0;                // NLP only
    double max_violation = 0.0;        // residual audit at the returned point
    std::vector<std::string> conflicts;  // infeasible constraint names, when known
};

/// Contract every solver adapter fulfils: a MILP solve over the linear part with
/// integrality marks, and an NLP solve over the full system from a starting point.
/// Returned solutions must satisfy all constraints within the feasibility
/// tolerance, and MILP results must report their relative optimality gap.
class SolveBackend {
public:
    virtual ~SolveBackend() = default;
    virtual std::string name() const = 0;
    virtual BackendResult milp_solve(const model::ConstraintSystem& system,
                                     const MilpSolveOptions& options) = 0;
    virtual BackendResult nlp_solve(const model::ConstraintSystem& system,
                                    std::span<const double> starting_point,
                                    const NlpSolveOptions& options) = 0;
};

/// Creates a backend by name. "builtin" is always available; other names are
/// resolved against plugin libraries found in the directory named by the
/// DESOPF_BACKEND_PATH environment variable (each exporting
/// `desopf::solve::SolveBackend* desopf_backend_create()`).
std::unique_ptr<SolveBackend> make_backend(const std::string& name);

std::unique_ptr<SolveBackend> make_builtin_backend();

}  // namespace desopf::solve
