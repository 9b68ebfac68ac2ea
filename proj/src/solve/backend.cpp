#include "desopf/solve/backend.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "desopf/solve/interior_point.hpp"
#include "desopf/solve/mip.hpp"
#include "desopf/solve/simplex.hpp"

namespace desopf::solve {

using model::ConstraintSystem;
using model::Sense;

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::LocallyOptimal: return "locally_optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::NoIncumbent: return "no_incumbent";
        case SolveStatus::Error: return "error";
    }
    return "unknown";
}

namespace {

struct Presolve {
    std::vector<int> free_vars;
    std::vector<int> var_component;         // full id -> component or -1 (fixed)
    int num_components = 0;
    std::vector<double> x_base;             // fixed values and rest values
    std::vector<std::string> conflicts;     // fixed-variable / constant-row conflicts
    bool infeasible = false;
};

double rest_value_for(const model::Variable& v) {
    if (v.fixed_value) return *v.fixed_value;
    if (std::isfinite(v.lower) && v.lower > 0.0) return v.lower;
    if (std::isfinite(v.upper) && v.upper < 0.0) return v.upper;
    return std::clamp(0.0, std::isfinite(v.lower) ? v.lower : -kInf,
                      std::isfinite(v.upper) ? v.upper : kInf);
}

// Union-find component split over free variables, plus a consistency check of
// rows whose variables are all fixed.
Presolve presolve(const ConstraintSystem& cs, double feas_tol) {
    Presolve p;
    const int n = cs.num_variables();
    p.x_base.resize(static_cast<std::size_t>(n));
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };
    auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };

    std::vector<bool> is_free(static_cast<std::size_t>(n), false);
    for (int j = 0; j < n; ++j) {
        const auto& v = cs.variable(j);
        p.x_base[static_cast<std::size_t>(j)] = rest_value_for(v);
        if (v.fixed_value) {
            if (*v.fixed_value < v.lower - feas_tol || *v.fixed_value > v.upper + feas_tol) {
                p.infeasible = true;
                p.conflicts.push_back("fixing of '" + v.name + "' lies outside its bounds");
            }
            continue;
        }
        // Zero-width bounds pin the variable just like a fixing.
        if (std::isfinite(v.lower) && std::isfinite(v.upper) && v.upper - v.lower <= 1e-12) {
            p.x_base[static_cast<std::size_t>(j)] = 0.5 * (v.lower + v.upper);
            continue;
        }
        is_free[static_cast<std::size_t>(j)] = true;
        p.free_vars.push_back(j);
    }

    auto link_group = [&](const std::vector<int>& vars) {
        int first = -1;
        for (int v : vars) {
            if (!is_free[static_cast<std::size_t>(v)]) continue;
            if (first < 0) first = v;
            else unite(first, v);
        }
    };

    auto check_constant = [&](double lhs, Sense sense, double rhs, const std::string& name) {
        bool bad = false;
        switch (sense) {
            case Sense::Equal: bad = std::abs(lhs - rhs) > feas_tol * std::max(1.0, std::abs(rhs)); break;
            case Sense::LessEqual: bad = lhs > rhs + feas_tol * std::max(1.0, std::abs(rhs)); break;
            case Sense::GreaterEqual: bad = lhs < rhs - feas_tol * std::max(1.0, std::abs(rhs)); break;
        }
        if (bad) {
            p.infeasible = true;
            p.conflicts.push_back(name);
        }
    };

    std::vector<int> touched;
    for (const auto& c : cs.linear_constraints()) {
        touched.clear();
        double fixed_lhs = 0.0;
        bool any_free = false;
        for (const auto& t : c.terms) {
            if (is_free[static_cast<std::size_t>(t.var)]) {
                any_free = true;
                touched.push_back(t.var);
            } else {
                fixed_lhs += t.coeff * p.x_base[static_cast<std::size_t>(t.var)];
            }
        }
        if (!any_free) {
            check_constant(fixed_lhs, c.sense, c.rhs, c.name);
        } else {
            link_group(touched);
        }
    }
    for (const auto& c : cs.nonlinear_constraints()) {
        touched.clear();
        bool any_free = false;
        for (int v : c->variables()) {
            if (is_free[static_cast<std::size_t>(v)]) {
                any_free = true;
                touched.push_back(v);
            }
        }
        if (!any_free) {
            check_constant(c->value(p.x_base), c->sense, c->rhs, c->name);
        } else {
            link_group(touched);
        }
    }

    p.var_component.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> root_to_comp(static_cast<std::size_t>(n), -1);
    for (int v : p.free_vars) {
        const int root = find(v);
        if (root_to_comp[static_cast<std::size_t>(root)] < 0) {
            root_to_comp[static_cast<std::size_t>(root)] = p.num_components++;
        }
        p.var_component[static_cast<std::size_t>(v)] = root_to_comp[static_cast<std::size_t>(root)];
    }
    return p;
}

SolveStatus worse(SolveStatus a, SolveStatus b) {
    auto rank = [](SolveStatus s) {
        switch (s) {
            case SolveStatus::Optimal: return 0;
            case SolveStatus::LocallyOptimal: return 1;
            case SolveStatus::IterationLimit: return 2;
            case SolveStatus::NoIncumbent: return 3;
            case SolveStatus::Unbounded: return 4;
            case SolveStatus::Infeasible: return 5;
            case SolveStatus::Error: return 6;
        }
        return 6;
    };
    return rank(a) >= rank(b) ? a : b;
}

class BuiltinBackend final : public SolveBackend {
public:
    std::string name() const override { return "builtin"; }

    BackendResult milp_solve(const ConstraintSystem& cs, const MilpSolveOptions& opt) override {
        BackendResult out;
        if (!cs.nonlinear_constraints().empty() || !cs.objective_residuals().empty()) {
            out.status = SolveStatus::Error;
            out.conflicts.push_back("milp_solve given a system with nonlinear parts");
            return out;
        }
        const Presolve p = presolve(cs, opt.feas_tol);
        out.x = p.x_base;
        if (p.infeasible) {
            out.status = SolveStatus::Infeasible;
            out.conflicts = p.conflicts;
            return out;
        }

        out.status = SolveStatus::Optimal;
        double worst_gap = 0.0;
        for (int comp = 0; comp < p.num_components; ++comp) {
            LpProblem lp;
            std::vector<int> to_full;
            std::vector<int> to_local(static_cast<std::size_t>(cs.num_variables()), -1);
            for (int v : p.free_vars) {
                if (p.var_component[static_cast<std::size_t>(v)] != comp) continue;
                to_local[static_cast<std::size_t>(v)] = static_cast<int>(to_full.size());
                to_full.push_back(v);
            }
            lp.num_cols = static_cast<int>(to_full.size());
            lp.cost.resize(static_cast<std::size_t>(lp.num_cols));
            lp.lower.resize(static_cast<std::size_t>(lp.num_cols));
            lp.upper.resize(static_cast<std::size_t>(lp.num_cols));
            std::vector<bool> integral(static_cast<std::size_t>(lp.num_cols), false);
            for (int j = 0; j < lp.num_cols; ++j) {
                const auto& v = cs.variable(to_full[static_cast<std::size_t>(j)]);
                lp.cost[static_cast<std::size_t>(j)] =
                    cs.objective_coefficients()[static_cast<std::size_t>(to_full[static_cast<std::size_t>(j)])];
                lp.lower[static_cast<std::size_t>(j)] = v.lower;
                lp.upper[static_cast<std::size_t>(j)] = v.upper;
                integral[static_cast<std::size_t>(j)] = v.is_integral();
            }
            const auto& rows = cs.linear_constraints();
            for (std::size_t r = 0; r < rows.size(); ++r) {
                LpRow row;
                row.sense = rows[r].sense;
                row.rhs = rows[r].rhs;
                row.source_row = static_cast<int>(r);
                bool mine = false;
                for (const auto& t : rows[r].terms) {
                    const int local = to_local[static_cast<std::size_t>(t.var)];
                    if (local >= 0) {
                        row.terms.push_back({local, t.coeff});
                        if (p.var_component[static_cast<std::size_t>(t.var)] == comp) mine = true;
                    } else {
                        row.rhs -= t.coeff * p.x_base[static_cast<std::size_t>(t.var)];
                    }
                }
                if (mine) lp.rows.push_back(std::move(row));
            }

            MipOptions mip_opt;
            mip_opt.rel_gap = opt.rel_gap;
            mip_opt.int_tol = opt.int_tol;
            mip_opt.node_limit = opt.node_limit;
            mip_opt.time_limit_s = opt.time_limit_s;
            mip_opt.lp.feas_tol = std::min(1e-8, opt.feas_tol);
            const MipSolution sol = solve_mip(lp, integral, mip_opt);
            out.nodes += sol.nodes;
            switch (sol.status) {
                case MipStatus::Optimal:
                    break;
                case MipStatus::LimitWithIncumbent:
                    out.status = worse(out.status, SolveStatus::IterationLimit);
                    break;
                case MipStatus::Infeasible:
                    out.status = worse(out.status, SolveStatus::Infeasible);
                    for (int r : sol.infeasible_rows) {
                        if (r >= 0) out.conflicts.push_back(cs.linear_constraints()[static_cast<std::size_t>(r)].name);
                    }
                    continue;
                case MipStatus::Unbounded:
                    out.status = worse(out.status, SolveStatus::Unbounded);
                    continue;
                default:
                    out.status = worse(out.status, SolveStatus::NoIncumbent);
                    continue;
            }
            worst_gap = std::max(worst_gap, sol.rel_gap);
            for (int j = 0; j < lp.num_cols; ++j) {
                double v = sol.x[static_cast<std::size_t>(j)];
                if (integral[static_cast<std::size_t>(j)]) v = std::round(v);
                out.x[static_cast<std::size_t>(to_full[static_cast<std::size_t>(j)])] = v;
            }
        }
        out.rel_gap = worst_gap;
        if (out.status == SolveStatus::Optimal || out.status == SolveStatus::IterationLimit) {
            out.objective = cs.objective_value(out.x);
            out.max_violation = cs.max_violation(out.x);
            if (out.max_violation > opt.feas_tol * 10.0) {
                out.status = SolveStatus::Error;
                out.conflicts.push_back("solution failed the residual audit");
            }
        }
        return out;
    }

    BackendResult nlp_solve(const ConstraintSystem& cs, std::span<const double> starting_point,
                            const NlpSolveOptions& opt) override {
        BackendResult out;
        const Presolve p = presolve(cs, opt.feas_tol);
        out.x = p.x_base;
        if (p.infeasible) {
            out.status = SolveStatus::Infeasible;
            out.conflicts = p.conflicts;
            return out;
        }
        if (!starting_point.empty() &&
            starting_point.size() != static_cast<std::size_t>(cs.num_variables())) {
            out.status = SolveStatus::Error;
            out.conflicts.push_back("starting point has the wrong dimension");
            return out;
        }

        // Index rows by component.
        std::vector<std::vector<int>> linear_rows(static_cast<std::size_t>(p.num_components));
        std::vector<std::vector<int>> nonlinear_rows(static_cast<std::size_t>(p.num_components));
        auto component_of_row = [&](const std::vector<int>& vars) {
            for (int v : vars) {
                const int comp = p.var_component[static_cast<std::size_t>(v)];
                if (comp >= 0) return comp;
            }
            return -1;
        };
        {
            std::vector<int> vars;
            const auto& lin = cs.linear_constraints();
            for (std::size_t r = 0; r < lin.size(); ++r) {
                vars.clear();
                for (const auto& t : lin[r].terms) vars.push_back(t.var);
                const int comp = component_of_row(vars);
                if (comp >= 0) linear_rows[static_cast<std::size_t>(comp)].push_back(static_cast<int>(r));
            }
            const auto& non = cs.nonlinear_constraints();
            for (std::size_t r = 0; r < non.size(); ++r) {
                const int comp = component_of_row(non[r]->variables());
                if (comp >= 0) nonlinear_rows[static_cast<std::size_t>(comp)].push_back(static_cast<int>(r));
            }
        }

        std::vector<double> x_base = p.x_base;
        if (!starting_point.empty()) {
            for (int v : p.free_vars) x_base[static_cast<std::size_t>(v)] = starting_point[static_cast<std::size_t>(v)];
        }

        out.status = SolveStatus::LocallyOptimal;
        for (int comp = 0; comp < p.num_components; ++comp) {
            NlpView view;
            view.system = &cs;
            for (int v : p.free_vars) {
                if (p.var_component[static_cast<std::size_t>(v)] == comp) view.free_vars.push_back(v);
            }
            view.linear_rows = linear_rows[static_cast<std::size_t>(comp)];
            view.nonlinear_rows = nonlinear_rows[static_cast<std::size_t>(comp)];
            view.x_base = x_base;
            if (!starting_point.empty()) {
                view.start_full.assign(starting_point.begin(), starting_point.end());
            }
            IpOptions ip_opt;
            ip_opt.tol = opt.tol;
            ip_opt.max_iter = opt.max_iter;
            ip_opt.time_limit_s = opt.time_limit_s;
            const IpResult sol = solve_nlp(view, ip_opt);
            out.iterations += sol.iterations;
            switch (sol.status) {
                case IpStatus::LocallyOptimal: break;
                case IpStatus::Infeasible:
                    out.status = worse(out.status, SolveStatus::Infeasible);
                    break;
                case IpStatus::IterationLimit:
                    out.status = worse(out.status, SolveStatus::IterationLimit);
                    break;
                case IpStatus::Error:
                    out.status = worse(out.status, SolveStatus::Error);
                    break;
            }
            for (int v : view.free_vars) out.x[static_cast<std::size_t>(v)] = sol.x_full[static_cast<std::size_t>(v)];
        }
        out.objective = cs.objective_value(out.x);
        out.max_violation = cs.max_violation(out.x);
        // Declare infeasibility from the residual audit, not status alone.
        if (out.status == SolveStatus::LocallyOptimal && out.max_violation > opt.feas_tol) {
            out.status = SolveStatus::IterationLimit;
        }
        return out;
    }
};

using PluginCreate = SolveBackend* (*)();

std::unique_ptr<SolveBackend> load_plugin(const std::string& name) {
    const char* path = std::getenv("DESOPF_BACKEND_PATH");
    if (!path) {
        throw InvalidInput("backend '" + name +
                           "' not found (set DESOPF_BACKEND_PATH to a plugin directory)");
    }
    const std::filesystem::path lib =
        std::filesystem::path(path) / ("libdesopf_backend_" + name + ".so");
    void* handle = dlopen(lib.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (!handle) {
        throw InvalidInput("backend '" + name + "': cannot load " + lib.string() + ": " + dlerror());
    }
    auto create = reinterpret_cast<PluginCreate>(dlsym(handle, "desopf_backend_create"));
    if (!create) {
        throw InvalidInput("backend '" + name + "': " + lib.string() +
                           " does not export desopf_backend_create");
    }
    return std::unique_ptr<SolveBackend>(create());
}

}  // namespace

std::unique_ptr<SolveBackend> make_builtin_backend() {
    return std::make_unique<BuiltinBackend>();
}

std::unique_ptr<SolveBackend> make_backend(const std::string& name) {
    if (name.empty() || name == "builtin") return make_builtin_backend();
    return load_plugin(name);
}

}  // namespace desopf::solve
