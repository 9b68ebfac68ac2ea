#include "desopf/solve/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace desopf::solve {

using model::Sense;

namespace {

enum class ColState { Basic, AtLower, AtUpper, FreeNonbasic };

constexpr double kPivotTol = 1e-9;
constexpr double kDegenStep = 1e-11;

struct Tableau {
    // Columns: structural | slack (one per row) | artificial (one per row).
    int n_struct = 0;
    int m = 0;
    int n_total = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;  // (row, value)
    std::vector<double> lower, upper, cost, phase1_cost;
    std::vector<double> rhs;
    std::vector<double> x;
    std::vector<ColState> state;
    std::vector<int> basic;        // column occupying each basis position
    std::vector<int> basis_pos;    // column -> basis position or -1
    Eigen::MatrixXd b_inv;

    int slack_col(int row) const { return n_struct + row; }
    int artificial_col(int row) const { return n_struct + m + row; }
};

void build(const LpProblem& p, Tableau& t) {
    t.n_struct = p.num_cols;
    t.m = static_cast<int>(p.rows.size());
    t.n_total = t.n_struct + 2 * t.m;
    t.cols.assign(static_cast<std::size_t>(t.n_total), {});
    t.lower.assign(static_cast<std::size_t>(t.n_total), 0.0);
    t.upper.assign(static_cast<std::size_t>(t.n_total), 0.0);
    t.cost.assign(static_cast<std::size_t>(t.n_total), 0.0);
    t.phase1_cost.assign(static_cast<std::size_t>(t.n_total), 0.0);
    t.rhs.resize(static_cast<std::size_t>(t.m));

    for (int j = 0; j < t.n_struct; ++j) {
        t.lower[j] = p.lower[static_cast<std::size_t>(j)];
        t.upper[j] = p.upper[static_cast<std::size_t>(j)];
        t.cost[j] = p.cost[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < t.m; ++i) {
        const LpRow& row = p.rows[static_cast<std::size_t>(i)];
        for (const auto& term : row.terms) {
            if (term.coeff != 0.0) t.cols[static_cast<std::size_t>(term.var)].emplace_back(i, term.coeff);
        }
        t.rhs[static_cast<std::size_t>(i)] = row.rhs;
        const int s = t.slack_col(i);
        t.cols[static_cast<std::size_t>(s)].emplace_back(i, 1.0);
        switch (row.sense) {
            case Sense::Equal:
                t.lower[static_cast<std::size_t>(s)] = 0.0;
                t.upper[static_cast<std::size_t>(s)] = 0.0;
                break;
            case Sense::LessEqual:
                t.lower[static_cast<std::size_t>(s)] = 0.0;
                t.upper[static_cast<std::size_t>(s)] = kInf;
                break;
            case Sense::GreaterEqual:
                t.lower[static_cast<std::size_t>(s)] = -kInf;
                t.upper[static_cast<std::size_t>(s)] = 0.0;
                break;
        }
    }
}

// Nonbasic rest value: the finite bound closest to zero, or zero for free columns.
double rest_value(const Tableau& t, int j) {
    const double lo = t.lower[static_cast<std::size_t>(j)];
    const double hi = t.upper[static_cast<std::size_t>(j)];
    if (std::isfinite(lo) && std::isfinite(hi)) return std::abs(lo) <= std::abs(hi) ? lo : hi;
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return 0.0;
}

void initialize_basis(Tableau& t) {
    t.x.assign(static_cast<std::size_t>(t.n_total), 0.0);
    t.state.assign(static_cast<std::size_t>(t.n_total), ColState::AtLower);
    t.basic.assign(static_cast<std::size_t>(t.m), -1);
    t.basis_pos.assign(static_cast<std::size_t>(t.n_total), -1);

    std::vector<double> residual = t.rhs;
    for (int j = 0; j < t.n_struct + t.m; ++j) {
        const double v = rest_value(t, j);
        t.x[static_cast<std::size_t>(j)] = v;
        const double lo = t.lower[static_cast<std::size_t>(j)];
        const double hi = t.upper[static_cast<std::size_t>(j)];
        if (!std::isfinite(lo) && !std::isfinite(hi)) {
            t.state[static_cast<std::size_t>(j)] = ColState::FreeNonbasic;
        } else {
            t.state[static_cast<std::size_t>(j)] = (v == lo) ? ColState::AtLower : ColState::AtUpper;
        }
        if (v != 0.0) {
            for (const auto& [row, coeff] : t.cols[static_cast<std::size_t>(j)]) {
                residual[static_cast<std::size_t>(row)] -= coeff * v;
            }
        }
    }

    t.b_inv = Eigen::MatrixXd::Zero(t.m, t.m);
    for (int i = 0; i < t.m; ++i) {
        const int a = t.artificial_col(i);
        const double r = residual[static_cast<std::size_t>(i)];
        const double sign = (r >= 0.0) ? 1.0 : -1.0;
        t.cols[static_cast<std::size_t>(a)].emplace_back(i, sign);
        t.lower[static_cast<std::size_t>(a)] = 0.0;
        t.upper[static_cast<std::size_t>(a)] = kInf;
        t.phase1_cost[static_cast<std::size_t>(a)] = 1.0;
        t.x[static_cast<std::size_t>(a)] = std::abs(r);
        t.state[static_cast<std::size_t>(a)] = ColState::Basic;
        t.basic[static_cast<std::size_t>(i)] = a;
        t.basis_pos[static_cast<std::size_t>(a)] = i;
        t.b_inv(i, i) = sign;
    }
}

Eigen::VectorXd basic_costs(const Tableau& t, const std::vector<double>& costs) {
    Eigen::VectorXd cb(t.m);
    for (int i = 0; i < t.m; ++i) cb(i) = costs[static_cast<std::size_t>(t.basic[static_cast<std::size_t>(i)])];
    return cb;
}

double column_dot(const Tableau& t, int j, const Eigen::VectorXd& y) {
    double dot = 0.0;
    for (const auto& [row, coeff] : t.cols[static_cast<std::size_t>(j)]) dot += coeff * y(row);
    return dot;
}

Eigen::VectorXd ftran(const Tableau& t, int j) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(t.m);
    for (const auto& [row, coeff] : t.cols[static_cast<std::size_t>(j)]) {
        w += coeff * t.b_inv.col(row);
    }
    return w;
}

// Rebuilds the basis inverse and basic values from scratch.
bool refactorize(Tableau& t) {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(t.m, t.m);
    for (int i = 0; i < t.m; ++i) {
        const int j = t.basic[static_cast<std::size_t>(i)];
        for (const auto& [row, coeff] : t.cols[static_cast<std::size_t>(j)]) basis(row, i) = coeff;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite()) return false;
    t.b_inv = inv;

    Eigen::VectorXd rhs_eff(t.m);
    for (int i = 0; i < t.m; ++i) rhs_eff(i) = t.rhs[static_cast<std::size_t>(i)];
    for (int j = 0; j < t.n_total; ++j) {
        if (t.state[static_cast<std::size_t>(j)] == ColState::Basic) continue;
        const double v = t.x[static_cast<std::size_t>(j)];
        if (v == 0.0) continue;
        for (const auto& [row, coeff] : t.cols[static_cast<std::size_t>(j)]) {
            rhs_eff(row) -= coeff * v;
        }
    }
    const Eigen::VectorXd xb = t.b_inv * rhs_eff;
    for (int i = 0; i < t.m; ++i) t.x[static_cast<std::size_t>(t.basic[static_cast<std::size_t>(i)])] = xb(i);
    return true;
}

struct PhaseResult {
    bool optimal = false;
    bool unbounded = false;
    int iterations = 0;
};

PhaseResult run_phase(Tableau& t, const std::vector<double>& costs, const LpOptions& opt,
                      int max_iter, bool phase1) {
    PhaseResult result;
    bool bland = false;
    int degenerate_streak = 0;
    int since_refactor = 0;

    for (int iter = 0; iter < max_iter; ++iter) {
        result.iterations = iter + 1;
        const Eigen::VectorXd cb = basic_costs(t, costs);
        const Eigen::VectorXd y = t.b_inv.transpose() * cb;

        // Pricing.
        int entering = -1;
        double best = 0.0;
        bool entering_from_upper = false;
        for (int j = 0; j < t.n_total; ++j) {
            const auto state = t.state[static_cast<std::size_t>(j)];
            if (state == ColState::Basic) continue;
            if (t.lower[static_cast<std::size_t>(j)] == t.upper[static_cast<std::size_t>(j)]) continue;
            const double d = costs[static_cast<std::size_t>(j)] - column_dot(t, j, y);
            double improvement = 0.0;
            bool from_upper = false;
            if ((state == ColState::AtLower || state == ColState::FreeNonbasic) && d < -opt.opt_tol) {
                improvement = -d;
            } else if ((state == ColState::AtUpper || state == ColState::FreeNonbasic) && d > opt.opt_tol) {
                improvement = d;
                from_upper = true;
            } else {
                continue;
            }
            if (bland) {
                entering = j;
                entering_from_upper = from_upper;
                break;
            }
            if (improvement > best) {
                best = improvement;
                entering = j;
                entering_from_upper = from_upper;
            }
        }
        if (entering < 0) {
            result.optimal = true;
            return result;
        }

        const double sigma = entering_from_upper ? -1.0 : 1.0;
        const Eigen::VectorXd w = ftran(t, entering);

        // Ratio test: step length for the entering value v_q + sigma * step.
        const double lo_q = t.lower[static_cast<std::size_t>(entering)];
        const double hi_q = t.upper[static_cast<std::size_t>(entering)];
        double own_step = kInf;
        if (std::isfinite(lo_q) && std::isfinite(hi_q)) own_step = hi_q - lo_q;

        double best_step = kInf;
        int leave_pos = -1;
        double leave_bound = 0.0;
        double best_pivot = 0.0;
        for (int i = 0; i < t.m; ++i) {
            const double dir = sigma * w(i);  // basic value moves by -step*dir
            if (std::abs(dir) <= kPivotTol) continue;
            const int jb = t.basic[static_cast<std::size_t>(i)];
            const double xb = t.x[static_cast<std::size_t>(jb)];
            double bound, step;
            if (dir > 0.0) {
                bound = t.lower[static_cast<std::size_t>(jb)];
                if (!std::isfinite(bound)) continue;
                step = (xb - bound) / dir;
            } else {
                bound = t.upper[static_cast<std::size_t>(jb)];
                if (!std::isfinite(bound)) continue;
                step = (xb - bound) / dir;
            }
            step = std::max(step, 0.0);
            const bool better =
                step < best_step - 1e-12 ||
                (step < best_step + 1e-12 && std::abs(w(i)) > std::abs(best_pivot));
            if (better) {
                best_step = step;
                leave_pos = i;
                leave_bound = bound;
                best_pivot = w(i);
            }
        }

        if (!std::isfinite(best_step) && !std::isfinite(own_step)) {
            result.unbounded = !phase1;
            return result;
        }

        if (own_step <= best_step) {
            // Bound flip: the entering column runs to its other bound.
            const double step = own_step;
            for (int i = 0; i < t.m; ++i) {
                const int jb = t.basic[static_cast<std::size_t>(i)];
                t.x[static_cast<std::size_t>(jb)] -= step * sigma * w(i);
            }
            t.x[static_cast<std::size_t>(entering)] += sigma * step;
            t.state[static_cast<std::size_t>(entering)] =
                entering_from_upper ? ColState::AtLower : ColState::AtUpper;
            continue;
        }

        const double step = best_step;
        if (step <= kDegenStep) {
            if (++degenerate_streak > std::max(500, t.m)) bland = true;
        } else {
            degenerate_streak = 0;
        }

        for (int i = 0; i < t.m; ++i) {
            const int jb = t.basic[static_cast<std::size_t>(i)];
            t.x[static_cast<std::size_t>(jb)] -= step * sigma * w(i);
        }
        const int leaving = t.basic[static_cast<std::size_t>(leave_pos)];
        t.x[static_cast<std::size_t>(leaving)] = leave_bound;
        t.state[static_cast<std::size_t>(leaving)] =
            (leave_bound == t.lower[static_cast<std::size_t>(leaving)]) ? ColState::AtLower
                                                                        : ColState::AtUpper;
        t.basis_pos[static_cast<std::size_t>(leaving)] = -1;
        t.x[static_cast<std::size_t>(entering)] += sigma * step;
        t.state[static_cast<std::size_t>(entering)] = ColState::Basic;
        t.basic[static_cast<std::size_t>(leave_pos)] = entering;
        t.basis_pos[static_cast<std::size_t>(entering)] = leave_pos;

        // Product-form update of the basis inverse.
        const double pivot = w(leave_pos);
        Eigen::RowVectorXd pivot_row = t.b_inv.row(leave_pos);
        for (int i = 0; i < t.m; ++i) {
            if (i == leave_pos) continue;
            const double f = w(i) / pivot;
            if (f != 0.0) t.b_inv.row(i) -= f * pivot_row;
        }
        t.b_inv.row(leave_pos) = pivot_row / pivot;

        if (++since_refactor >= opt.refactor_every) {
            since_refactor = 0;
            if (!refactorize(t)) {
                result.unbounded = false;
                return result;  // numerically stuck; caller sees iteration limit
            }
        }
    }
    return result;
}

}  // namespace

LpSolution solve_lp(const LpProblem& p, const LpOptions& opt) {
    LpSolution out;
    out.x.assign(static_cast<std::size_t>(p.num_cols), 0.0);

    for (int j = 0; j < p.num_cols; ++j) {
        if (p.lower[static_cast<std::size_t>(j)] > p.upper[static_cast<std::size_t>(j)] + 1e-12) {
            out.status = LpStatus::Infeasible;
            return out;
        }
    }

    Tableau t;
    build(p, t);
    initialize_basis(t);

    const int max_iter =
        opt.max_iterations > 0 ? opt.max_iterations : 20000 + 60 * (t.m + t.n_struct);

    double rhs_scale = 1.0;
    for (double b : t.rhs) rhs_scale = std::max(rhs_scale, std::abs(b));

    // Phase 1: drive artificial columns to zero.
    PhaseResult phase1 = run_phase(t, t.phase1_cost, opt, max_iter, true);
    out.iterations = phase1.iterations;
    double infeas = 0.0;
    for (int i = 0; i < t.m; ++i) infeas += t.x[static_cast<std::size_t>(t.artificial_col(i))];
    if (!phase1.optimal && infeas > opt.feas_tol * rhs_scale) {
        out.status = LpStatus::IterationLimit;
        return out;
    }
    if (infeas > opt.feas_tol * rhs_scale) {
        out.status = LpStatus::Infeasible;
        for (int i = 0; i < t.m; ++i) {
            if (t.x[static_cast<std::size_t>(t.artificial_col(i))] > opt.feas_tol * rhs_scale) {
                out.infeasible_rows.push_back(p.rows[static_cast<std::size_t>(i)].source_row);
            }
        }
        return out;
    }

    // Phase 2: artificial columns are pinned at zero.
    for (int i = 0; i < t.m; ++i) {
        const int a = t.artificial_col(i);
        t.upper[static_cast<std::size_t>(a)] = 0.0;
        if (t.state[static_cast<std::size_t>(a)] != ColState::Basic) {
            t.x[static_cast<std::size_t>(a)] = 0.0;
            t.state[static_cast<std::size_t>(a)] = ColState::AtLower;
        }
    }
    PhaseResult phase2 = run_phase(t, t.cost, opt, max_iter, false);
    out.iterations += phase2.iterations;
    if (phase2.unbounded) {
        out.status = LpStatus::Unbounded;
        return out;
    }
    if (!phase2.optimal) {
        out.status = LpStatus::IterationLimit;
        return out;
    }

    refactorize(t);
    out.status = LpStatus::Optimal;
    double obj = 0.0;
    for (int j = 0; j < p.num_cols; ++j) {
        out.x[static_cast<std::size_t>(j)] = t.x[static_cast<std::size_t>(j)];
        obj += p.cost[static_cast<std::size_t>(j)] * t.x[static_cast<std::size_t>(j)];
    }
    out.objective = obj;
    return out;
}

}  // namespace desopf::solve
