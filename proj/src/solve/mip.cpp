#include "desopf/solve/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace desopf::solve {

using model::Sense;

namespace {

struct BoundChange {
    int var;
    double lower, upper;
};

struct Node {
    std::vector<BoundChange> changes;  // full path from the root
    int depth = 0;
};

int most_fractional(const std::vector<double>& x, const std::vector<bool>& integral,
                    double int_tol) {
    int best = -1;
    double best_dist = int_tol;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!integral[j]) continue;
        const double frac = x[j] - std::floor(x[j]);
        const double dist = std::min(frac, 1.0 - frac);
        if (dist > best_dist) {
            best_dist = dist;
            best = static_cast<int>(j);
        }
    }
    return best;
}

// Column-wise view of the rows for cheap re-evaluation.
struct ColumnIndex {
    std::vector<std::vector<std::pair<int, double>>> cols;  // var -> (row, coeff)

    explicit ColumnIndex(const LpProblem& p) : cols(static_cast<std::size_t>(p.num_cols)) {
        for (std::size_t r = 0; r < p.rows.size(); ++r) {
            for (const auto& t : p.rows[r].terms) {
                cols[static_cast<std::size_t>(t.var)].emplace_back(static_cast<int>(r), t.coeff);
            }
        }
    }
};

std::vector<double> row_activities(const LpProblem& p, const std::vector<double>& x) {
    std::vector<double> act(p.rows.size(), 0.0);
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        for (const auto& t : p.rows[r].terms) act[r] += t.coeff * x[static_cast<std::size_t>(t.var)];
    }
    return act;
}

bool row_ok(const LpRow& row, double activity, double tol) {
    switch (row.sense) {
        case Sense::Equal: return std::abs(activity - row.rhs) <= tol;
        case Sense::LessEqual: return activity <= row.rhs + tol;
        case Sense::GreaterEqual: return activity >= row.rhs - tol;
    }
    return false;
}

// Snaps fractional integer values to a neighbouring integer whenever every row
// containing the variable stays feasible at unchanged values elsewhere. This
// clears the binaries that sit on a degenerate optimal face (exclusivity flags
// whose constraints are slack) so that branching is reserved for real conflicts.
void snap_polish(const LpProblem& p, const ColumnIndex& cols, const std::vector<bool>& integral,
                 std::vector<double>& x, std::vector<double>& act, double int_tol,
                 double feas_tol) {
    for (int j = 0; j < p.num_cols; ++j) {
        if (!integral[static_cast<std::size_t>(j)]) continue;
        const double v = x[static_cast<std::size_t>(j)];
        const double frac = v - std::floor(v);
        if (std::min(frac, 1.0 - frac) <= int_tol) continue;
        const double candidates[2] = {(frac <= 0.5) ? std::floor(v) : std::ceil(v),
                                      (frac <= 0.5) ? std::ceil(v) : std::floor(v)};
        for (double cand : candidates) {
            if (cand < p.lower[static_cast<std::size_t>(j)] - 1e-9 ||
                cand > p.upper[static_cast<std::size_t>(j)] + 1e-9) {
                continue;
            }
            const double delta = cand - v;
            bool ok = true;
            for (const auto& [r, coeff] : cols.cols[static_cast<std::size_t>(j)]) {
                const double scale = std::max(1.0, std::abs(p.rows[static_cast<std::size_t>(r)].rhs));
                if (!row_ok(p.rows[static_cast<std::size_t>(r)], act[static_cast<std::size_t>(r)] + coeff * delta,
                            feas_tol * scale)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            for (const auto& [r, coeff] : cols.cols[static_cast<std::size_t>(j)]) {
                act[static_cast<std::size_t>(r)] += coeff * delta;
            }
            x[static_cast<std::size_t>(j)] = cand;
            break;
        }
    }
}

}  // namespace

MipSolution solve_mip(const LpProblem& problem, const std::vector<bool>& integral,
                      const MipOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    MipSolution out;
    LpProblem work = problem;

    // Integer bounds can be tightened to integer values up front.
    for (int j = 0; j < work.num_cols; ++j) {
        if (!integral[static_cast<std::size_t>(j)]) continue;
        auto& lo = work.lower[static_cast<std::size_t>(j)];
        auto& hi = work.upper[static_cast<std::size_t>(j)];
        if (std::isfinite(lo)) lo = std::ceil(lo - opt.int_tol);
        if (std::isfinite(hi)) hi = std::floor(hi + opt.int_tol);
    }
    const ColumnIndex cols(work);

    auto apply_changes = [&](const std::vector<BoundChange>& changes) {
        LpProblem node = work;
        for (const auto& ch : changes) {
            node.lower[static_cast<std::size_t>(ch.var)] =
                std::max(node.lower[static_cast<std::size_t>(ch.var)], ch.lower);
            node.upper[static_cast<std::size_t>(ch.var)] =
                std::min(node.upper[static_cast<std::size_t>(ch.var)], ch.upper);
        }
        return node;
    };

    std::optional<double> incumbent_obj;
    std::vector<double> incumbent_x;
    auto try_incumbent = [&](const std::vector<double>& x) {
        double obj = 0.0;
        for (int j = 0; j < work.num_cols; ++j) {
            obj += work.cost[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        }
        if (!incumbent_obj || obj < *incumbent_obj - 1e-12) {
            incumbent_obj = obj;
            incumbent_x = x;
        }
    };
    auto cutoff = [&](double bound) {
        if (!incumbent_obj) return false;
        const double slack = std::max(1e-9 * std::max(1.0, std::abs(*incumbent_obj)),
                                      opt.rel_gap * std::abs(*incumbent_obj));
        return bound >= *incumbent_obj - slack;
    };

    // Heuristic: fix all integers to the given values and re-solve the LP.
    auto fix_and_solve = [&](const LpProblem& node, const std::vector<double>& x) {
        LpProblem fixed = node;
        for (int j = 0; j < node.num_cols; ++j) {
            if (!integral[static_cast<std::size_t>(j)]) continue;
            const double v = std::round(x[static_cast<std::size_t>(j)]);
            fixed.lower[static_cast<std::size_t>(j)] = v;
            fixed.upper[static_cast<std::size_t>(j)] = v;
        }
        const LpSolution sol = solve_lp(fixed, opt.lp);
        if (sol.status == LpStatus::Optimal) try_incumbent(sol.x);
        return sol.status == LpStatus::Optimal;
    };

    struct Open {
        Node node;
        double bound;
    };
    std::vector<Open> stack;
    double root_bound = -kInf;
    bool hit_limit = false;

    // Root node plus depth-first descent; each entry carries its parent bound.
    {
        Node root;
        stack.push_back({root, -kInf});
    }

    long explored = 0;
    while (!stack.empty()) {
        if (explored >= opt.node_limit || elapsed() > opt.time_limit_s) {
            hit_limit = true;
            break;
        }
        // Depth-first with best-bound tie-break among the deepest entries.
        std::size_t pick = stack.size() - 1;
        for (std::size_t k = stack.size(); k-- > 0;) {
            if (stack[k].node.depth != stack[pick].node.depth) break;
            if (stack[k].bound < stack[pick].bound) pick = k;
        }
        Open open = std::move(stack[pick]);
        stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(pick));
        if (cutoff(open.bound)) continue;

        const LpProblem node_lp = apply_changes(open.node.changes);
        LpSolution lp = solve_lp(node_lp, opt.lp);
        ++explored;
        ++out.nodes;
        if (lp.status == LpStatus::Infeasible) {
            if (open.node.depth == 0) {
                out.status = MipStatus::Infeasible;
                out.infeasible_rows = lp.infeasible_rows;
                return out;
            }
            continue;
        }
        if (lp.status == LpStatus::Unbounded) {
            out.status = MipStatus::Unbounded;
            return out;
        }
        if (lp.status != LpStatus::Optimal) {
            hit_limit = true;
            continue;
        }
        if (open.node.depth == 0) root_bound = lp.objective;
        if (cutoff(lp.objective)) continue;

        // The raw relaxation decides branching; the polished point only feeds
        // the incumbent (snapping face-degenerate binaries keeps the bound).
        const int raw_branch = most_fractional(lp.x, integral, opt.int_tol);
        if (raw_branch < 0) {
            try_incumbent(lp.x);
            continue;
        }
        std::vector<double> x = lp.x;
        std::vector<double> act = row_activities(node_lp, x);
        snap_polish(node_lp, cols, integral, x, act, opt.int_tol, 1e-7);
        if (most_fractional(x, integral, opt.int_tol) < 0) try_incumbent(x);
        if (cutoff(lp.objective)) continue;
        const int branch = raw_branch;

        if (open.node.depth == 0) {
            // Root heuristics: rounded fixing, then a conservative all-zero
            // fallback for the binaries.
            if (!fix_and_solve(node_lp, x)) {
                std::vector<double> zeroed = x;
                for (int j = 0; j < work.num_cols; ++j) {
                    if (integral[static_cast<std::size_t>(j)] &&
                        work.lower[static_cast<std::size_t>(j)] <= 0.0 &&
                        work.upper[static_cast<std::size_t>(j)] >= 0.0) {
                        const double frac = zeroed[static_cast<std::size_t>(j)] -
                                            std::floor(zeroed[static_cast<std::size_t>(j)]);
                        if (std::min(frac, 1.0 - frac) > opt.int_tol) {
                            zeroed[static_cast<std::size_t>(j)] = 0.0;
                        }
                    }
                }
                fix_and_solve(node_lp, zeroed);
            }
            if (cutoff(lp.objective)) continue;
        }

        const double v = lp.x[static_cast<std::size_t>(branch)];
        Node down = open.node, up = open.node;
        down.changes.push_back({branch, -kInf, std::floor(v)});
        up.changes.push_back({branch, std::ceil(v), kInf});
        down.depth = up.depth = open.node.depth + 1;
        const double frac = v - std::floor(v);
        if (frac <= 0.5) {
            stack.push_back({std::move(up), lp.objective});
            stack.push_back({std::move(down), lp.objective});
        } else {
            stack.push_back({std::move(down), lp.objective});
            stack.push_back({std::move(up), lp.objective});
        }
    }

    double global_bound = root_bound;
    if (!stack.empty()) {
        for (const auto& o : stack) {
            if (o.bound > -kInf) global_bound = std::min(global_bound, o.bound);
        }
    } else if (incumbent_obj) {
        global_bound = *incumbent_obj;
    }

    if (incumbent_obj) {
        out.objective = *incumbent_obj;
        out.x = incumbent_x;
        out.rel_gap = hit_limit ? std::max(0.0, (*incumbent_obj - global_bound) /
                                                    std::max(1.0, std::abs(*incumbent_obj)))
                                : 0.0;
        out.status = hit_limit ? MipStatus::LimitWithIncumbent : MipStatus::Optimal;
        return out;
    }
    out.status = hit_limit ? MipStatus::NoIncumbent : MipStatus::Infeasible;
    return out;
}

}  // namespace desopf::solve
