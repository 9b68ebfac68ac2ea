#include "desopf/solve/interior_point.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace desopf::solve {

using model::Sense;

namespace {

constexpr double kBoundPush = 1e-2;
constexpr double kSlackFloor = 1e-6;
constexpr double kDualFloor = 1e-10;
constexpr double kDualCap = 1e10;

struct RowSpec {
    bool nonlinear = false;
    int index = -1;      // into the system's linear or nonlinear lists
    double sign = 1.0;   // +1 for <= and ==, -1 flips >= into <=
    double scale = 1.0;
    bool equality = true;
};

struct Workspace {
    const model::ConstraintSystem* cs = nullptr;
    int n = 0;  // free variables
    std::vector<int> to_full;             // local -> full id
    std::vector<int> to_local;            // full id -> local or -1
    std::vector<double> lower, upper;
    std::vector<RowSpec> rows;
    int n_ineq = 0;
    std::vector<int> slack_of_row;        // row -> slack index or -1

    std::vector<double> x_full;           // evaluation buffer
    double obj_scale = 1.0;

    // Per-iteration evaluation results.
    std::vector<double> g;                               // scaled residuals
    std::vector<std::vector<model::LinearTerm>> jac;     // local indices
    std::vector<double> grad_f;                          // scaled objective gradient

    mutable std::vector<model::LinearTerm> scratch;
};

void sync_full(Workspace& w, const Eigen::VectorXd& x) {
    for (int j = 0; j < w.n; ++j) w.x_full[static_cast<std::size_t>(w.to_full[static_cast<std::size_t>(j)])] = x(j);
}

double eval_row_raw(Workspace& w, const RowSpec& row) {
    if (row.nonlinear) {
        const auto& c = *w.cs->nonlinear_constraints()[static_cast<std::size_t>(row.index)];
        return c.value(w.x_full);
    }
    const auto& c = w.cs->linear_constraints()[static_cast<std::size_t>(row.index)];
    double v = 0.0;
    for (const auto& t : c.terms) v += t.coeff * w.x_full[static_cast<std::size_t>(t.var)];
    return v;
}

double row_rhs(const Workspace& w, const RowSpec& row) {
    return row.nonlinear ? w.cs->nonlinear_constraints()[static_cast<std::size_t>(row.index)]->rhs
                         : w.cs->linear_constraints()[static_cast<std::size_t>(row.index)].rhs;
}

// Scaled residual: scale * sign * (c(x) - rhs); equality rows target 0,
// inequality rows target <= 0.
double eval_row(Workspace& w, const RowSpec& row) {
    return row.scale * row.sign * (eval_row_raw(w, row) - row_rhs(w, row));
}

void eval_all(Workspace& w, const Eigen::VectorXd& x, bool with_derivatives) {
    sync_full(w, x);
    const std::size_t m = w.rows.size();
    w.g.resize(m);
    if (with_derivatives) w.jac.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const RowSpec& row = w.rows[i];
        w.g[i] = eval_row(w, row);
        if (!with_derivatives) continue;
        auto& out = w.jac[i];
        out.clear();
        if (row.nonlinear) {
            w.scratch.clear();
            w.cs->nonlinear_constraints()[static_cast<std::size_t>(row.index)]->gradient(w.x_full,
                                                                                        w.scratch);
            for (const auto& t : w.scratch) {
                const int local = w.to_local[static_cast<std::size_t>(t.var)];
                if (local >= 0) out.push_back({local, row.scale * row.sign * t.coeff});
            }
        } else {
            const auto& c = w.cs->linear_constraints()[static_cast<std::size_t>(row.index)];
            for (const auto& t : c.terms) {
                const int local = w.to_local[static_cast<std::size_t>(t.var)];
                if (local >= 0) out.push_back({local, row.scale * row.sign * t.coeff});
            }
        }
    }
    if (with_derivatives) {
        w.grad_f.assign(static_cast<std::size_t>(w.n), 0.0);
        const auto& coeffs = w.cs->objective_coefficients();
        for (int j = 0; j < w.n; ++j) {
            w.grad_f[static_cast<std::size_t>(j)] =
                w.obj_scale * coeffs[static_cast<std::size_t>(w.to_full[static_cast<std::size_t>(j)])];
        }
        for (const auto& term : w.cs->objective_residuals()) {
            w.scratch.clear();
            term->gradient(w.x_full, w.scratch);
            for (const auto& t : w.scratch) {
                const int local = w.to_local[static_cast<std::size_t>(t.var)];
                if (local >= 0) w.grad_f[static_cast<std::size_t>(local)] += w.obj_scale * t.coeff;
            }
        }
    }
}

double eval_objective_scaled(Workspace& w, const Eigen::VectorXd& x) {
    sync_full(w, x);
    const auto& coeffs = w.cs->objective_coefficients();
    double v = 0.0;
    for (int j = 0; j < w.n; ++j) {
        v += coeffs[static_cast<std::size_t>(w.to_full[static_cast<std::size_t>(j)])] * x(j);
    }
    for (const auto& term : w.cs->objective_residuals()) v += term->value(w.x_full);
    return w.obj_scale * v;
}

}  // namespace

IpResult solve_nlp(const NlpView& view, const IpOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
               opt.time_limit_s;
    };

    IpResult result;
    const auto& cs = *view.system;

    Workspace w;
    w.cs = &cs;
    w.n = static_cast<int>(view.free_vars.size());
    w.to_full = view.free_vars;
    w.to_local.assign(static_cast<std::size_t>(cs.num_variables()), -1);
    for (int j = 0; j < w.n; ++j) w.to_local[static_cast<std::size_t>(w.to_full[static_cast<std::size_t>(j)])] = j;
    w.x_full = view.x_base;
    w.lower.resize(static_cast<std::size_t>(w.n));
    w.upper.resize(static_cast<std::size_t>(w.n));
    for (int j = 0; j < w.n; ++j) {
        const auto& v = cs.variable(w.to_full[static_cast<std::size_t>(j)]);
        // Bounds are relaxed by a whisker so that constraints active exactly at
        // a bound still leave a strict interior for the barrier.
        const double relax_lo = 1e-8 * std::max(1.0, std::abs(v.lower));
        const double relax_hi = 1e-8 * std::max(1.0, std::abs(v.upper));
        w.lower[static_cast<std::size_t>(j)] = std::isfinite(v.lower) ? v.lower - relax_lo : v.lower;
        w.upper[static_cast<std::size_t>(j)] = std::isfinite(v.upper) ? v.upper + relax_hi : v.upper;
    }

    for (int idx : view.linear_rows) {
        const auto& c = cs.linear_constraints()[static_cast<std::size_t>(idx)];
        RowSpec row;
        row.nonlinear = false;
        row.index = idx;
        row.sign = (c.sense == Sense::GreaterEqual) ? -1.0 : 1.0;
        row.equality = (c.sense == Sense::Equal);
        double norm = 0.0;
        for (const auto& t : c.terms) norm = std::max(norm, std::abs(t.coeff));
        row.scale = (norm > 1.0) ? 1.0 / norm : 1.0;
        w.rows.push_back(row);
    }
    for (int idx : view.nonlinear_rows) {
        const auto& c = *cs.nonlinear_constraints()[static_cast<std::size_t>(idx)];
        RowSpec row;
        row.nonlinear = true;
        row.index = idx;
        row.sign = (c.sense == Sense::GreaterEqual) ? -1.0 : 1.0;
        row.equality = (c.sense == Sense::Equal);
        row.scale = 1.0;
        w.rows.push_back(row);
    }
    const int m = static_cast<int>(w.rows.size());
    w.slack_of_row.assign(static_cast<std::size_t>(m), -1);
    for (int i = 0; i < m; ++i) {
        if (!w.rows[static_cast<std::size_t>(i)].equality) {
            w.slack_of_row[static_cast<std::size_t>(i)] = w.n_ineq++;
        }
    }

    // Primal start: declared starts pushed strictly inside the bounds.
    Eigen::VectorXd x(w.n);
    for (int j = 0; j < w.n; ++j) {
        const double lo = w.lower[static_cast<std::size_t>(j)];
        const double hi = w.upper[static_cast<std::size_t>(j)];
        const int full = w.to_full[static_cast<std::size_t>(j)];
        double v = view.start_full.empty() ? cs.variable(full).start
                                           : view.start_full[static_cast<std::size_t>(full)];
        if (std::isfinite(lo) && std::isfinite(hi)) {
            const double pad = std::min(kBoundPush * std::max(1.0, std::abs(lo)),
                                        kBoundPush * (hi - lo));
            v = std::clamp(v, lo + pad, hi - pad);
        } else if (std::isfinite(lo)) {
            v = std::max(v, lo + kBoundPush * std::max(1.0, std::abs(lo)));
        } else if (std::isfinite(hi)) {
            v = std::min(v, hi - kBoundPush * std::max(1.0, std::abs(hi)));
        }
        x(j) = v;
    }

    // Objective scaling from the gradient at the start.
    {
        const auto& coeffs = cs.objective_coefficients();
        double norm = 0.0;
        for (int j = 0; j < w.n; ++j) {
            norm = std::max(norm, std::abs(coeffs[static_cast<std::size_t>(w.to_full[static_cast<std::size_t>(j)])]));
        }
        w.obj_scale = (norm > 100.0) ? 100.0 / norm : 1.0;
    }

    eval_all(w, x, true);

    Eigen::VectorXd s(w.n_ineq), y = Eigen::VectorXd::Zero(m), ys(w.n_ineq);
    for (int i = 0; i < m; ++i) {
        const int k = w.slack_of_row[static_cast<std::size_t>(i)];
        if (k >= 0) s(k) = std::max(kSlackFloor * 10, -w.g[static_cast<std::size_t>(i)]);
    }
    double mu = opt.mu0;
    for (int k = 0; k < w.n_ineq; ++k) ys(k) = mu / s(k);
    Eigen::VectorXd z_lo = Eigen::VectorXd::Zero(w.n), z_hi = Eigen::VectorXd::Zero(w.n);
    for (int j = 0; j < w.n; ++j) {
        if (std::isfinite(w.lower[static_cast<std::size_t>(j)]))
            z_lo(j) = std::clamp(mu / (x(j) - w.lower[static_cast<std::size_t>(j)]), kDualFloor, kDualCap);
        if (std::isfinite(w.upper[static_cast<std::size_t>(j)]))
            z_hi(j) = std::clamp(mu / (w.upper[static_cast<std::size_t>(j)] - x(j)), kDualFloor, kDualCap);
    }

    const double mu_min = std::max(1e-14, opt.tol * 1e-4);
    double delta_last = 0.0;
    int stall_count = 0;
    double best_theta = kInf;
    int ls_failures = 0;

    auto theta_of = [&](const std::vector<double>& g, const Eigen::VectorXd& slack) {
        double theta = 0.0;
        for (int i = 0; i < m; ++i) {
            const int k = w.slack_of_row[static_cast<std::size_t>(i)];
            const double r = (k >= 0) ? g[static_cast<std::size_t>(i)] + slack(k) : g[static_cast<std::size_t>(i)];
            theta += std::abs(r);
        }
        return theta;
    };

    auto barrier_value = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& ss, double mu_now,
                             bool& valid) -> double {
        valid = true;
        double phi = eval_objective_scaled(w, xx);
        for (int k = 0; k < w.n_ineq; ++k) {
            if (ss(k) <= 0.0) { valid = false; return 0.0; }
            phi -= mu_now * std::log(ss(k));
        }
        for (int j = 0; j < w.n; ++j) {
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            if (std::isfinite(lo)) {
                if (xx(j) - lo <= 0.0) { valid = false; return 0.0; }
                phi -= mu_now * std::log(xx(j) - lo);
            }
            if (std::isfinite(hi)) {
                if (hi - xx(j) <= 0.0) { valid = false; return 0.0; }
                phi -= mu_now * std::log(hi - xx(j));
            }
        }
        return phi;
    };

    const bool trace = std::getenv("DESOPF_IP_TRACE") != nullptr;

    result.status = IpStatus::IterationLimit;
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        if (out_of_time()) break;

        // Optimality error at mu and at 0.
        Eigen::VectorXd r_d(w.n);
        for (int j = 0; j < w.n; ++j) r_d(j) = w.grad_f[static_cast<std::size_t>(j)] - z_lo(j) + z_hi(j);
        for (int i = 0; i < m; ++i) {
            for (const auto& t : w.jac[static_cast<std::size_t>(i)]) r_d(t.var) += t.coeff * y(i);
        }
        double comp0 = 0.0, comp_mu = 0.0;
        for (int k = 0; k < w.n_ineq; ++k) {
            comp0 = std::max(comp0, std::abs(s(k) * ys(k)));
            comp_mu = std::max(comp_mu, std::abs(s(k) * ys(k) - mu));
        }
        for (int j = 0; j < w.n; ++j) {
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            if (std::isfinite(lo)) {
                comp0 = std::max(comp0, std::abs((x(j) - lo) * z_lo(j)));
                comp_mu = std::max(comp_mu, std::abs((x(j) - lo) * z_lo(j) - mu));
            }
            if (std::isfinite(hi)) {
                comp0 = std::max(comp0, std::abs((hi - x(j)) * z_hi(j)));
                comp_mu = std::max(comp_mu, std::abs((hi - x(j)) * z_hi(j) - mu));
            }
        }
        double primal_inf = 0.0;
        for (int i = 0; i < m; ++i) {
            const int k = w.slack_of_row[static_cast<std::size_t>(i)];
            const double r = (k >= 0) ? w.g[static_cast<std::size_t>(i)] + s(k) : w.g[static_cast<std::size_t>(i)];
            primal_inf = std::max(primal_inf, std::abs(r));
        }
        double dual_norm1 = y.lpNorm<1>() + z_lo.lpNorm<1>() + z_hi.lpNorm<1>();
        const double denom = std::max(1, m + 2 * w.n);
        const double s_d = std::max(100.0, dual_norm1 / denom) / 100.0;
        const double err0 = std::max({r_d.lpNorm<Eigen::Infinity>() / s_d, primal_inf, comp0 / s_d});
        const double err_mu = std::max({r_d.lpNorm<Eigen::Infinity>() / s_d, primal_inf, comp_mu / s_d});

        result.dual_infeasibility = r_d.lpNorm<Eigen::Infinity>() / s_d;
        result.constraint_violation = primal_inf;

        if (err0 <= opt.tol) {
            result.status = IpStatus::LocallyOptimal;
            break;
        }
        if (err_mu <= 10.0 * mu && mu > mu_min) {
            mu = std::max(mu_min, std::min(mu / 5.0, std::pow(mu, 1.5)));
            best_theta = kInf;
            stall_count = 0;
            continue;
        }

        // Infeasibility is declared only at the barrier floor, when the
        // constraint violation is material and has stopped improving.
        const double theta_now = theta_of(w.g, s);
        if (theta_now < best_theta * 0.999) {
            best_theta = theta_now;
            stall_count = 0;
        } else if (primal_inf > std::max(1e-5, 1000.0 * opt.tol) && mu <= 4.0 * mu_min) {
            if (++stall_count > 20) {
                result.status = IpStatus::Infeasible;
                break;
            }
        }

        // Assemble the condensed KKT system.
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(8 * (w.n + m)));
        std::vector<std::tuple<int, int, double>> hess;
        for (int i = 0; i < m; ++i) {
            const RowSpec& row = w.rows[static_cast<std::size_t>(i)];
            if (!row.nonlinear) continue;
            const double weight = y(i) * row.scale * row.sign;
            if (weight == 0.0) continue;
            cs.nonlinear_constraints()[static_cast<std::size_t>(row.index)]->add_scaled_hessian(
                w.x_full, weight, hess);
        }
        for (const auto& term : cs.objective_residuals()) {
            term->add_scaled_hessian(w.x_full, w.obj_scale, hess);
        }

        Eigen::VectorXd sigma(w.n);
        for (int j = 0; j < w.n; ++j) {
            double v = 0.0;
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            if (std::isfinite(lo)) v += z_lo(j) / (x(j) - lo);
            if (std::isfinite(hi)) v += z_hi(j) / (hi - x(j));
            sigma(j) = v;
        }

        const int dim = w.n + m;
        Eigen::VectorXd rhs(dim);
        for (int j = 0; j < w.n; ++j) {
            double v = w.grad_f[static_cast<std::size_t>(j)];
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            if (std::isfinite(lo)) v -= mu / (x(j) - lo);
            if (std::isfinite(hi)) v += mu / (hi - x(j));
            rhs(j) = -v;
        }
        for (int i = 0; i < m; ++i) {
            for (const auto& t : w.jac[static_cast<std::size_t>(i)]) rhs(t.var) -= t.coeff * y(i);
        }
        for (int i = 0; i < m; ++i) {
            const int k = w.slack_of_row[static_cast<std::size_t>(i)];
            rhs(w.n + i) = (k >= 0) ? -(w.g[static_cast<std::size_t>(i)] + mu / ys(k))
                                    : -w.g[static_cast<std::size_t>(i)];
        }

        Eigen::VectorXd dx(w.n), dy(m);
        bool solved = false;
        double delta_x = 0.0;
        double delta_c = 0.0;
        for (int attempt = 0; attempt < 30 && !solved; ++attempt) {
            trips.clear();
            for (const auto& [a, b, v] : hess) {
                const int la = w.to_local[static_cast<std::size_t>(a)];
                const int lb = w.to_local[static_cast<std::size_t>(b)];
                if (la < 0 || lb < 0) continue;
                const int r = std::max(la, lb), c = std::min(la, lb);
                trips.emplace_back(r, c, v);
            }
            for (int j = 0; j < w.n; ++j) trips.emplace_back(j, j, sigma(j) + delta_x);
            for (int i = 0; i < m; ++i) {
                for (const auto& t : w.jac[static_cast<std::size_t>(i)]) {
                    trips.emplace_back(w.n + i, t.var, t.coeff);
                }
                const int k = w.slack_of_row[static_cast<std::size_t>(i)];
                const double d = (k >= 0) ? s(k) / ys(k) : 0.0;
                trips.emplace_back(w.n + i, w.n + i, -(d + delta_c + 1e-12));
            }
            Eigen::SparseMatrix<double> kkt(dim, dim);
            kkt.setFromTriplets(trips.begin(), trips.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
            ldlt.compute(kkt.selfadjointView<Eigen::Lower>());
            bool ok = (ldlt.info() == Eigen::Success);
            int n_pos = 0, n_neg = 0, n_zero = 0;
            if (ok) {
                const auto& d = ldlt.vectorD();
                for (int i = 0; i < dim; ++i) {
                    if (!std::isfinite(d(i)) || std::abs(d(i)) < 1e-300) { ++n_zero; }
                    else if (d(i) > 0) { ++n_pos; }
                    else { ++n_neg; }
                }
                ok = (n_zero == 0 && n_pos == w.n && n_neg == m);
            }
            if (ok) {
                const Eigen::VectorXd sol = ldlt.solve(rhs);
                if (sol.allFinite()) {
                    dx = sol.head(w.n);
                    dy = sol.tail(m);
                    solved = true;
                    delta_last = delta_x;
                    break;
                }
            }
            if (n_zero > 0 && delta_c == 0.0) delta_c = 1e-10 * std::max(1.0, mu);
            delta_x = (delta_x == 0.0) ? std::max(1e-8, delta_last / 3.0) : delta_x * 8.0;
            if (delta_x > 1e40) break;
        }
        if (!solved) {
            result.status = IpStatus::Error;
            break;
        }

        // Recover slack and bound-dual steps.
        Eigen::VectorXd ds(w.n_ineq), dys(w.n_ineq);
        for (int i = 0; i < m; ++i) {
            const int k = w.slack_of_row[static_cast<std::size_t>(i)];
            if (k < 0) continue;
            double jdx = 0.0;
            for (const auto& t : w.jac[static_cast<std::size_t>(i)]) jdx += t.coeff * dx(t.var);
            ds(k) = -(w.g[static_cast<std::size_t>(i)] + s(k)) - jdx;
            dys(k) = (mu - s(k) * ys(k) - ys(k) * ds(k)) / s(k);
        }
        Eigen::VectorXd dz_lo = Eigen::VectorXd::Zero(w.n), dz_hi = Eigen::VectorXd::Zero(w.n);
        for (int j = 0; j < w.n; ++j) {
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            if (std::isfinite(lo)) dz_lo(j) = (mu - (x(j) - lo) * z_lo(j) - z_lo(j) * dx(j)) / (x(j) - lo);
            if (std::isfinite(hi)) dz_hi(j) = (mu - (hi - x(j)) * z_hi(j) + z_hi(j) * dx(j)) / (hi - x(j));
        }

        // Fraction-to-boundary step limits.
        const double tau = std::max(0.99, 1.0 - mu);
        double alpha_p = 1.0, alpha_d = 1.0;
        for (int k = 0; k < w.n_ineq; ++k) {
            if (ds(k) < 0.0) alpha_p = std::min(alpha_p, -tau * s(k) / ds(k));
            if (dys(k) < 0.0) alpha_d = std::min(alpha_d, -tau * ys(k) / dys(k));
        }
        for (int j = 0; j < w.n; ++j) {
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            if (std::isfinite(lo)) {
                if (dx(j) < 0.0) alpha_p = std::min(alpha_p, -tau * (x(j) - lo) / dx(j));
                if (dz_lo(j) < 0.0) alpha_d = std::min(alpha_d, -tau * z_lo(j) / dz_lo(j));
            }
            if (std::isfinite(hi)) {
                if (dx(j) > 0.0) alpha_p = std::min(alpha_p, tau * (hi - x(j)) / dx(j));
                if (dz_hi(j) < 0.0) alpha_d = std::min(alpha_d, -tau * z_hi(j) / dz_hi(j));
            }
        }

        // Armijo backtracking on an l1 exact-penalty merit function.
        const double rho = std::max(1.0, 2.0 * (y.lpNorm<Eigen::Infinity>() +
                                                (w.n_ineq ? ys.lpNorm<Eigen::Infinity>() : 0.0)));
        bool valid = false;
        const double theta0 = theta_of(w.g, s);
        const double phi0 = barrier_value(x, s, mu, valid) + rho * theta0;
        double dir_deriv = 0.0;
        {
            for (int j = 0; j < w.n; ++j) {
                double gph = w.grad_f[static_cast<std::size_t>(j)];
                const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
                if (std::isfinite(lo)) gph -= mu / (x(j) - lo);
                if (std::isfinite(hi)) gph += mu / (hi - x(j));
                dir_deriv += gph * dx(j);
            }
            for (int k = 0; k < w.n_ineq; ++k) dir_deriv += (-mu / s(k)) * ds(k);
            dir_deriv -= rho * theta0;
        }

        double alpha = alpha_p;
        bool accepted = false;
        Eigen::VectorXd x_try(w.n), s_try(w.n_ineq);
        for (int bt = 0; bt < 40; ++bt) {
            x_try = x + alpha * dx;
            s_try = s + alpha * ds;
            bool ok = true;
            const double phi_obj = barrier_value(x_try, s_try, mu, ok);
            if (ok) {
                eval_all(w, x_try, false);
                const double theta_try = theta_of(w.g, s_try);
                const double phi_try = phi_obj + rho * theta_try;
                if (phi_try <= phi0 + 1e-4 * alpha * std::min(0.0, dir_deriv) + 1e-12 ||
                    theta_try < theta0 * (1.0 - 1e-4 * alpha)) {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
            if (alpha < 1e-12) break;
        }
        if (trace) {
            std::fprintf(stderr,
                         "ip iter=%d mu=%.2e err0=%.2e errmu=%.2e theta=%.2e alpha=%.2e "
                         "accepted=%d dphi=%.2e\n",
                         iter, mu, err0, err_mu, theta0, alpha, accepted ? 1 : 0, dir_deriv);
        }
        if (!accepted) {
            if (++ls_failures >= 5) {
                result.status = (primal_inf > std::max(1e-5, 1000.0 * opt.tol))
                                    ? IpStatus::Infeasible
                                    : IpStatus::IterationLimit;
                break;
            }
            eval_all(w, x, true);
            continue;
        }
        ls_failures = 0;

        x = x_try;
        s = s_try;
        y += alpha_d * dy;
        eval_all(w, x, true);
        for (int i = 0; i < m; ++i) {
            const int k = w.slack_of_row[static_cast<std::size_t>(i)];
            if (k < 0) continue;
            // Slack correction: a slack may never fall below the room the
            // constraint actually leaves, which keeps degenerate rows mobile.
            s(k) = std::max(s(k), -w.g[static_cast<std::size_t>(i)]);
            s(k) = std::max(s(k), 1e-14);
            ys(k) = std::clamp(ys(k) + alpha_d * dys(k), kDualFloor, kDualCap);
            // kappa-sigma guard against drifting slack duals.
            const double ref = mu / s(k);
            ys(k) = std::clamp(ys(k), ref / 1e10, ref * 1e10);
        }
        for (int j = 0; j < w.n; ++j) {
            z_lo(j) = std::clamp(z_lo(j) + alpha_d * dz_lo(j), 0.0, kDualCap);
            z_hi(j) = std::clamp(z_hi(j) + alpha_d * dz_hi(j), 0.0, kDualCap);
            // Keep bound duals consistent with the barrier (IPOPT's kappa-sigma guard).
            const double lo = w.lower[static_cast<std::size_t>(j)], hi = w.upper[static_cast<std::size_t>(j)];
            const double kappa = 1e10;
            if (std::isfinite(lo)) {
                const double ref = mu / (x(j) - lo);
                z_lo(j) = std::clamp(z_lo(j), ref / kappa, ref * kappa);
            }
            if (std::isfinite(hi)) {
                const double ref = mu / (hi - x(j));
                z_hi(j) = std::clamp(z_hi(j), ref / kappa, ref * kappa);
            }
        }
    }

    result.iterations = iter;
    sync_full(w, x);
    result.x_full = w.x_full;
    result.objective = cs.objective_value(result.x_full);
    return result;
}

}  // namespace desopf::solve
