#include <doctest.h>

#include <cmath>

#include "desopf/solve/backend.hpp"
#include "desopf/solve/interior_point.hpp"
#include "desopf/solve/mip.hpp"
#include "desopf/solve/simplex.hpp"

using namespace desopf;
using namespace desopf::model;
using namespace desopf::solve;

namespace {

LpProblem small_lp() {
    // min -3x - 2y  s.t.  x + y <= 4, x + 3y <= 6, 0 <= x,y <= 10  ->  (4, 0)
    LpProblem p;
    p.num_cols = 2;
    p.cost = {-3.0, -2.0};
    p.lower = {0.0, 0.0};
    p.upper = {10.0, 10.0};
    p.rows.push_back({{{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 4.0, 0});
    p.rows.push_back({{{0, 1.0}, {1, 3.0}}, Sense::LessEqual, 6.0, 1});
    return p;
}

}  // namespace

TEST_CASE("simplex solves a textbook LP") {
    const LpSolution sol = solve_lp(small_lp());
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(4.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
    CHECK(sol.objective == doctest::Approx(-12.0));
}

TEST_CASE("simplex honours equality rows and variable bounds") {
    // min x - y  s.t.  x + y = 2, x in [0, 3], y in [0, 1.5]
    LpProblem p;
    p.num_cols = 2;
    p.cost = {1.0, -1.0};
    p.lower = {0.0, 0.0};
    p.upper = {3.0, 1.5};
    p.rows.push_back({{{0, 1.0}, {1, 1.0}}, Sense::Equal, 2.0, 0});
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[1] == doctest::Approx(1.5));
    CHECK(sol.x[0] == doctest::Approx(0.5));
    CHECK(sol.objective == doctest::Approx(-1.0));
}

TEST_CASE("simplex detects infeasibility and reports the offending rows") {
    LpProblem p;
    p.num_cols = 1;
    p.cost = {0.0};
    p.lower = {0.0};
    p.upper = {1.0};
    p.rows.push_back({{{0, 1.0}}, Sense::GreaterEqual, 5.0, 77});
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Infeasible);
    REQUIRE(sol.infeasible_rows.size() == 1);
    CHECK(sol.infeasible_rows[0] == 77);
}

TEST_CASE("simplex detects unboundedness") {
    LpProblem p;
    p.num_cols = 2;
    p.cost = {-1.0, 0.0};
    p.lower = {0.0, 0.0};
    p.upper = {kInf, kInf};
    p.rows.push_back({{{0, 1.0}, {1, -1.0}}, Sense::LessEqual, 1.0, 0});
    CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("simplex handles free and negatively bounded variables") {
    // min x + 2y  s.t.  x + y >= -3, y >= -5, x free
    LpProblem p;
    p.num_cols = 2;
    p.cost = {1.0, 2.0};
    p.lower = {-kInf, -5.0};
    p.upper = {kInf, kInf};
    p.rows.push_back({{{0, 1.0}, {1, 1.0}}, Sense::GreaterEqual, -3.0, 0});
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[1] == doctest::Approx(-5.0));
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.objective == doctest::Approx(-8.0));
}

TEST_CASE("branch and bound solves a small knapsack") {
    // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, binaries -> min form
    LpProblem p;
    p.num_cols = 3;
    p.cost = {-5.0, -4.0, -3.0};
    p.lower = {0.0, 0.0, 0.0};
    p.upper = {1.0, 1.0, 1.0};
    p.rows.push_back({{{0, 2.0}, {1, 3.0}, {2, 1.0}}, Sense::LessEqual, 5.0, 0});
    const MipSolution sol = solve_mip(p, {true, true, true});
    REQUIRE(sol.status == MipStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-9.0));  // a=1, b=1 infeasible; a=1,c=1 + b=0 -> 8? enumerated: a+c=8, a+b=9 w=5 feasible
}

TEST_CASE("branch and bound respects general integers") {
    // min -x - y s.t. 3x + 5y <= 15.5, x,y integer >= 0
    LpProblem p;
    p.num_cols = 2;
    p.cost = {-1.0, -1.0};
    p.lower = {0.0, 0.0};
    p.upper = {kInf, kInf};
    p.rows.push_back({{{0, 3.0}, {1, 5.0}}, Sense::LessEqual, 15.5, 0});
    const MipSolution sol = solve_mip(p, {true, true});
    REQUIRE(sol.status == MipStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-5.0));  // x=5, y=0
}

namespace {

// x0^2 + x1^2 residual with full analytic derivatives, for IP tests.
class CircleConstraint final : public NonlinearConstraint {
public:
    CircleConstraint(int x, int y) : vars_{x, y} {}
    double value(std::span<const double> x) const override {
        return x[static_cast<std::size_t>(vars_[0])] * x[static_cast<std::size_t>(vars_[0])] +
               x[static_cast<std::size_t>(vars_[1])] * x[static_cast<std::size_t>(vars_[1])];
    }
    void gradient(std::span<const double> x, std::vector<LinearTerm>& out) const override {
        out.push_back({vars_[0], 2.0 * x[static_cast<std::size_t>(vars_[0])]});
        out.push_back({vars_[1], 2.0 * x[static_cast<std::size_t>(vars_[1])]});
    }
    void add_scaled_hessian(std::span<const double>, double weight,
                            std::vector<std::tuple<int, int, double>>& out) const override {
        out.emplace_back(vars_[0], vars_[0], 2.0 * weight);
        out.emplace_back(vars_[1], vars_[1], 2.0 * weight);
    }
    const std::vector<int>& variables() const override { return vars_; }

private:
    std::vector<int> vars_;
};

}  // namespace

TEST_CASE("interior point solves an equality-constrained analytic problem") {
    // min x + y  s.t.  x^2 + y^2 = 1  ->  x = y = -1/sqrt(2)
    ConstraintSystem cs;
    const int x = cs.add_variable("x", -5.0, 5.0, VarKind::Continuous, 0.5);
    const int y = cs.add_variable("y", -5.0, 5.0, VarKind::Continuous, -0.5);
    cs.add_objective_term(x, 1.0);
    cs.add_objective_term(y, 1.0);
    auto circle = std::make_unique<CircleConstraint>(x, y);
    circle->name = "circle";
    circle->sense = Sense::Equal;
    circle->rhs = 1.0;
    cs.add_nonlinear(std::move(circle));

    NlpView view;
    view.system = &cs;
    view.free_vars = {x, y};
    view.nonlinear_rows = {0};
    view.x_base = {0.0, 0.0};
    const IpResult sol = solve_nlp(view);
    REQUIRE(sol.status == IpStatus::LocallyOptimal);
    CHECK(sol.x_full[0] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-6));
    CHECK(sol.x_full[1] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("interior point handles inequality and bounds like the simplex") {
    // Same LP as small_lp, solved through the NLP path.
    ConstraintSystem cs;
    const int x = cs.add_variable("x", 0.0, 10.0);
    const int y = cs.add_variable("y", 0.0, 10.0);
    cs.add_objective_term(x, -3.0);
    cs.add_objective_term(y, -2.0);
    cs.add_linear({"r1", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 4.0});
    cs.add_linear({"r2", {{x, 1.0}, {y, 3.0}}, Sense::LessEqual, 6.0});

    NlpView view;
    view.system = &cs;
    view.free_vars = {x, y};
    view.linear_rows = {0, 1};
    view.x_base = {0.0, 0.0};
    const IpResult sol = solve_nlp(view);
    REQUIRE(sol.status == IpStatus::LocallyOptimal);
    CHECK(sol.x_full[0] == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(sol.x_full[1] == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("interior point flags an infeasible system") {
    // x^2 + y^2 = 1 with x,y >= 2 cannot hold.
    ConstraintSystem cs;
    const int x = cs.add_variable("x", 2.0, 5.0, VarKind::Continuous, 2.0);
    const int y = cs.add_variable("y", 2.0, 5.0, VarKind::Continuous, 2.0);
    auto circle = std::make_unique<CircleConstraint>(x, y);
    circle->name = "circle";
    circle->sense = Sense::Equal;
    circle->rhs = 1.0;
    cs.add_nonlinear(std::move(circle));

    NlpView view;
    view.system = &cs;
    view.free_vars = {x, y};
    view.nonlinear_rows = {0};
    view.x_base = {2.0, 2.0};
    IpOptions opt;
    opt.max_iter = 200;
    const IpResult sol = solve_nlp(view, opt);
    CHECK(sol.status != IpStatus::LocallyOptimal);
}

TEST_CASE("builtin backend milp_solve splits independent blocks") {
    ConstraintSystem cs;
    const int a = cs.add_variable("a", 0.0, 1.0, VarKind::Binary);
    const int xa = cs.add_variable("xa", 0.0, 10.0);
    const int b = cs.add_variable("b", 0.0, 1.0, VarKind::Binary);
    const int xb = cs.add_variable("xb", 0.0, 10.0);
    // Block 1: xa <= 4a, maximize xa  (min -xa)
    cs.add_linear({"blk1", {{xa, 1.0}, {a, -4.0}}, Sense::LessEqual, 0.0});
    // Block 2: xb <= 3b
    cs.add_linear({"blk2", {{xb, 1.0}, {b, -3.0}}, Sense::LessEqual, 0.0});
    cs.add_objective_term(xa, -1.0);
    cs.add_objective_term(xb, -1.0);
    cs.add_objective_term(a, 1.0);
    cs.add_objective_term(b, 2.5);

    auto backend = make_builtin_backend();
    const BackendResult res = backend->milp_solve(cs, {});
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.x[static_cast<std::size_t>(a)] == doctest::Approx(1.0));
    CHECK(res.x[static_cast<std::size_t>(xa)] == doctest::Approx(4.0));
    CHECK(res.x[static_cast<std::size_t>(b)] == doctest::Approx(1.0));
    CHECK(res.x[static_cast<std::size_t>(xb)] == doctest::Approx(3.0));
    CHECK(res.objective == doctest::Approx(-4.0 + 1.0 - 3.0 + 2.5));
    CHECK(res.rel_gap == doctest::Approx(0.0));
}

TEST_CASE("builtin backend reports the infeasible constraint family") {
    ConstraintSystem cs;
    const int h = cs.add_variable("heat_output", 0.0, 10.0);
    cs.add_linear({"heat_balance[B1,t3]", {{h, 1.0}}, Sense::Equal, 25.0});
    auto backend = make_builtin_backend();
    const BackendResult res = backend->milp_solve(cs, {});
    REQUIRE(res.status == SolveStatus::Infeasible);
    REQUIRE_FALSE(res.conflicts.empty());
    CHECK(res.conflicts[0] == "heat_balance[B1,t3]");
}

TEST_CASE("fixed variables are honoured by both solve paths") {
    ConstraintSystem cs;
    const int x = cs.add_variable("x", 0.0, 10.0);
    const int y = cs.add_variable("y", 0.0, 10.0);
    cs.add_linear({"sum", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 6.0});
    cs.add_objective_term(x, -1.0);
    cs.add_objective_term(y, -1.0);
    cs.fix_variable(y, 2.0);

    auto backend = make_builtin_backend();
    const BackendResult milp = backend->milp_solve(cs, {});
    REQUIRE(milp.status == SolveStatus::Optimal);
    CHECK(milp.x[static_cast<std::size_t>(x)] == doctest::Approx(4.0));
    CHECK(milp.x[static_cast<std::size_t>(y)] == doctest::Approx(2.0));

    const BackendResult nlp = backend->nlp_solve(cs, {}, {});
    REQUIRE(nlp.status == SolveStatus::LocallyOptimal);
    CHECK(nlp.x[static_cast<std::size_t>(x)] == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(nlp.x[static_cast<std::size_t>(y)] == doctest::Approx(2.0));

    // A fixing outside the declared bounds is an infeasible system.
    cs.fix_variable(y, 50.0);
    const BackendResult bad = backend->milp_solve(cs, {});
    CHECK(bad.status == SolveStatus::Infeasible);
}
