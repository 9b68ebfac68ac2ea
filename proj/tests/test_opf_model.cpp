#include <doctest.h>

#include <cmath>
#include <random>

#include "desopf/opf/opf_model.hpp"
#include "desopf/solve/backend.hpp"
#include "support/test_cases.hpp"

using namespace desopf;
using namespace desopf::opf;
using namespace desopf::testsupport;

namespace {

double fd_partial(const model::NonlinearConstraint& c, std::vector<double> x, int var,
                  double h = 1e-5) {
    x[static_cast<std::size_t>(var)] += h;
    const double up = c.value(x);
    x[static_cast<std::size_t>(var)] -= 2.0 * h;
    const double down = c.value(x);
    return (up - down) / (2.0 * h);
}

std::vector<double> analytic_gradient(const model::NonlinearConstraint& c,
                                      const std::vector<double>& x) {
    std::vector<model::LinearTerm> terms;
    c.gradient(x, terms);
    std::vector<double> g(x.size(), 0.0);
    for (const auto& t : terms) g[static_cast<std::size_t>(t.var)] += t.coeff;
    return g;
}

// Two-neighbour balance residual over a 7-variable layout:
// inj=0, v_n=1, th_n=2, v_a=3, th_a=4, v_b=5, th_b=6.
std::unique_ptr<PowerBalanceResidual> sample_balance(bool reactive) {
    std::vector<PowerBalanceResidual::Neighbour> nbs = {
        {3, 4, -3.2, 4.1},
        {5, 6, -1.7, 2.6},
    };
    return std::make_unique<PowerBalanceResidual>(reactive, 0, 1, 2, 4.9, -6.7, nbs);
}

std::vector<double> random_state(std::mt19937& rng) {
    std::uniform_real_distribution<double> v(0.92, 1.08);
    std::uniform_real_distribution<double> th(-0.3, 0.3);
    std::uniform_real_distribution<double> inj(-0.5, 0.5);
    return {inj(rng), v(rng), th(rng), v(rng), th(rng), v(rng), th(rng)};
}

}  // namespace

TEST_CASE("flat voltage profile with zero injections satisfies the nodal balances") {
    for (bool reactive : {false, true}) {
        auto res = sample_balance(reactive);
        // Row sums of the admittance matrix vanish: self = -(sum of mutuals).
        std::vector<PowerBalanceResidual::Neighbour> nbs = {{3, 4, 2.5, -4.0}, {5, 6, 1.5, -2.0}};
        PowerBalanceResidual balanced(reactive, 0, 1, 2, -(2.5 + 1.5), -(-4.0 - 2.0), nbs);
        const std::vector<double> flat = {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0};
        CHECK(balanced.value(flat) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("nodal balance gradients match central finite differences") {
    std::mt19937 rng(101);
    for (bool reactive : {false, true}) {
        auto res = sample_balance(reactive);
        for (int trial = 0; trial < 50; ++trial) {
            const std::vector<double> x = random_state(rng);
            const std::vector<double> g = analytic_gradient(*res, x);
            for (int var = 0; var < 7; ++var) {
                const double fd = fd_partial(*res, x, var);
                CHECK(std::abs(g[static_cast<std::size_t>(var)] - fd) < 1e-6);
            }
        }
    }
}

TEST_CASE("current limit gradients match central finite differences") {
    std::mt19937 rng(202);
    for (double scale : {1.0, 1.0 / 9.0}) {
        CurrentLimitResidual res(1, 2, 3, 4, scale);
        for (int trial = 0; trial < 50; ++trial) {
            const std::vector<double> x = random_state(rng);
            const std::vector<double> g = analytic_gradient(res, x);
            for (int var = 1; var <= 4; ++var) {
                const double fd = fd_partial(res, x, var);
                CHECK(std::abs(g[static_cast<std::size_t>(var)] - fd) < 1e-6);
            }
        }
    }
}

TEST_CASE("hessians match finite differences of the gradient") {
    std::mt19937 rng(303);
    std::uniform_real_distribution<double> wdist(-2.0, 2.0);
    auto check_hessian = [&](const model::NonlinearConstraint& c, const std::vector<double>& x,
                             double weight) {
        std::vector<std::tuple<int, int, double>> trips;
        c.add_scaled_hessian(x, weight, trips);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(7, 7);
        for (const auto& [a, b, v] : trips) {
            h(a, b) += v;
            if (a != b) h(b, a) += v;
        }
        const double step = 1e-5;
        for (int col = 0; col < 7; ++col) {
            std::vector<double> xp = x, xm = x;
            xp[static_cast<std::size_t>(col)] += step;
            xm[static_cast<std::size_t>(col)] -= step;
            const auto gp = analytic_gradient(c, xp);
            const auto gm = analytic_gradient(c, xm);
            for (int row = 0; row < 7; ++row) {
                const double fd = weight * (gp[static_cast<std::size_t>(row)] -
                                            gm[static_cast<std::size_t>(row)]) /
                                  (2.0 * step);
                CHECK(std::abs(h(row, col) - fd) < 1e-5);
            }
        }
    };
    for (bool reactive : {false, true}) {
        auto res = sample_balance(reactive);
        for (int trial = 0; trial < 10; ++trial) {
            check_hessian(*res, random_state(rng), wdist(rng));
        }
    }
    CurrentLimitResidual limit(1, 2, 3, 4, 1.0 / 9.0);
    for (int trial = 0; trial < 10; ++trial) {
        check_hessian(limit, random_state(rng), wdist(rng));
    }
}

TEST_CASE("wye current limit evaluates to one ninth of the delta value") {
    CurrentLimitResidual delta(1, 2, 3, 4, 1.0);
    CurrentLimitResidual wye(1, 2, 3, 4, 1.0 / 9.0);
    std::mt19937 rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<double> x = random_state(rng);
        CHECK(wye.value(x) == doctest::Approx(delta.value(x) / 9.0).epsilon(1e-14));
    }
    const std::vector<double> same = {0.0, 1.03, 0.21, 1.03, 0.21, 1.0, 0.0};
    CHECK(delta.value(same) == doctest::Approx(0.0));
    CHECK(wye.value(same) == doctest::Approx(0.0));
}

namespace {

// One building on bus 2 behind a purely reactive branch of 0.1 pu; a flat
// 100 kW purchase at 1 MVA base gives injection -0.1 pu at bus 2, whose exact
// solution satisfies 5 sin(2 theta) = -0.1 with V = cos(theta).
des::CaseData two_bus_case() {
    des::CaseData c = toy_grid_only_case();
    c.buildings[0].elec_demand_kw["year"] = flat(100.0);
    c.load_power_factor = 1.0;  // active-power-only study
    network::NetworkTopology net;
    network::Bus slack;
    slack.id = 1;
    slack.kind = network::BusKind::Slack;
    network::Bus load;
    load.id = 2;
    load.kind = network::BusKind::LoadGenerator;
    load.building_ids = {"H1"};
    net.buses = {slack, load};
    const double z_base = 400.0 * 400.0 / 1e6;  // 0.16 ohm
    net.branches.push_back({1, 2, 0.0, 0.1 * z_base, 2000.0});
    net.v_bounds = {0.9, 1.1};
    c.network = net;
    return c;
}

}  // namespace

TEST_CASE("two-bus reactive branch matches the analytic solution") {
    const des::CaseData c = two_bus_case();
    des::DesModel m = des::build_des_model(c);
    ReactiveLoadModel reactive{c.load_power_factor};
    const OpfAttachment opf = attach_opf(m, c, network::LoadConfiguration::Delta, reactive);

    auto backend = solve::make_builtin_backend();
    solve::NlpSolveOptions opt;
    opt.tol = 1e-9;
    const auto res = backend->nlp_solve(m.system, {}, opt);
    REQUIRE(res.status == solve::SolveStatus::LocallyOptimal);

    const OpfSolution sol = extract_opf_solution(m, opf, res.x, c);
    // Frozen from the quadratic u^2 - u + 1e-4 = 0, u = V2^2.
    const double u = (1.0 + std::sqrt(1.0 - 4e-4)) / 2.0;
    const double v2_expected = std::sqrt(u);
    const double theta2_expected = -std::asin(0.1 / (10.0 * v2_expected)) * 180.0 / std::numbers::pi;
    const int k = sol.bst(1, 0, 0);
    CHECK(sol.v_pu[static_cast<std::size_t>(k)] == doctest::Approx(v2_expected).epsilon(1e-6));
    CHECK(sol.theta_deg[static_cast<std::size_t>(k)] ==
          doctest::Approx(theta2_expected).epsilon(1e-4));
    CHECK(sol.theta_deg[static_cast<std::size_t>(k)] == doctest::Approx(-0.573).epsilon(1e-3));
    CHECK(sol.v_pu[static_cast<std::size_t>(k)] == doctest::Approx(0.99995).epsilon(1e-6));
    // Net consumption shows up as a negative injection.
    CHECK(sol.p_pu[static_cast<std::size_t>(k)] == doctest::Approx(-0.1).epsilon(1e-7));
}

TEST_CASE("linking pins passive nodes to zero and scales building flows by the power base") {
    SmallCaseSpec spec;
    spec.n_buildings = 1;
    spec.n_seasons = 1;
    spec.with_storage = false;
    const des::CaseData base = small_random_case(spec);

    // Insert a passive bus between slack and the load bus.
    des::CaseData c = base;
    network::NetworkTopology net;
    network::Bus slack{1, network::BusKind::Slack, {}};
    network::Bus mid{2, network::BusKind::Passive, {}};
    network::Bus load{3, network::BusKind::LoadGenerator, {"B1"}};
    net.buses = {slack, mid, load};
    net.branches.push_back({1, 2, 0.05, 0.03, 400.0});
    net.branches.push_back({2, 3, 0.05, 0.03, 400.0});
    c.network = net;

    des::DesModel m = des::build_des_model(c);
    ReactiveLoadModel reactive{0.95};
    const OpfAttachment opf = attach_opf(m, c, network::LoadConfiguration::Delta, reactive);

    const int k_mid = opf.index.bst(1, 0, 5);
    CHECK(m.system.variable(opf.index.p_inj[static_cast<std::size_t>(k_mid)]).fixed_value == 0.0);
    CHECK(m.system.variable(opf.index.q_inj[static_cast<std::size_t>(k_mid)]).fixed_value == 0.0);

    // Buying 10 kW with no exports or charging: P = -10/1000 pu.
    const auto& rows = m.system.linear_constraints();
    const model::LinearConstraint* link = nullptr;
    for (const auto& row : rows) {
        if (row.name.rfind("link_p[3,", 0) == 0 && row.name.find(",6]") != std::string::npos) {
            link = &row;
            break;
        }
    }
    REQUIRE(link != nullptr);
    std::vector<double> x(static_cast<std::size_t>(m.system.num_variables()), 0.0);
    x[static_cast<std::size_t>(
        m.index.grid_import[static_cast<std::size_t>(m.index.ist(0, 0, 5))])] = 10.0;
    const int p_var = opf.index.p_inj[static_cast<std::size_t>(opf.index.bst(2, 0, 5))];
    // Solve the row for p: residual must vanish at p = -0.01.
    double constant = 0.0;
    double p_coeff = 0.0;
    for (const auto& t : link->terms) {
        if (t.var == p_var) p_coeff = t.coeff;
        else constant += t.coeff * x[static_cast<std::size_t>(t.var)];
    }
    CHECK(p_coeff == doctest::Approx(1.0));
    CHECK((link->rhs - constant) / p_coeff == doctest::Approx(-0.01).epsilon(1e-12));
}
