#include <doctest.h>

#include <cmath>
#include <random>

#include "desopf/network/admittance.hpp"
#include "desopf/network/per_unit.hpp"
#include "desopf/network/topology_io.hpp"

using namespace desopf;
using namespace desopf::network;

namespace {

NetworkTopology chain_topology(int n_buses, double r_ohm, double x_ohm, double i_max = 200.0) {
    NetworkTopology t;
    for (int i = 1; i <= n_buses; ++i) {
        Bus bus;
        bus.id = i;
        bus.kind = (i == 1) ? BusKind::Slack : BusKind::Passive;
        t.buses.push_back(bus);
    }
    for (int i = 1; i < n_buses; ++i) {
        t.branches.push_back({i, i + 1, r_ohm, x_ohm, i_max});
    }
    return t;
}

}  // namespace

TEST_CASE("series admittance of a purely resistive branch") {
    Branch b{1, 2, 1.0, 0.0, 100.0};
    const auto y = series_admittance(b, 1.0);
    CHECK(y.real() == doctest::Approx(1.0));
    CHECK(y.imag() == doctest::Approx(0.0));
}

TEST_CASE("series admittance of a purely reactive branch") {
    Branch b{1, 2, 0.0, 1.0, 100.0};
    const auto y = series_admittance(b, 1.0);
    CHECK(y.real() == doctest::Approx(0.0));
    CHECK(y.imag() == doctest::Approx(-1.0));
}

TEST_CASE("series admittance of a complex branch") {
    // 1/(0.1 + 0.1j) = (0.1 - 0.1j)/0.02 = 5 - 5j
    Branch b{1, 2, 0.1, 0.1, 100.0};
    const auto y = series_admittance(b, 1.0);
    CHECK(y.real() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(y.imag() == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(series_admittance_sq(b, 1.0) == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("zero-impedance branch is rejected") {
    Branch b{1, 2, 0.0, 0.0, 100.0};
    CHECK_THROWS_AS(series_admittance(b, 1.0), InvalidInput);
}

TEST_CASE("two-bus admittance matrix") {
    NetworkTopology t = chain_topology(2, 0.1, 0.1);
    t.bases.s_base_va = 1.0;  // z_base = v_base^2 / s_base
    t.bases.v_base_v = 1.0;
    const auto y = assemble_admittance(t);
    CHECK(y.y(0, 0).real() == doctest::Approx(5.0));
    CHECK(y.y(0, 0).imag() == doctest::Approx(-5.0));
    CHECK(y.y(0, 1).real() == doctest::Approx(-5.0));
    CHECK(y.y(0, 1).imag() == doctest::Approx(5.0));
    CHECK(y.y(1, 1).real() == doctest::Approx(5.0));
}

TEST_CASE("chain of two identical branches doubles the middle self-admittance") {
    NetworkTopology t = chain_topology(3, 0.1, 0.1);
    t.bases.s_base_va = 1.0;
    t.bases.v_base_v = 1.0;
    const auto y = assemble_admittance(t);
    CHECK(y.y(1, 1).real() == doctest::Approx(10.0));
    CHECK(y.y(1, 1).imag() == doctest::Approx(-10.0));
}

TEST_CASE("admittance symmetry and zero row sums on random radial networks") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> imp(0.01, 0.5);
    std::uniform_int_distribution<int> size(2, 12);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = size(rng);
        NetworkTopology t;
        for (int i = 1; i <= n; ++i) {
            Bus bus;
            bus.id = i;
            bus.kind = (i == 1) ? BusKind::Slack : BusKind::Passive;
            t.buses.push_back(bus);
        }
        std::uniform_int_distribution<int> parent_pick(1, 1);
        for (int i = 2; i <= n; ++i) {
            std::uniform_int_distribution<int> parent(1, i - 1);
            t.branches.push_back({parent(rng), i, imp(rng), coin(rng) ? imp(rng) : 0.0, 100.0});
        }
        const auto y = assemble_admittance(t);
        for (int a = 0; a < n; ++a) {
            std::complex<double> row_sum = 0.0;
            for (int b = 0; b < n; ++b) {
                row_sum += y.y(a, b);
                CHECK(std::abs(y.y(a, b) - y.y(b, a)) < 1e-12);
            }
            CHECK(std::abs(row_sum) < 1e-12);
        }
    }
}

TEST_CASE("disconnected network names the isolated buses") {
    NetworkTopology t = chain_topology(4, 0.1, 0.1);
    t.branches.pop_back();  // bus 4 is now isolated
    CHECK_THROWS_WITH_AS(assemble_admittance(t),
                         doctest::Contains("disconnected"), StructuralError);
    try {
        assemble_admittance(t);
    } catch (const StructuralError& err) {
        CHECK(std::string(err.what()).find("4") != std::string::npos);
    }
}

TEST_CASE("current limit payload for the delta configuration") {
    // yhat = 10 pu, I_max_pu = 0.5  ->  rhs = 0.25 / 100 = 0.0025
    PerUnitBases bases;
    bases.s_base_va = 1.0;
    bases.v_base_v = 1.0;  // z_base = 1, i_base = 1/sqrt(3)
    Branch b{1, 2, 0.1, 0.0, 0.5 / std::sqrt(3.0)};  // i_max_pu = 0.5
    const auto payload = current_limit_squared(b, LoadConfiguration::Delta, bases);
    CHECK(payload.admittance_sq == doctest::Approx(100.0));
    CHECK(payload.rhs == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(payload.voltage_diff_scale == doctest::Approx(1.0));
}

TEST_CASE("wye configuration scales the squared voltage term by one ninth") {
    PerUnitBases bases;
    Branch b{1, 2, 0.2, 0.1, 300.0};
    const auto delta = current_limit_squared(b, LoadConfiguration::Delta, bases);
    const auto wye = current_limit_squared(b, LoadConfiguration::Wye, bases);
    CHECK(wye.rhs == doctest::Approx(delta.rhs));
    CHECK(wye.voltage_diff_scale == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("wye line current is a third of the delta current at any voltage profile") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> v(0.9, 1.1);
    std::uniform_real_distribution<double> th(-0.2, 0.2);
    for (int trial = 0; trial < 50; ++trial) {
        const double vn = v(rng), vm = v(rng), tn = th(rng), tm = th(rng);
        const double y_sq = 37.5;
        const double delta = branch_current_pu(vn, tn, vm, tm, y_sq, LoadConfiguration::Delta);
        const double wye = branch_current_pu(vn, tn, vm, tm, y_sq, LoadConfiguration::Wye);
        CHECK(wye == doctest::Approx(delta / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("identical voltages give zero branch current in both configurations") {
    for (auto config : {LoadConfiguration::Delta, LoadConfiguration::Wye}) {
        CHECK(branch_current_pu(1.02, 0.1, 1.02, 0.1, 25.0, config) == doctest::Approx(0.0));
    }
}

TEST_CASE("per-unit identities at the base") {
    PerUnitBases bases;  // 1 MVA, 400 V
    CHECK(to_per_unit(1e6, QuantityKind::Power, bases) == doctest::Approx(1.0));
    CHECK(to_per_unit(400.0, QuantityKind::Voltage, bases) == doctest::Approx(1.0));
    CHECK(to_per_unit(0.0, QuantityKind::Current, bases) == doctest::Approx(0.0));
    CHECK(bases.i_base_a() == doctest::Approx(1e6 / (std::sqrt(3.0) * 400.0)));
}

TEST_CASE("per-unit round trip is exact to 1e-12 relative") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> value(-1e7, 1e7);
    std::uniform_real_distribution<double> base(0.1, 1e7);
    for (int trial = 0; trial < 200; ++trial) {
        PerUnitBases bases;
        bases.s_base_va = base(rng);
        bases.v_base_v = base(rng);
        for (auto kind : {QuantityKind::Power, QuantityKind::Voltage, QuantityKind::Current}) {
            const double x = value(rng);
            const double back = from_per_unit(to_per_unit(x, kind, bases), kind, bases);
            CHECK(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        }
    }
}

TEST_CASE("network json round trip") {
    NetworkTopology t = chain_topology(3, 0.08, 0.05, 250.0);
    t.buses[1].kind = BusKind::LoadGenerator;
    t.buses[1].building_ids = {"A", "B"};
    t.configuration = LoadConfiguration::Wye;
    const std::string text = network_to_json(t);
    const NetworkTopology back = parse_network_json(text, "roundtrip");
    CHECK(back.buses.size() == 3);
    CHECK(back.buses[1].building_ids == std::vector<std::string>{"A", "B"});
    CHECK(back.configuration == LoadConfiguration::Wye);
    CHECK(back.branches[0].resistance_ohm == doctest::Approx(0.08));
    CHECK(back.bases.v_base_v == doctest::Approx(400.0));
}

TEST_CASE("network json validation errors name the field") {
    CHECK_THROWS_WITH_AS(parse_network_json("{\"buses\": []}", "bad.json"),
                         doctest::Contains("configuration"), InvalidInput);
    const char* missing_rating = R"({
      "configuration": "delta",
      "bases": {"s_base_va": 1e6, "v_base_v": 400},
      "v_bounds_pu": {"lower": 0.94, "upper": 1.1},
      "slack_bus": 1,
      "buses": [{"id": 1}, {"id": 2}],
      "branches": [{"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.1}]
    })";
    CHECK_THROWS_WITH_AS(parse_network_json(missing_rating, "bad.json"),
                         doctest::Contains("i_max_a"), InvalidInput);
    const char* two_slacks_missing = R"({
      "configuration": "delta",
      "bases": {"s_base_va": 1e6, "v_base_v": 400},
      "v_bounds_pu": {"lower": 0.94, "upper": 1.1},
      "slack_bus": 9,
      "buses": [{"id": 1}, {"id": 2}],
      "branches": [{"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.1, "i_max_a": 100}]
    })";
    CHECK_THROWS_WITH_AS(parse_network_json(two_slacks_missing, "bad.json"),
                         doctest::Contains("slack_bus"), InvalidInput);
}

TEST_CASE("duplicate building attachment is rejected") {
    NetworkTopology t = chain_topology(3, 0.1, 0.05);
    t.buses[1].kind = BusKind::LoadGenerator;
    t.buses[1].building_ids = {"A"};
    t.buses[2].kind = BusKind::LoadGenerator;
    t.buses[2].building_ids = {"A"};
    CHECK_THROWS_AS(t.validate(), InvalidInput);
}
