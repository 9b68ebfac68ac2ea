#include <doctest.h>

#include "desopf/model/constraint_system.hpp"

using namespace desopf;
using namespace desopf::model;

TEST_CASE("variables are registered with stable ids and unique names") {
    ConstraintSystem cs;
    const int a = cs.add_variable("a", 0.0, 10.0);
    const int b = cs.add_variable("b", -1.0, 1.0, VarKind::Binary);
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(cs.variable_id("b") == 1);
    CHECK(cs.variable(b).is_integral());
    CHECK_THROWS_AS(cs.add_variable("a", 0.0, 1.0), StructuralError);
    CHECK_THROWS_AS(cs.variable_id("missing"), StructuralError);
}

TEST_CASE("constraints referencing undeclared variables are rejected") {
    ConstraintSystem cs;
    cs.add_variable("x", 0.0, 1.0);
    LinearConstraint c;
    c.name = "bad";
    c.terms = {{5, 1.0}};
    CHECK_THROWS_AS(cs.add_linear(std::move(c)), StructuralError);
}

TEST_CASE("fixing keeps declared bounds intersected with the value") {
    ConstraintSystem cs;
    const int x = cs.add_variable("x", 0.0, 2.0);
    cs.fix_variable(x, 1.5);
    CHECK(cs.variable(x).fixed_value == 1.5);
    CHECK(cs.variable(x).lower == 0.0);
    CHECK(cs.variable(x).upper == 2.0);
    const double point_ok[] = {1.5};
    CHECK(cs.max_violation(point_ok) == doctest::Approx(0.0));
    const double point_bad[] = {0.5};
    CHECK(cs.max_violation(point_bad) == doctest::Approx(1.0));
}

TEST_CASE("objective accumulates terms and a constant") {
    ConstraintSystem cs;
    const int x = cs.add_variable("x", 0.0, 2.0);
    const int y = cs.add_variable("y", 0.0, 2.0);
    cs.add_objective_term(x, 2.0);
    cs.add_objective_term(x, 1.0);
    cs.add_objective_term(y, -1.0);
    cs.add_objective_constant(5.0);
    const double point[] = {1.0, 2.0};
    CHECK(cs.objective_value(point) == doctest::Approx(3.0 - 2.0 + 5.0));
}

TEST_CASE("max violation covers linear rows of each sense") {
    ConstraintSystem cs;
    const int x = cs.add_variable("x", -10.0, 10.0);
    LinearConstraint eq{"eq", {{x, 1.0}}, Sense::Equal, 1.0};
    LinearConstraint le{"le", {{x, 1.0}}, Sense::LessEqual, 0.5};
    LinearConstraint ge{"ge", {{x, 1.0}}, Sense::GreaterEqual, 2.0};
    cs.add_linear(eq);
    cs.add_linear(le);
    cs.add_linear(ge);
    const double point[] = {1.0};
    CHECK(cs.max_violation(point) == doctest::Approx(1.0));  // ge violated by 1.0
}
