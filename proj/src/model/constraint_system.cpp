#include "desopf/model/constraint_system.hpp"

#include <algorithm>
#include <cmath>

namespace desopf::model {

int ConstraintSystem::add_variable(Variable v) {
    if (v.name.empty()) throw StructuralError("variable needs a name");
    if (index_.count(v.name)) throw StructuralError("duplicate variable '" + v.name + "'");
    if (v.lower > v.upper) {
        throw StructuralError("variable '" + v.name + "' has crossed bounds");
    }
    const int id = static_cast<int>(variables_.size());
    index_.emplace(v.name, id);
    variables_.push_back(std::move(v));
    objective_coeffs_.push_back(0.0);
    return id;
}

int ConstraintSystem::add_variable(std::string name, double lower, double upper,
                                   VarKind kind, double start) {
    Variable v;
    v.name = std::move(name);
    v.lower = lower;
    v.upper = upper;
    v.kind = kind;
    v.start = start;
    return add_variable(std::move(v));
}

int ConstraintSystem::variable_id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw StructuralError("unknown variable '" + name + "'");
    return it->second;
}

bool ConstraintSystem::has_variable(const std::string& name) const {
    return index_.count(name) > 0;
}

void ConstraintSystem::add_linear(LinearConstraint c) {
    for (const auto& term : c.terms) {
        if (term.var < 0 || term.var >= num_variables()) {
            throw StructuralError("constraint '" + c.name + "' references undeclared variable");
        }
    }
    linear_.push_back(std::move(c));
}

void ConstraintSystem::add_nonlinear(std::unique_ptr<NonlinearConstraint> c) {
    for (int v : c->variables()) {
        if (v < 0 || v >= num_variables()) {
            throw StructuralError("constraint '" + c->name + "' references undeclared variable");
        }
    }
    nonlinear_.push_back(std::move(c));
}

void ConstraintSystem::add_objective_term(int var, double coeff) {
    if (var < 0 || var >= num_variables()) {
        throw StructuralError("objective references undeclared variable");
    }
    objective_coeffs_[static_cast<std::size_t>(var)] += coeff;
}

void ConstraintSystem::add_objective_residual(std::unique_ptr<NonlinearConstraint> term) {
    for (int v : term->variables()) {
        if (v < 0 || v >= num_variables()) {
            throw StructuralError("objective term references undeclared variable");
        }
    }
    objective_residuals_.push_back(std::move(term));
}

void ConstraintSystem::fix_variable(int id, double value) {
    variable(id).fixed_value = value;
}

void ConstraintSystem::unfix_variable(int id) {
    variable(id).fixed_value.reset();
}

double ConstraintSystem::objective_value(std::span<const double> x) const {
    double value = objective_constant_;
    for (std::size_t j = 0; j < objective_coeffs_.size(); ++j) {
        if (objective_coeffs_[j] != 0.0) value += objective_coeffs_[j] * x[j];
    }
    for (const auto& term : objective_residuals_) value += term->value(x);
    return value;
}

double ConstraintSystem::max_violation(std::span<const double> x) const {
    double worst = 0.0;
    auto check = [&worst](double lhs, Sense sense, double rhs) {
        double v = 0.0;
        switch (sense) {
            case Sense::Equal: v = std::abs(lhs - rhs); break;
            case Sense::LessEqual: v = std::max(0.0, lhs - rhs); break;
            case Sense::GreaterEqual: v = std::max(0.0, rhs - lhs); break;
        }
        worst = std::max(worst, v);
    };
    for (const auto& c : linear_) {
        double lhs = 0.0;
        for (const auto& t : c.terms) lhs += t.coeff * x[static_cast<std::size_t>(t.var)];
        check(lhs, c.sense, c.rhs);
    }
    for (const auto& c : nonlinear_) check(c->value(x), c->sense, c->rhs);
    for (std::size_t j = 0; j < variables_.size(); ++j) {
        const Variable& v = variables_[j];
        if (std::isfinite(v.lower)) worst = std::max(worst, v.lower - x[j]);
        if (std::isfinite(v.upper)) worst = std::max(worst, x[j] - v.upper);
        if (v.fixed_value) worst = std::max(worst, std::abs(x[j] - *v.fixed_value));
    }
    return worst;
}

void ConstraintSystem::validate() const {
    for (const auto& c : linear_) {
        for (const auto& t : c.terms) {
            if (t.var < 0 || t.var >= num_variables()) {
                throw StructuralError("constraint '" + c.name + "' references undeclared variable");
            }
        }
    }
}

}  // namespace desopf::model
