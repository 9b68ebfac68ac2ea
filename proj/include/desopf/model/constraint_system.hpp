#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "desopf/common.hpp"

namespace desopf::model {

enum class Sense { Equal, LessEqual, GreaterEqual };

enum class VarKind { Continuous, Integer, Binary };

struct Variable {
    std::string name;
    double lower = -kInf;
    double upper = kInf;
    VarKind kind = VarKind::Continuous;
    std::optional<double> fixed_value;
    double start = 0.0;

    bool is_integral() const { return kind != VarKind::Continuous; }
};

struct LinearTerm {
    int var = -1;
    double coeff = 0.0;
};

struct LinearConstraint {
    std::string name;
    std::vector<LinearTerm> terms;
    Sense sense = Sense::Equal;
    double rhs = 0.0;
};

/// A scalar nonlinear residual c(x) constrained as c(x) (sense) rhs.
/// Implementations provide the value, the sparse gradient over `variables()`,
/// and the Hessian scaled by an external weight (lower triangle, var-id pairs).
class NonlinearConstraint {
public:
    virtual ~NonlinearConstraint() = default;

    virtual double value(std::span<const double> x) const = 0;
    virtual void gradient(std::span<const double> x, std::vector<LinearTerm>& out) const = 0;
    virtual void add_scaled_hessian(std::span<const double> x, double weight,
                                    std::vector<std::tuple<int, int, double>>& out) const = 0;
    virtual const std::vector<int>& variables() const = 0;

    std::string name;
    Sense sense = Sense::Equal;
    double rhs = 0.0;
};

/// Variable/constraint container handed to solver backends: bounded variables
/// with integrality marks and optional fixings, linear rows, nonlinear residuals
/// with analytic derivatives, and a linear objective (nonlinear objective terms
/// may be attached through the same residual interface).
class ConstraintSystem {
public:
    int add_variable(Variable v);
    int add_variable(std::string name, double lower, double upper,
                     VarKind kind = VarKind::Continuous, double start = 0.0);

    int variable_id(const std::string& name) const;
    bool has_variable(const std::string& name) const;
    const Variable& variable(int id) const { return variables_.at(static_cast<std::size_t>(id)); }
    Variable& variable(int id) { return variables_.at(static_cast<std::size_t>(id)); }
    int num_variables() const { return static_cast<int>(variables_.size()); }
    const std::vector<Variable>& variables() const { return variables_; }

    void add_linear(LinearConstraint c);
    const std::vector<LinearConstraint>& linear_constraints() const { return linear_; }

    void add_nonlinear(std::unique_ptr<NonlinearConstraint> c);
    const std::vector<std::unique_ptr<NonlinearConstraint>>& nonlinear_constraints() const {
        return nonlinear_;
    }

    /// Adds coeff * x_var to the (minimised) objective.
    void add_objective_term(int var, double coeff);
    void add_objective_constant(double value) { objective_constant_ += value; }
    /// Hook for nonlinear objective additions; none of the shipped models use it.
    void add_objective_residual(std::unique_ptr<NonlinearConstraint> term);

    const std::vector<double>& objective_coefficients() const { return objective_coeffs_; }
    double objective_constant() const { return objective_constant_; }
    const std::vector<std::unique_ptr<NonlinearConstraint>>& objective_residuals() const {
        return objective_residuals_;
    }

    /// Pins a variable to a value. The effective domain is the declared bounds
    /// intersected with the value; a fix outside the bounds makes the system
    /// infeasible, which solvers report rather than this call.
    void fix_variable(int id, double value);
    void unfix_variable(int id);

    double objective_value(std::span<const double> x) const;

    /// Largest violation of linear rows, nonlinear rows, bounds and fixings at x.
    double max_violation(std::span<const double> x) const;

    /// Structural audit: constraints must reference declared variables only.
    void validate() const;

private:
    std::vector<Variable> variables_;
    std::unordered_map<std::string, int> index_;
    std::vector<LinearConstraint> linear_;
    std::vector<std::unique_ptr<NonlinearConstraint>> nonlinear_;
    std::vector<std::unique_ptr<NonlinearConstraint>> objective_residuals_;
    std::vector<double> objective_coeffs_;
    double objective_constant_ = 0.0;
};

}  // namespace desopf::model
