#pragma once

#include <cmath>

#include "desopf/des/des_model.hpp"
#include "desopf/network/admittance.hpp"

namespace desopf::opf {

/// Reactive counterpart of the building loads; PV inverters run at unity
/// power factor, so generation contributes no reactive power.
struct ReactiveLoadModel {
    double load_power_factor = 0.95;

    double tan_phi() const { return std::tan(std::acos(load_power_factor)); }
    double reactive_kw(double active_kw) const { return active_kw * tan_phi(); }
};

/// Variable ids of the network state, flattened over (bus, season, timepoint).
struct OpfIndex {
    int n_buses = 0;
    int n_seasons = 0;
    int n_timepoints = 0;
    std::vector<int> v_mag, theta, p_inj, q_inj;

    int bst(int b, int s, int t) const { return (b * n_seasons + s) * n_timepoints + t; }
    std::vector<int> all_ids() const;
};

struct OpfAttachment {
    OpfIndex index;
    network::AdmittanceMatrix admittance;
    std::vector<network::CurrentLimitPayload> limits;  // one per branch
    network::LoadConfiguration configuration = network::LoadConfiguration::Delta;
};

/// Active or reactive nodal balance residual in polar voltage coordinates,
/// with analytic gradient and Hessian.
class PowerBalanceResidual final : public model::NonlinearConstraint {
public:
    struct Neighbour {
        int v_var, theta_var;
        double conductance, susceptance;
    };

    PowerBalanceResidual(bool reactive, int injection_var, int v_var, int theta_var,
                         double self_conductance, double self_susceptance,
                         std::vector<Neighbour> neighbours);

    double value(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::vector<model::LinearTerm>& out) const override;
    void add_scaled_hessian(std::span<const double> x, double weight,
                            std::vector<std::tuple<int, int, double>>& out) const override;
    const std::vector<int>& variables() const override { return vars_; }

private:
    bool reactive_;
    int inj_, v_, theta_;
    double g_self_, b_self_;
    std::vector<Neighbour> neighbours_;
    std::vector<int> vars_;
};

/// Squared branch-current constraint on the voltage difference across a
/// branch: scale * |V_n - V_m|^2 <= (I_max_pu)^2 / yhat^2.
class CurrentLimitResidual final : public model::NonlinearConstraint {
public:
    CurrentLimitResidual(int v_n, int theta_n, int v_m, int theta_m, double scale);

    double value(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::vector<model::LinearTerm>& out) const override;
    void add_scaled_hessian(std::span<const double> x, double weight,
                            std::vector<std::tuple<int, int, double>>& out) const override;
    const std::vector<int>& variables() const override { return vars_; }

private:
    int vn_, tn_, vm_, tm_;
    double scale_;
    std::vector<int> vars_;
};

/// Adds the full network formulation for every (season, timepoint) to an
/// existing design model: state variables with slack fixings and bounds,
/// nonlinear nodal balances, configuration-aware current limits, and the
/// linking rows that tie nodal injections to the building flows.
OpfAttachment attach_opf(des::DesModel& model, const des::CaseData& case_data,
                         network::LoadConfiguration configuration,
                         const ReactiveLoadModel& reactive);

/// Network state at a solution; angles in degrees, currents in amperes.
struct OpfSolution {
    int n_buses = 0, n_seasons = 0, n_timepoints = 0, n_branches = 0;
    std::vector<int> bus_ids;
    std::vector<double> v_pu, theta_deg, p_pu, q_pu;  // [bus][s][t]
    std::vector<double> current_a;                    // [branch][s][t]

    int bst(int b, int s, int t) const { return (b * n_seasons + s) * n_timepoints + t; }
    int lst(int l, int s, int t) const { return (l * n_seasons + s) * n_timepoints + t; }
};

OpfSolution extract_opf_solution(const des::DesModel& model, const OpfAttachment& attachment,
                                 std::span<const double> x, const des::CaseData& case_data);

}  // namespace desopf::opf
