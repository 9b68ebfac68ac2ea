#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "desopf/des/cost_breakdown.hpp"

namespace desopf::testsupport {

/// Violations of the design-model invariants at an accepted solution.
struct DesAudit {
    double demand_balance_residual = 0.0;            // kW
    double simultaneous_charge_discharge = 0.0;      // max of charge*discharge products
    double soc_violation = 0.0;                      // kWh outside the SoC/DoD window
    double cyclic_residual = 0.0;                    // kWh difference start vs end
    double exclusivity_violation = 0.0;              // kW bought while exporting (or sold while not)
    double roof_violation = 0.0;                     // m^2
    double volume_violation = 0.0;                   // m^3
    double breakdown_mismatch = 0.0;                 // relative

    bool ok(double kw_tol = 1e-8, double rel_tol = 1e-6) const {
        return demand_balance_residual < kw_tol && simultaneous_charge_discharge < 1e-10 &&
               soc_violation < 1e-6 && cyclic_residual < 1e-6 &&
               exclusivity_violation < 1e-6 && roof_violation < 1e-6 &&
               volume_violation < 1e-6 && breakdown_mismatch < rel_tol;
    }
};

inline DesAudit audit_des_solution(const des::DesignSolution& sol,
                                   const des::CaseData& case_data) {
    DesAudit a;
    const auto& cat = case_data.catalog;
    for (int i = 0; i < sol.n_buildings; ++i) {
        const auto& bld = case_data.buildings[static_cast<std::size_t>(i)];
        double volume_used = 0.0;
        for (int c = 0; c < sol.n_batteries; ++c) {
            volume_used += sol.battery_cap_kwh[static_cast<std::size_t>(sol.ic(i, c))] /
                           cat.batteries[static_cast<std::size_t>(c)].energy_density_kwh_per_m3;
        }
        a.volume_violation =
            std::max(a.volume_violation, volume_used - bld.volume_available_m3);
        a.roof_violation = std::max(
            a.roof_violation, sol.panel_count[static_cast<std::size_t>(i)] * cat.pv.panel_area_m2 -
                                  bld.roof_area_m2);
        for (int s = 0; s < sol.n_seasons; ++s) {
            const auto& elec = bld.elec_demand_kw.at(sol.season_names[static_cast<std::size_t>(s)]);
            for (int t = 0; t < sol.n_timepoints; ++t) {
                const int ist = sol.ist(i, s, t);
                double supply = sol.grid_import[static_cast<std::size_t>(ist)] +
                                sol.pv_self_use[static_cast<std::size_t>(ist)];
                for (int c = 0; c < sol.n_batteries; ++c) {
                    supply += sol.discharge[static_cast<std::size_t>(sol.istc(i, s, t, c))];
                }
                a.demand_balance_residual =
                    std::max(a.demand_balance_residual,
                             std::abs(supply - elec[static_cast<std::size_t>(t)]));

                // Buying and exporting cannot overlap.
                const double bought = sol.grid_import[static_cast<std::size_t>(ist)];
                const double sold = sol.pv_export[static_cast<std::size_t>(ist)];
                a.exclusivity_violation =
                    std::max(a.exclusivity_violation, std::min(bought, sold));

                for (int c = 0; c < sol.n_batteries; ++c) {
                    const int istc = sol.istc(i, s, t, c);
                    const auto& batt = cat.batteries[static_cast<std::size_t>(c)];
                    const double cap = sol.battery_cap_kwh[static_cast<std::size_t>(sol.ic(i, c))];
                    a.simultaneous_charge_discharge =
                        std::max(a.simultaneous_charge_discharge,
                                 sol.charge[static_cast<std::size_t>(istc)] *
                                     sol.discharge[static_cast<std::size_t>(istc)]);
                    const double stored = sol.stored_kwh[static_cast<std::size_t>(istc)];
                    a.soc_violation =
                        std::max(a.soc_violation, stored - cap * batt.max_state_of_charge);
                    a.soc_violation = std::max(
                        a.soc_violation, cap * (1.0 - batt.max_depth_of_discharge) - stored);
                }
            }
            for (int c = 0; c < sol.n_batteries; ++c) {
                const double first = sol.stored_kwh[static_cast<std::size_t>(sol.istc(i, s, 0, c))];
                const double last = sol.stored_kwh[static_cast<std::size_t>(
                    sol.istc(i, s, sol.n_timepoints - 1, c))];
                a.cyclic_residual = std::max(a.cyclic_residual, std::abs(first - last));
            }
        }
    }
    const des::CostBreakdown fresh = evaluate_cost_breakdown(sol, case_data);
    a.breakdown_mismatch =
        std::abs(fresh.total() - sol.objective) / std::max(1.0, std::abs(sol.objective));
    return a;
}

}  // namespace desopf::testsupport
