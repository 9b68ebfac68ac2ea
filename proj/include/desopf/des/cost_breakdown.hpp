#pragma once

#include <span>
#include <string>
#include <vector>

#include "desopf/des/des_model.hpp"

namespace desopf::des {

/// Annualised cost terms; total() reproduces the objective.
struct CostBreakdown {
    double pv_investment = 0.0;
    double boiler_investment = 0.0;
    double battery_investment = 0.0;
    double grid_electricity = 0.0;
    double pv_operation = 0.0;
    double boiler_operation = 0.0;
    double battery_operation = 0.0;
    double generation_income = 0.0;
    double export_income = 0.0;

    double total() const {
        return pv_investment + boiler_investment + battery_investment + grid_electricity +
               pv_operation + boiler_operation + battery_operation - generation_income -
               export_income;
    }
};

/// All decision values of a design run: capacities, binary schedules, and the
/// operational time series, flattened with the same (i, s, t[, c]) layout as
/// DesIndex.
struct DesignSolution {
    int n_buildings = 0, n_seasons = 0, n_timepoints = 0, n_batteries = 0;
    std::vector<std::string> building_ids;
    std::vector<std::string> season_names;
    std::vector<std::string> battery_names;

    std::vector<double> panel_count;       // [i]
    std::vector<double> boiler_cap_kw;     // [i]
    std::vector<double> battery_cap_kwh;   // [i][c]

    std::vector<double> export_mode;       // [i][s][t]
    std::vector<double> charge_mode;       // [i][s][t][c]
    std::vector<double> battery_selected;  // [i][s][c]

    std::vector<double> grid_import, pv_self_use, pv_export, boiler_heat;      // [i][s][t]
    std::vector<double> charge, discharge, pv_charge, grid_charge, stored_kwh; // [i][s][t][c]

    CostBreakdown breakdown;
    double objective = 0.0;

    int ist(int i, int s, int t) const { return (i * n_seasons + s) * n_timepoints + t; }
    int istc(int i, int s, int t, int c) const {
        return ((i * n_seasons + s) * n_timepoints + t) * n_batteries + c;
    }
    int isc(int i, int s, int c) const { return (i * n_seasons + s) * n_batteries + c; }
    int ic(int i, int c) const { return i * n_batteries + c; }
};

DesignSolution extract_design_solution(const DesModel& model, std::span<const double> x,
                                       const CaseData& case_data);

/// Recomputes every annualised objective term from the raw flows.
CostBreakdown evaluate_cost_breakdown(const DesignSolution& solution, const CaseData& case_data);

}  // namespace desopf::des
