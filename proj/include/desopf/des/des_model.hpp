#pragma once

#include <string>
#include <vector>

#include "desopf/des/case_data.hpp"
#include "desopf/model/constraint_system.hpp"

namespace desopf::des {

/// Variable ids of the design model, flattened over (building, season,
/// timepoint[, battery]); -1 marks absent entries.
struct DesIndex {
    int n_buildings = 0;
    int n_seasons = 0;
    int n_timepoints = 0;
    int n_batteries = 0;

    // [i][s][t]
    std::vector<int> grid_import, pv_self_use, pv_export, boiler_heat, export_mode;
    // [i][s][t][c]
    std::vector<int> charge, discharge, pv_charge, grid_charge, stored, charge_mode;
    // [i][s]
    std::vector<int> panel_count, boiler_cap;
    // [i][s][c]
    std::vector<int> battery_cap, battery_volume, battery_selected;

    int ist(int i, int s, int t) const {
        return (i * n_seasons + s) * n_timepoints + t;
    }
    int istc(int i, int s, int t, int c) const {
        return ((i * n_seasons + s) * n_timepoints + t) * n_batteries + c;
    }
    int is(int i, int s) const { return i * n_seasons + s; }
    int isc(int i, int s, int c) const { return (i * n_seasons + s) * n_batteries + c; }

    std::vector<int> design_variable_ids() const;
    std::vector<int> binary_variable_ids() const;
    std::vector<int> operation_variable_ids() const;
};

struct DesModel {
    model::ConstraintSystem system;
    DesIndex index;
    std::vector<std::string> warnings;
};

/// Incremental builder for the seasonal design model: one fragment of
/// variables and constraints per season, capacity-linking rows across
/// consecutive seasons, and the annualised cost objective.
class DesModelBuilder {
public:
    explicit DesModelBuilder(const CaseData& case_data);

    /// Emits all variables and constraints of one season.
    void build_seasonal_model(int season);
    /// Equalises capacity variables across consecutive seasons. Counts the
    /// emitted rows.
    int link_seasons();
    /// Adds every annualised cost and income term.
    void assemble_objective();

    DesModel finish();

private:
    const CaseData& case_;
    DesModel model_;
    std::vector<bool> season_built_;
};

/// Convenience wrapper running the full build.
DesModel build_des_model(const CaseData& case_data);

}  // namespace desopf::des
