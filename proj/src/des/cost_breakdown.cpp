#include "desopf/des/cost_breakdown.hpp"

namespace desopf::des {

DesignSolution extract_design_solution(const DesModel& model, std::span<const double> x,
                                       const CaseData& case_data) {
    const DesIndex& idx = model.index;
    if (x.size() != static_cast<std::size_t>(model.system.num_variables())) {
        throw StructuralError("solution vector does not match the model size");
    }
    DesignSolution out;
    out.n_buildings = idx.n_buildings;
    out.n_seasons = idx.n_seasons;
    out.n_timepoints = idx.n_timepoints;
    out.n_batteries = idx.n_batteries;
    for (const auto& b : case_data.buildings) out.building_ids.push_back(b.id);
    for (const auto& s : case_data.seasons) out.season_names.push_back(s.name);
    for (const auto& c : case_data.catalog.batteries) out.battery_names.push_back(c.name);

    auto grab = [&x](const std::vector<int>& ids) {
        std::vector<double> values(ids.size(), 0.0);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (ids[k] >= 0) values[k] = x[static_cast<std::size_t>(ids[k])];
        }
        return values;
    };
    out.export_mode = grab(idx.export_mode);
    out.charge_mode = grab(idx.charge_mode);
    out.battery_selected = grab(idx.battery_selected);
    out.grid_import = grab(idx.grid_import);
    out.pv_self_use = grab(idx.pv_self_use);
    out.pv_export = grab(idx.pv_export);
    out.boiler_heat = grab(idx.boiler_heat);
    out.charge = grab(idx.charge);
    out.discharge = grab(idx.discharge);
    out.pv_charge = grab(idx.pv_charge);
    out.grid_charge = grab(idx.grid_charge);
    out.stored_kwh = grab(idx.stored);

    // Capacities are season-invariant; report the first season's values.
    out.panel_count.resize(static_cast<std::size_t>(idx.n_buildings));
    out.boiler_cap_kw.resize(static_cast<std::size_t>(idx.n_buildings));
    out.battery_cap_kwh.resize(static_cast<std::size_t>(idx.n_buildings * idx.n_batteries));
    for (int i = 0; i < idx.n_buildings; ++i) {
        out.panel_count[static_cast<std::size_t>(i)] =
            x[static_cast<std::size_t>(idx.panel_count[static_cast<std::size_t>(idx.is(i, 0))])];
        out.boiler_cap_kw[static_cast<std::size_t>(i)] =
            x[static_cast<std::size_t>(idx.boiler_cap[static_cast<std::size_t>(idx.is(i, 0))])];
        for (int c = 0; c < idx.n_batteries; ++c) {
            out.battery_cap_kwh[static_cast<std::size_t>(out.ic(i, c))] =
                x[static_cast<std::size_t>(idx.battery_cap[static_cast<std::size_t>(idx.isc(i, 0, c))])];
        }
    }

    out.breakdown = evaluate_cost_breakdown(out, case_data);
    out.objective = model.system.objective_value(x);
    return out;
}

CostBreakdown evaluate_cost_breakdown(const DesignSolution& sol, const CaseData& case_data) {
    const auto& cat = case_data.catalog;
    const double crf = cat.capital_recovery_factor();
    CostBreakdown out;

    for (int i = 0; i < sol.n_buildings; ++i) {
        out.pv_investment += sol.panel_count[static_cast<std::size_t>(i)] * cat.pv.invest_per_panel * crf;
        out.boiler_investment +=
            sol.boiler_cap_kw[static_cast<std::size_t>(i)] * cat.boiler.invest_per_kw * crf;
        for (int c = 0; c < sol.n_batteries; ++c) {
            out.battery_investment += sol.battery_cap_kwh[static_cast<std::size_t>(sol.ic(i, c))] *
                                      cat.batteries[static_cast<std::size_t>(c)].invest_per_kwh * crf;
        }
    }

    for (int s = 0; s < sol.n_seasons; ++s) {
        const SeasonSpec& sp = case_data.seasons[static_cast<std::size_t>(s)];
        const double dt = sp.dt_hours;
        const double days = static_cast<double>(sp.n_days);
        const auto& prices = case_data.tariffs.prices_for(sp.name);
        for (int i = 0; i < sol.n_buildings; ++i) {
            out.pv_operation += sol.panel_count[static_cast<std::size_t>(i)] *
                                cat.pv.fixed_om_per_kw_year * cat.pv.panel_rating_kw * days / 365.0;
            for (int c = 0; c < sol.n_batteries; ++c) {
                out.battery_operation +=
                    sol.battery_cap_kwh[static_cast<std::size_t>(sol.ic(i, c))] *
                    cat.batteries[static_cast<std::size_t>(c)].om_per_kwh_year / dt * days / 365.0;
            }
            for (int t = 0; t < sol.n_timepoints; ++t) {
                const int ist = sol.ist(i, s, t);
                double purchase = sol.grid_import[static_cast<std::size_t>(ist)];
                double pv_total = sol.pv_self_use[static_cast<std::size_t>(ist)] +
                                  sol.pv_export[static_cast<std::size_t>(ist)];
                for (int c = 0; c < sol.n_batteries; ++c) {
                    const int istc = sol.istc(i, s, t, c);
                    purchase += sol.grid_charge[static_cast<std::size_t>(istc)];
                    pv_total += sol.pv_charge[static_cast<std::size_t>(istc)];
                }
                out.grid_electricity += purchase * dt * prices[static_cast<std::size_t>(t)] * days;
                out.pv_operation += pv_total * cat.pv.var_om_per_kwh * dt * days;
                out.boiler_operation += sol.boiler_heat[static_cast<std::size_t>(ist)] * dt *
                                        cat.boiler.gas_price_per_kwh / cat.boiler.efficiency * days;
                out.generation_income +=
                    pv_total * case_data.tariffs.fit_generation_per_kwh * dt * days;
                out.export_income += sol.pv_export[static_cast<std::size_t>(ist)] *
                                     case_data.tariffs.fit_export_per_kwh * dt * days;
            }
        }
    }
    return out;
}

}  // namespace desopf::des
