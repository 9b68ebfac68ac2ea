#include "desopf/des/des_model.hpp"

#include <algorithm>
#include <cmath>

namespace desopf::des {

using model::LinearConstraint;
using model::Sense;
using model::VarKind;

namespace {

std::string tag(const std::string& base, const std::string& i, const std::string& s) {
    return base + "[" + i + "," + s + "]";
}
std::string tag(const std::string& base, const std::string& i, const std::string& s, int t) {
    return base + "[" + i + "," + s + "," + std::to_string(t + 1) + "]";
}
std::string tag(const std::string& base, const std::string& i, const std::string& s, int t,
                const std::string& c) {
    return base + "[" + i + "," + s + "," + std::to_string(t + 1) + "," + c + "]";
}
std::string tagc(const std::string& base, const std::string& i, const std::string& s,
                 const std::string& c) {
    return base + "[" + i + "," + s + "," + c + "]";
}

}  // namespace

std::vector<int> DesIndex::design_variable_ids() const {
    std::vector<int> ids;
    for (int v : panel_count) if (v >= 0) ids.push_back(v);
    for (int v : boiler_cap) if (v >= 0) ids.push_back(v);
    for (int v : battery_cap) if (v >= 0) ids.push_back(v);
    for (int v : battery_volume) if (v >= 0) ids.push_back(v);
    return ids;
}

std::vector<int> DesIndex::binary_variable_ids() const {
    std::vector<int> ids;
    for (int v : export_mode) if (v >= 0) ids.push_back(v);
    for (int v : charge_mode) if (v >= 0) ids.push_back(v);
    for (int v : battery_selected) if (v >= 0) ids.push_back(v);
    return ids;
}

std::vector<int> DesIndex::operation_variable_ids() const {
    std::vector<int> ids;
    for (const auto* group : {&grid_import, &pv_self_use, &pv_export, &boiler_heat}) {
        for (int v : *group) if (v >= 0) ids.push_back(v);
    }
    for (const auto* group : {&charge, &discharge, &pv_charge, &grid_charge, &stored}) {
        for (int v : *group) if (v >= 0) ids.push_back(v);
    }
    return ids;
}

DesModelBuilder::DesModelBuilder(const CaseData& case_data) : case_(case_data) {
    case_.validate();
    auto& idx = model_.index;
    idx.n_buildings = static_cast<int>(case_.buildings.size());
    idx.n_seasons = static_cast<int>(case_.seasons.size());
    idx.n_timepoints = kTimepoints;
    idx.n_batteries = static_cast<int>(case_.catalog.batteries.size());
    const int nist = idx.n_buildings * idx.n_seasons * idx.n_timepoints;
    const int nistc = nist * idx.n_batteries;
    const int nis = idx.n_buildings * idx.n_seasons;
    const int nisc = nis * idx.n_batteries;
    for (auto* v : {&idx.grid_import, &idx.pv_self_use, &idx.pv_export, &idx.boiler_heat,
                    &idx.export_mode}) {
        v->assign(static_cast<std::size_t>(nist), -1);
    }
    for (auto* v : {&idx.charge, &idx.discharge, &idx.pv_charge, &idx.grid_charge, &idx.stored,
                    &idx.charge_mode}) {
        v->assign(static_cast<std::size_t>(nistc), -1);
    }
    for (auto* v : {&idx.panel_count, &idx.boiler_cap}) v->assign(static_cast<std::size_t>(nis), -1);
    for (auto* v : {&idx.battery_cap, &idx.battery_volume, &idx.battery_selected}) {
        v->assign(static_cast<std::size_t>(nisc), -1);
    }
    season_built_.assign(static_cast<std::size_t>(idx.n_seasons), false);

    // Big-M sanity: warn when an exclusivity bound could bind at the M value.
    double peak = 0.0;
    for (const auto& b : case_.buildings) {
        for (const auto& [season, profile] : b.elec_demand_kw) {
            for (double v : profile) peak = std::max(peak, v);
        }
        peak = std::max(peak, b.roof_area_m2 / case_.catalog.pv.panel_area_m2 *
                                  case_.catalog.pv.panel_rating_kw);
    }
    if (peak > 0.5 * case_.catalog.big_m_kw) {
        model_.warnings.push_back(
            "big-M value " + std::to_string(case_.catalog.big_m_kw) +
            " kW is within 2x of the largest possible flow (" + std::to_string(peak) +
            " kW); exclusivity constraints may bind at M");
    }
}

void DesModelBuilder::build_seasonal_model(int season) {
    auto& cs = model_.system;
    auto& idx = model_.index;
    const auto& cat = case_.catalog;
    const SeasonSpec& sp = case_.seasons[static_cast<std::size_t>(season)];
    const std::string& s = sp.name;
    const double dt = sp.dt_hours;
    const int T = idx.n_timepoints;
    season_built_.at(static_cast<std::size_t>(season)) = true;

    for (int i = 0; i < idx.n_buildings; ++i) {
        const BuildingData& bld = case_.buildings[static_cast<std::size_t>(i)];
        const auto& elec = bld.elec_demand_kw.at(s);
        const auto& heat = bld.heat_demand_kw.at(s);

        // Capacity variables for this season.
        const double max_panels =
            cat.pv_allowed ? std::floor(bld.roof_area_m2 / cat.pv.panel_area_m2) : 0.0;
        const int panel_var = cs.add_variable(tag("panel_count", bld.id, s), 0.0, max_panels,
                                              VarKind::Integer);
        idx.panel_count[static_cast<std::size_t>(idx.is(i, season))] = panel_var;
        const int boiler_var = cs.add_variable(tag("boiler_cap", bld.id, s), 0.0,
                                               cat.boiler.max_capacity_kw);
        idx.boiler_cap[static_cast<std::size_t>(idx.is(i, season))] = boiler_var;

        for (int c = 0; c < idx.n_batteries; ++c) {
            const auto& batt = cat.batteries[static_cast<std::size_t>(c)];
            const double cap_ub = std::min(cat.battery_cap_big_m_kwh,
                                           bld.volume_available_m3 * batt.energy_density_kwh_per_m3);
            const int cap = cs.add_variable(tagc("battery_cap", bld.id, s, batt.name), 0.0, cap_ub);
            const int vol = cs.add_variable(tagc("battery_volume", bld.id, s, batt.name), 0.0,
                                            bld.volume_available_m3);
            const int sel = cs.add_variable(tagc("battery_selected", bld.id, s, batt.name), 0.0, 1.0,
                                            VarKind::Binary);
            idx.battery_cap[static_cast<std::size_t>(idx.isc(i, season, c))] = cap;
            idx.battery_volume[static_cast<std::size_t>(idx.isc(i, season, c))] = vol;
            idx.battery_selected[static_cast<std::size_t>(idx.isc(i, season, c))] = sel;

            // Capacity from installed volume and volumetric energy density.
            cs.add_linear({tagc("battery_energy_density", bld.id, s, batt.name),
                           {{cap, 1.0}, {vol, -batt.energy_density_kwh_per_m3}},
                           Sense::Equal,
                           0.0});
            // Capacity only when this battery type is selected.
            cs.add_linear({tagc("battery_cap_select", bld.id, s, batt.name),
                           {{cap, 1.0}, {sel, -cat.battery_cap_big_m_kwh}},
                           Sense::LessEqual,
                           0.0});
        }
        if (idx.n_batteries > 0) {
            LinearConstraint choice{tag("battery_choice", bld.id, s), {}, Sense::LessEqual, 1.0};
            LinearConstraint volume{tag("volume_limit", bld.id, s), {}, Sense::LessEqual,
                                    bld.volume_available_m3};
            for (int c = 0; c < idx.n_batteries; ++c) {
                choice.terms.push_back(
                    {idx.battery_selected[static_cast<std::size_t>(idx.isc(i, season, c))], 1.0});
                volume.terms.push_back(
                    {idx.battery_volume[static_cast<std::size_t>(idx.isc(i, season, c))], 1.0});
            }
            cs.add_linear(std::move(choice));
            cs.add_linear(std::move(volume));
        }

        for (int t = 0; t < T; ++t) {
            const int grid = cs.add_variable(tag("grid_import", bld.id, s, t), 0.0, kInf);
            const int self_use = cs.add_variable(tag("pv_self_use", bld.id, s, t), 0.0, kInf);
            const int exported = cs.add_variable(tag("pv_export", bld.id, s, t), 0.0, kInf);
            const int heat_out = cs.add_variable(tag("boiler_heat", bld.id, s, t), 0.0, kInf);
            const int xmode = cs.add_variable(tag("export_mode", bld.id, s, t), 0.0, 1.0,
                                              VarKind::Binary);
            idx.grid_import[static_cast<std::size_t>(idx.ist(i, season, t))] = grid;
            idx.pv_self_use[static_cast<std::size_t>(idx.ist(i, season, t))] = self_use;
            idx.pv_export[static_cast<std::size_t>(idx.ist(i, season, t))] = exported;
            idx.boiler_heat[static_cast<std::size_t>(idx.ist(i, season, t))] = heat_out;
            idx.export_mode[static_cast<std::size_t>(idx.ist(i, season, t))] = xmode;

            for (int c = 0; c < idx.n_batteries; ++c) {
                const auto& batt = cat.batteries[static_cast<std::size_t>(c)];
                const int ch = cs.add_variable(tag("charge", bld.id, s, t, batt.name), 0.0, kInf);
                const int dis = cs.add_variable(tag("discharge", bld.id, s, t, batt.name), 0.0, kInf);
                const int ch_pv = cs.add_variable(tag("pv_charge", bld.id, s, t, batt.name), 0.0, kInf);
                const int ch_grid =
                    cs.add_variable(tag("grid_charge", bld.id, s, t, batt.name), 0.0, kInf);
                const int stored = cs.add_variable(tag("stored", bld.id, s, t, batt.name), 0.0, kInf);
                const int qmode = cs.add_variable(tag("charge_mode", bld.id, s, t, batt.name), 0.0,
                                                  1.0, VarKind::Binary);
                idx.charge[static_cast<std::size_t>(idx.istc(i, season, t, c))] = ch;
                idx.discharge[static_cast<std::size_t>(idx.istc(i, season, t, c))] = dis;
                idx.pv_charge[static_cast<std::size_t>(idx.istc(i, season, t, c))] = ch_pv;
                idx.grid_charge[static_cast<std::size_t>(idx.istc(i, season, t, c))] = ch_grid;
                idx.stored[static_cast<std::size_t>(idx.istc(i, season, t, c))] = stored;
                idx.charge_mode[static_cast<std::size_t>(idx.istc(i, season, t, c))] = qmode;
            }
        }

        for (int t = 0; t < T; ++t) {
            const int ist = idx.ist(i, season, t);
            const int grid = idx.grid_import[static_cast<std::size_t>(ist)];
            const int self_use = idx.pv_self_use[static_cast<std::size_t>(ist)];
            const int exported = idx.pv_export[static_cast<std::size_t>(ist)];
            const int heat_out = idx.boiler_heat[static_cast<std::size_t>(ist)];
            const int xmode = idx.export_mode[static_cast<std::size_t>(ist)];

            // Electricity demand balance: purchases + self-consumed PV + discharge.
            LinearConstraint balance{tag("demand_balance", bld.id, s, t),
                                     {{grid, 1.0}, {self_use, 1.0}},
                                     Sense::Equal,
                                     elec[static_cast<std::size_t>(t)]};
            for (int c = 0; c < idx.n_batteries; ++c) {
                balance.terms.push_back(
                    {idx.discharge[static_cast<std::size_t>(idx.istc(i, season, t, c))], 1.0});
            }
            cs.add_linear(std::move(balance));

            // Heat demand met by the boiler.
            cs.add_linear({tag("heat_balance", bld.id, s, t),
                           {{heat_out, 1.0}},
                           Sense::Equal,
                           heat[static_cast<std::size_t>(t)]});
            // Boiler sizing tracks the peak output.
            cs.add_linear({tag("boiler_sizing", bld.id, s, t),
                           {{heat_out, 1.0}, {boiler_var, -1.0}},
                           Sense::LessEqual,
                           0.0});

            // Purchase/sell exclusivity: buying only when not exporting.
            cs.add_linear({tag("import_exclusivity", bld.id, s, t),
                           {{grid, 1.0}, {xmode, elec[static_cast<std::size_t>(t)]}},
                           Sense::LessEqual,
                           elec[static_cast<std::size_t>(t)]});
            cs.add_linear({tag("export_exclusivity", bld.id, s, t),
                           {{exported, 1.0}, {xmode, -cat.big_m_kw}},
                           Sense::LessEqual,
                           0.0});

            // PV production split against the rated and irradiance-limited output.
            LinearConstraint rated{tag("pv_rated_cap", bld.id, s, t),
                                   {{self_use, 1.0}, {exported, 1.0},
                                    {panel_var, -cat.pv.panel_rating_kw}},
                                   Sense::LessEqual,
                                   0.0};
            const double irr_yield = cat.pv.panel_area_m2 *
                                     sp.irradiance_kw_m2[static_cast<std::size_t>(t)] *
                                     cat.pv.efficiency;
            LinearConstraint irr{tag("pv_irradiance", bld.id, s, t),
                                 {{self_use, 1.0}, {exported, 1.0}, {panel_var, -irr_yield}},
                                 Sense::LessEqual,
                                 0.0};
            for (int c = 0; c < idx.n_batteries; ++c) {
                const int ch_pv = idx.pv_charge[static_cast<std::size_t>(idx.istc(i, season, t, c))];
                rated.terms.push_back({ch_pv, 1.0});
                irr.terms.push_back({ch_pv, 1.0});
            }
            cs.add_linear(std::move(rated));
            cs.add_linear(std::move(irr));

            for (int c = 0; c < idx.n_batteries; ++c) {
                const auto& batt = cat.batteries[static_cast<std::size_t>(c)];
                const int istc = idx.istc(i, season, t, c);
                const int ch = idx.charge[static_cast<std::size_t>(istc)];
                const int dis = idx.discharge[static_cast<std::size_t>(istc)];
                const int ch_pv = idx.pv_charge[static_cast<std::size_t>(istc)];
                const int ch_grid = idx.grid_charge[static_cast<std::size_t>(istc)];
                const int stored = idx.stored[static_cast<std::size_t>(istc)];
                const int qmode = idx.charge_mode[static_cast<std::size_t>(istc)];
                const int cap = idx.battery_cap[static_cast<std::size_t>(idx.isc(i, season, c))];

                // State-of-charge window.
                cs.add_linear({tag("soc_upper", bld.id, s, t, batt.name),
                               {{stored, 1.0}, {cap, -batt.max_state_of_charge}},
                               Sense::LessEqual,
                               0.0});
                cs.add_linear({tag("soc_lower", bld.id, s, t, batt.name),
                               {{stored, 1.0}, {cap, -(1.0 - batt.max_depth_of_discharge)}},
                               Sense::GreaterEqual,
                               0.0});

                // Stored-energy recursion; the horizon start has no predecessor.
                LinearConstraint rec{tag("storage_recursion", bld.id, s, t, batt.name),
                                     {{stored, 1.0},
                                      {ch, -batt.charge_efficiency * dt},
                                      {dis, dt / batt.discharge_efficiency}},
                                     Sense::Equal,
                                     0.0};
                if (t > 0) {
                    rec.terms.push_back(
                        {idx.stored[static_cast<std::size_t>(idx.istc(i, season, t - 1, c))], -1.0});
                }
                cs.add_linear(std::move(rec));

                // A discharge cannot exceed what was stored in the previous step.
                if (t > 0) {
                    cs.add_linear(
                        {tag("discharge_availability", bld.id, s, t, batt.name),
                         {{dis, dt / batt.discharge_efficiency},
                          {idx.stored[static_cast<std::size_t>(idx.istc(i, season, t - 1, c))], -1.0}},
                         Sense::LessEqual,
                         0.0});
                }

                // Charging sourced from PV or the grid.
                cs.add_linear({tag("charge_split", bld.id, s, t, batt.name),
                               {{ch, 1.0}, {ch_grid, -1.0}, {ch_pv, -1.0}},
                               Sense::Equal,
                               0.0});

                // Per-step throughput caps against unrealistic cycling.
                cs.add_linear({tag("charge_rate", bld.id, s, t, batt.name),
                               {{ch, batt.charge_efficiency * dt}, {cap, -cat.charge_rate_cap}},
                               Sense::LessEqual,
                               0.0});
                cs.add_linear({tag("discharge_rate", bld.id, s, t, batt.name),
                               {{dis, dt / batt.discharge_efficiency},
                                {cap, -cat.discharge_rate_cap}},
                               Sense::LessEqual,
                               0.0});

                // No simultaneous charging and discharging.
                cs.add_linear({tag("charge_mode_link", bld.id, s, t, batt.name),
                               {{ch, 1.0}, {qmode, -cat.big_m_kw}},
                               Sense::LessEqual,
                               0.0});
                cs.add_linear({tag("discharge_mode_link", bld.id, s, t, batt.name),
                               {{dis, 1.0}, {qmode, cat.big_m_kw}},
                               Sense::LessEqual,
                               cat.big_m_kw});
            }
        }

        // Roof area limits the panel count.
        cs.add_linear({tag("roof_area", bld.id, s),
                       {{panel_var, cat.pv.panel_area_m2}},
                       Sense::LessEqual,
                       bld.roof_area_m2});

        // Cyclic storage over the horizon.
        for (int c = 0; c < idx.n_batteries; ++c) {
            const auto& batt = cat.batteries[static_cast<std::size_t>(c)];
            cs.add_linear({tagc("storage_cyclic", bld.id, s, batt.name),
                           {{idx.stored[static_cast<std::size_t>(idx.istc(i, season, 0, c))], 1.0},
                            {idx.stored[static_cast<std::size_t>(idx.istc(i, season, T - 1, c))],
                             -1.0}},
                           Sense::Equal,
                           0.0});
        }
    }
}

int DesModelBuilder::link_seasons() {
    auto& cs = model_.system;
    auto& idx = model_.index;
    int rows = 0;
    for (int s = 1; s < idx.n_seasons; ++s) {
        if (!season_built_[static_cast<std::size_t>(s)] ||
            !season_built_[static_cast<std::size_t>(s - 1)]) {
            throw StructuralError("link_seasons called before all seasonal fragments were built");
        }
        const std::string& cur = case_.seasons[static_cast<std::size_t>(s)].name;
        for (int i = 0; i < idx.n_buildings; ++i) {
            const std::string& bid = case_.buildings[static_cast<std::size_t>(i)].id;
            auto link = [&](int a, int b, const std::string& what) {
                cs.add_linear({"capacity_link[" + what + "," + bid + "," + cur + "]",
                               {{a, 1.0}, {b, -1.0}},
                               Sense::Equal,
                               0.0});
                ++rows;
            };
            link(idx.panel_count[static_cast<std::size_t>(idx.is(i, s))],
                 idx.panel_count[static_cast<std::size_t>(idx.is(i, s - 1))], "pv");
            link(idx.boiler_cap[static_cast<std::size_t>(idx.is(i, s))],
                 idx.boiler_cap[static_cast<std::size_t>(idx.is(i, s - 1))], "boiler");
            for (int c = 0; c < idx.n_batteries; ++c) {
                link(idx.battery_cap[static_cast<std::size_t>(idx.isc(i, s, c))],
                     idx.battery_cap[static_cast<std::size_t>(idx.isc(i, s - 1, c))],
                     case_.catalog.batteries[static_cast<std::size_t>(c)].name);
            }
        }
    }
    return rows;
}

void DesModelBuilder::assemble_objective() {
    auto& cs = model_.system;
    auto& idx = model_.index;
    const auto& cat = case_.catalog;
    const double crf = cat.capital_recovery_factor();

    // Annualised investment, priced off the first season's capacities (the
    // linking rows make all seasons equal).
    for (int i = 0; i < idx.n_buildings; ++i) {
        cs.add_objective_term(idx.panel_count[static_cast<std::size_t>(idx.is(i, 0))],
                              cat.pv.invest_per_panel * crf);
        cs.add_objective_term(idx.boiler_cap[static_cast<std::size_t>(idx.is(i, 0))],
                              cat.boiler.invest_per_kw * crf);
        for (int c = 0; c < idx.n_batteries; ++c) {
            cs.add_objective_term(idx.battery_cap[static_cast<std::size_t>(idx.isc(i, 0, c))],
                                  cat.batteries[static_cast<std::size_t>(c)].invest_per_kwh * crf);
        }
    }

    for (int s = 0; s < idx.n_seasons; ++s) {
        const SeasonSpec& sp = case_.seasons[static_cast<std::size_t>(s)];
        const double dt = sp.dt_hours;
        const double days = static_cast<double>(sp.n_days);
        const auto& prices = case_.tariffs.prices_for(sp.name);
        for (int i = 0; i < idx.n_buildings; ++i) {
            // Fixed PV O&M follows the installed rating, prorated by season length.
            cs.add_objective_term(idx.panel_count[static_cast<std::size_t>(idx.is(i, s))],
                                  cat.pv.fixed_om_per_kw_year * cat.pv.panel_rating_kw * days /
                                      365.0);
            for (int c = 0; c < idx.n_batteries; ++c) {
                const auto& batt = cat.batteries[static_cast<std::size_t>(c)];
                cs.add_objective_term(
                    idx.battery_cap[static_cast<std::size_t>(idx.isc(i, s, c))],
                    batt.om_per_kwh_year / dt * days / 365.0);
            }
            for (int t = 0; t < kTimepoints; ++t) {
                const int ist = idx.ist(i, s, t);
                const double grid_price = prices[static_cast<std::size_t>(t)] * dt * days;
                cs.add_objective_term(idx.grid_import[static_cast<std::size_t>(ist)], grid_price);
                const double pv_var = cat.pv.var_om_per_kwh * dt * days;
                const double gen_income = case_.tariffs.fit_generation_per_kwh * dt * days;
                cs.add_objective_term(idx.pv_self_use[static_cast<std::size_t>(ist)],
                                      pv_var - gen_income);
                cs.add_objective_term(idx.pv_export[static_cast<std::size_t>(ist)],
                                      pv_var - gen_income -
                                          case_.tariffs.fit_export_per_kwh * dt * days);
                cs.add_objective_term(idx.boiler_heat[static_cast<std::size_t>(ist)],
                                      dt * cat.boiler.gas_price_per_kwh / cat.boiler.efficiency *
                                          days);
                for (int c = 0; c < idx.n_batteries; ++c) {
                    const int istc = idx.istc(i, s, t, c);
                    cs.add_objective_term(idx.grid_charge[static_cast<std::size_t>(istc)],
                                          grid_price);
                    cs.add_objective_term(idx.pv_charge[static_cast<std::size_t>(istc)],
                                          pv_var - gen_income);
                }
            }
        }
    }
}

DesModel DesModelBuilder::finish() {
    for (std::size_t s = 0; s < season_built_.size(); ++s) {
        if (!season_built_[s]) {
            throw StructuralError("season '" + case_.seasons[s].name + "' was never built");
        }
    }
    return std::move(model_);
}

DesModel build_des_model(const CaseData& case_data) {
    DesModelBuilder builder(case_data);
    for (std::size_t s = 0; s < case_data.seasons.size(); ++s) {
        builder.build_seasonal_model(static_cast<int>(s));
    }
    builder.link_seasons();
    builder.assemble_objective();
    return builder.finish();
}

}  // namespace desopf::des
