#include "desopf/des/case_data.hpp"

#include <cmath>
#include <set>

namespace desopf::des {

double TechnologyCatalog::capital_recovery_factor() const {
    const double i = finance.interest_rate;
    const int n = finance.lifetime_years;
    if (i == 0.0) return 1.0 / static_cast<double>(n);
    const double growth = std::pow(1.0 + i, n);
    return i * growth / (growth - 1.0);
}

void TechnologyCatalog::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(pv.efficiency)) throw InvalidInput("pv efficiency must lie in (0,1]");
    if (!in_unit(boiler.efficiency)) throw InvalidInput("boiler efficiency must lie in (0,1]");
    if (pv.invest_per_panel < 0 || pv.panel_area_m2 <= 0 || pv.panel_rating_kw <= 0) {
        throw InvalidInput("pv parameters must be positive");
    }
    for (const auto& b : batteries) {
        if (!in_unit(b.charge_efficiency) || !in_unit(b.discharge_efficiency)) {
            throw InvalidInput("battery '" + b.name + "' efficiencies must lie in (0,1]");
        }
        if (!in_unit(b.max_depth_of_discharge) || !in_unit(b.max_state_of_charge)) {
            throw InvalidInput("battery '" + b.name + "' DoD/SoC limits must lie in (0,1]");
        }
        if (b.invest_per_kwh < 0 || b.om_per_kwh_year < 0 || b.energy_density_kwh_per_m3 <= 0) {
            throw InvalidInput("battery '" + b.name + "' pricing/density must be non-negative");
        }
    }
    if (finance.interest_rate < 0 || finance.lifetime_years <= 0) {
        throw InvalidInput("finance parameters invalid");
    }
    if (big_m_kw <= 0 || battery_cap_big_m_kwh <= 0) throw InvalidInput("big-M values must be positive");
    if (charge_rate_cap <= 0 || discharge_rate_cap <= 0) {
        throw InvalidInput("battery rate caps must be positive");
    }
}

const std::vector<double>& TariffSchedule::prices_for(const std::string& season) const {
    auto it = per_season_prices.find(season);
    return it != per_season_prices.end() ? it->second : grid_price_per_kwh;
}

void TariffSchedule::validate(const std::vector<std::string>& season_names) const {
    auto check = [](const std::vector<double>& prices, const std::string& label) {
        if (prices.size() != kTimepoints) {
            throw InvalidInput("tariff schedule '" + label + "' must have exactly " +
                               std::to_string(kTimepoints) + " timepoint prices, found " +
                               std::to_string(prices.size()));
        }
        for (double p : prices) {
            if (p < 0.0) throw InvalidInput("tariff '" + label + "' has a negative price");
        }
    };
    check(grid_price_per_kwh, "default");
    for (const auto& [season, prices] : per_season_prices) check(prices, season);
    for (const auto& name : season_names) check(prices_for(name), name);
    if (fit_export_per_kwh < 0 || fit_generation_per_kwh < 0) {
        throw InvalidInput("feed-in tariffs must be non-negative");
    }
}

const BuildingData& CaseData::building(const std::string& id) const {
    return buildings[static_cast<std::size_t>(building_index(id))];
}

int CaseData::building_index(const std::string& id) const {
    for (std::size_t i = 0; i < buildings.size(); ++i) {
        if (buildings[i].id == id) return static_cast<int>(i);
    }
    throw StructuralError("unknown building '" + id + "'");
}

void CaseData::validate() const {
    catalog.validate();
    if (buildings.empty()) throw InvalidInput("no buildings");
    if (seasons.empty()) throw InvalidInput("no seasons");

    std::vector<std::string> season_names;
    int total_days = 0;
    for (const auto& s : seasons) {
        season_names.push_back(s.name);
        if (s.n_days <= 0) throw InvalidInput("season '" + s.name + "' has no days");
        if (s.dt_hours <= 0) throw InvalidInput("season '" + s.name + "' has non-positive dt");
        if (s.irradiance_kw_m2.size() != kTimepoints) {
            throw InvalidInput("irradiance profile for season '" + s.name + "' must have " +
                               std::to_string(kTimepoints) + " values, found " +
                               std::to_string(s.irradiance_kw_m2.size()));
        }
        for (double v : s.irradiance_kw_m2) {
            if (v < 0) throw InvalidInput("negative irradiance in season '" + s.name + "'");
        }
        total_days += s.n_days;
    }
    if (total_days != 365) {
        throw InvalidInput("season day counts must sum to 365, found " +
                           std::to_string(total_days));
    }
    tariffs.validate(season_names);

    std::set<std::string> seen;
    for (const auto& b : buildings) {
        if (!seen.insert(b.id).second) throw InvalidInput("duplicate building id '" + b.id + "'");
        if (b.roof_area_m2 < 0 || b.volume_available_m3 < 0) {
            throw InvalidInput("building '" + b.id + "' has negative space data");
        }
        for (const auto& s : seasons) {
            for (const auto* profiles : {&b.elec_demand_kw, &b.heat_demand_kw}) {
                auto it = profiles->find(s.name);
                const char* which = (profiles == &b.elec_demand_kw) ? "demand" : "heat";
                if (it == profiles->end()) {
                    throw InvalidInput("building '" + b.id + "' is missing the " +
                                       std::string(which) + " profile for season '" + s.name + "'");
                }
                if (it->second.size() != kTimepoints) {
                    throw InvalidInput("building '" + b.id + "' " + which + " profile for '" +
                                       s.name + "' has " + std::to_string(it->second.size()) +
                                       " values, expected " + std::to_string(kTimepoints));
                }
                for (double v : it->second) {
                    if (v < 0) {
                        throw InvalidInput("building '" + b.id + "' has a negative " + which +
                                           " value in season '" + s.name + "'");
                    }
                }
            }
        }
    }

    if (!(load_power_factor > 0.0 && load_power_factor <= 1.0)) {
        throw InvalidInput("load power factor must lie in (0,1]");
    }

    if (!network.buses.empty()) {
        network.validate();
        std::set<std::string> attached;
        for (const auto& bus : network.buses) {
            for (const auto& id : bus.building_ids) attached.insert(id);
        }
        for (const auto& b : buildings) {
            if (!attached.count(b.id)) {
                throw InvalidInput("building '" + b.id + "' is not attached to any network bus");
            }
        }
        for (const auto& id : attached) {
            building_index(id);  // throws for buildings the case does not know
        }
    }
}

CaseData CaseData::without_storage() const {
    CaseData copy = *this;
    for (auto& b : copy.buildings) b.volume_available_m3 = 0.0;
    copy.catalog.storage_allowed = false;
    return copy;
}

}  // namespace desopf::des
