#pragma once

#include <map>
#include <string>
#include <vector>

#include "desopf/common.hpp"
#include "desopf/network/topology.hpp"

namespace desopf::des {

inline constexpr int kTimepoints = 24;

struct PvTechnology {
    double invest_per_panel = 450.0;       // £/panel
    double panel_area_m2 = 1.75;
    double panel_rating_kw = 0.25;         // kW per panel
    double efficiency = 0.135;
    double fixed_om_per_kw_year = 12.5;    // £/kW-yr
    double var_om_per_kwh = 0.005;         // £/kWh produced
};

struct BoilerTechnology {
    double invest_per_kw = 40.0;
    double efficiency = 0.94;
    double gas_price_per_kwh = 0.02514;
    double max_capacity_kw = kInf;
};

struct BatteryTechnology {
    std::string name = "li_ion";
    double invest_per_kwh = 270.0;
    double om_per_kwh_year = 11.0;
    double energy_density_kwh_per_m3 = 20.0;  // kWh per m^3 installed
    double max_depth_of_discharge = 0.85;
    double max_state_of_charge = 0.9;
    double charge_efficiency = 0.94;
    double discharge_efficiency = 0.94;
};

struct Finance {
    double interest_rate = 0.075;
    int lifetime_years = 20;
};

struct TechnologyCatalog {
    PvTechnology pv;
    BoilerTechnology boiler;
    std::vector<BatteryTechnology> batteries{BatteryTechnology{}};
    Finance finance;

    // Model constants that the formulation leaves open.
    double big_m_kw = 1000.0;              // purchase/sell and charge/discharge exclusivity
    double battery_cap_big_m_kwh = 100.0;  // battery capacity selector
    double charge_rate_cap = 0.5;          // fraction of capacity per timestep
    double discharge_rate_cap = 0.5;

    bool pv_allowed = true;
    bool storage_allowed = true;

    /// Annuity factor i(1+i)^n / ((1+i)^n - 1).
    double capital_recovery_factor() const;

    void validate() const;
};

struct TariffSchedule {
    std::vector<double> grid_price_per_kwh;                        // 24 entries, default schedule
    std::map<std::string, std::vector<double>> per_season_prices;  // optional overrides
    double fit_export_per_kwh = 0.0477;
    double fit_generation_per_kwh = 0.1586;
    std::string currency = "GBP";

    const std::vector<double>& prices_for(const std::string& season) const;
    void validate(const std::vector<std::string>& season_names) const;
};

struct BuildingData {
    std::string id;
    double roof_area_m2 = 0.0;
    double volume_available_m3 = 0.0;
    std::map<std::string, std::vector<double>> elec_demand_kw;  // season -> 24 values
    std::map<std::string, std::vector<double>> heat_demand_kw;
};

struct SeasonSpec {
    std::string name;
    int n_days = 0;
    double dt_hours = 1.0;
    std::vector<double> irradiance_kw_m2;  // 24 values
};

struct CaseData {
    std::string name = "case";
    TechnologyCatalog catalog;
    TariffSchedule tariffs;
    std::vector<BuildingData> buildings;
    std::vector<SeasonSpec> seasons;
    network::NetworkTopology network;
    double load_power_factor = 0.95;

    const BuildingData& building(const std::string& id) const;
    int building_index(const std::string& id) const;

    /// Checks profile lengths, season-day totals, duplicate ids, negative data,
    /// and that every building sits on exactly one network bus.
    void validate() const;

    /// Scenario-1 variant: storage disabled (all available volumes zeroed).
    CaseData without_storage() const;
};

}  // namespace desopf::des
