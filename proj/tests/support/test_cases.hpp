#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "desopf/des/case_data.hpp"

namespace desopf::testsupport {

/// Flat 24-value profile.
inline std::vector<double> flat(double value) { return std::vector<double>(24, value); }

/// Smooth day shape peaking at `peak` around hour `centre` (0-based).
inline std::vector<double> bump(double peak, double base, int centre, double width) {
    std::vector<double> p(24);
    for (int t = 0; t < 24; ++t) {
        const double d = (t - centre) / width;
        p[static_cast<std::size_t>(t)] = base + (peak - base) * std::exp(-0.5 * d * d);
    }
    return p;
}

/// Representative clear-day irradiance in kW/m^2, zero outside daylight.
inline std::vector<double> irradiance(double peak) {
    std::vector<double> p(24, 0.0);
    for (int t = 6; t <= 18; ++t) {
        const double x = (t - 12.0) / 3.2;
        p[static_cast<std::size_t>(t)] = peak * std::exp(-0.5 * x * x);
    }
    return p;
}

/// Economy-7 style schedule: cheap between midnight and 07:00.
inline std::vector<double> economy7(double day, double night) {
    std::vector<double> p(24, day);
    for (int t = 0; t < 7; ++t) p[static_cast<std::size_t>(t)] = night;
    return p;
}

/// One building, zero heat demand, PV disallowed, flat 1 kW load, a single
/// 365-day season and a flat tariff. The optimum buys every kilowatt-hour:
/// 24 * 1 kW * 0.1389 GBP/kWh * 365 d = 1,216.764 GBP.
inline des::CaseData toy_grid_only_case() {
    des::CaseData c;
    c.name = "toy_grid_only";
    c.tariffs.grid_price_per_kwh = flat(0.1389);
    des::BuildingData b;
    b.id = "H1";
    b.roof_area_m2 = 0.0;
    b.volume_available_m3 = 0.0;
    b.elec_demand_kw["year"] = flat(1.0);
    b.heat_demand_kw["year"] = flat(0.0);
    c.buildings.push_back(b);
    des::SeasonSpec season;
    season.name = "year";
    season.n_days = 365;
    season.dt_hours = 1.0;
    season.irradiance_kw_m2 = flat(0.0);
    c.seasons.push_back(season);
    return c;
}

struct SmallCaseSpec {
    int n_buildings = 2;
    int n_seasons = 2;
    bool with_storage = true;
    bool with_network = true;
    double i_max_a = 400.0;     // generous by default
    unsigned seed = 1;
    network::LoadConfiguration configuration = network::LoadConfiguration::Delta;
};

/// Randomised but always-feasible desk-scale case: radial feeder with one
/// building per load bus, smooth demand/heat profiles, seasonal irradiance.
inline des::CaseData small_random_case(const SmallCaseSpec& spec) {
    std::mt19937 rng(spec.seed);
    std::uniform_real_distribution<double> peak_elec(2.0, 16.0);
    std::uniform_real_distribution<double> peak_heat(3.0, 30.0);
    std::uniform_real_distribution<double> roof(60.0, 400.0);
    std::uniform_real_distribution<double> vol(0.0, 5.0);
    std::uniform_real_distribution<double> irr_peak(0.45, 0.8);
    std::uniform_int_distribution<int> centre(17, 20);

    des::CaseData c;
    c.name = "random_case_" + std::to_string(spec.seed);
    c.tariffs.grid_price_per_kwh = economy7(0.1389, 0.07);

    const char* season_pool[] = {"winter", "spring", "summer", "autumn"};
    const int days_pool[] = {90, 91, 92, 92};
    int remaining = 365;
    for (int s = 0; s < spec.n_seasons; ++s) {
        des::SeasonSpec sp;
        sp.name = season_pool[s % 4];
        sp.n_days = (s == spec.n_seasons - 1) ? remaining : days_pool[s % 4];
        remaining -= sp.n_days;
        sp.dt_hours = 1.0;
        sp.irradiance_kw_m2 = irradiance(irr_peak(rng) * (sp.name == std::string("summer") ? 1.2 : 0.8));
        c.seasons.push_back(sp);
    }

    for (int i = 0; i < spec.n_buildings; ++i) {
        des::BuildingData b;
        b.id = "B" + std::to_string(i + 1);
        b.roof_area_m2 = roof(rng);
        b.volume_available_m3 = spec.with_storage ? vol(rng) : 0.0;
        const double pe = peak_elec(rng);
        const double ph = peak_heat(rng);
        for (const auto& sp : c.seasons) {
            b.elec_demand_kw[sp.name] = bump(pe, 0.25 * pe, centre(rng), 3.0);
            b.heat_demand_kw[sp.name] =
                bump(ph * (sp.name == std::string("winter") ? 1.0 : 0.5), 0.15 * ph, 8, 2.5);
        }
        c.buildings.push_back(b);
    }

    if (spec.with_network) {
        network::NetworkTopology net;
        net.configuration = spec.configuration;
        net.v_bounds.lower_pu = 0.90;
        net.v_bounds.upper_pu = 1.10;
        network::Bus slack;
        slack.id = 1;
        slack.kind = network::BusKind::Slack;
        net.buses.push_back(slack);
        for (int i = 0; i < spec.n_buildings; ++i) {
            network::Bus bus;
            bus.id = i + 2;
            bus.kind = network::BusKind::LoadGenerator;
            bus.building_ids = {c.buildings[static_cast<std::size_t>(i)].id};
            net.buses.push_back(bus);
            net.branches.push_back({i + 1, i + 2, 0.04, 0.025, spec.i_max_a});
        }
        c.network = net;
    }
    return c;
}

}  // namespace desopf::testsupport
