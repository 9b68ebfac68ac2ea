#pragma once

#include <complex>
#include <string>
#include <vector>

#include "desopf/common.hpp"

namespace desopf::network {

enum class BusKind { Slack, LoadGenerator, Passive };

enum class LoadConfiguration { Delta, Wye };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::Passive;
    std::vector<std::string> building_ids;
};

struct Branch {
    int from = 0;
    int to = 0;
    double resistance_ohm = 0.0;
    double reactance_ohm = 0.0;
    double i_max_a = 0.0;  // line current rating
};

/// Normalisation bases for the per-unit system. Line-quantity current base
/// i_base = s_base / (sqrt(3) * v_base); impedance base z_base = v_base^2 / s_base.
struct PerUnitBases {
    double s_base_va = 1e6;
    double v_base_v = 400.0;

    double z_base_ohm() const { return v_base_v * v_base_v / s_base_va; }
    double i_base_a() const;

    void validate() const;
};

struct VoltageBounds {
    double lower_pu = 0.94;
    double upper_pu = 1.10;
};

struct NetworkTopology {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    PerUnitBases bases;
    VoltageBounds v_bounds;
    LoadConfiguration configuration = LoadConfiguration::Delta;

    int slack_index() const;
    int bus_index(int bus_id) const;
    const Bus& bus_by_id(int bus_id) const;

    /// Checks the structural invariants: exactly one slack, buildings attached
    /// to exactly one bus, branch data sane, connected graph, V bounds straddle 1.
    void validate() const;
};

}  // namespace desopf::network
