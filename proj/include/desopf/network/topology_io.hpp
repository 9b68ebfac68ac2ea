#pragma once

#include <filesystem>
#include <string>

#include "desopf/network/topology.hpp"

namespace desopf::network {

/// Parses a network JSON document:
///
///   {
///     "configuration": "delta" | "wye",
///     "bases": {"s_base_va": 1e6, "v_base_v": 400.0},
///     "v_bounds_pu": {"lower": 0.94, "upper": 1.10},
///     "slack_bus": 1,
///     "buses": [{"id": 1}, {"id": 2, "buildings": ["A"]}, ...],
///     "branches": [{"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.06, "i_max_a": 300.0}, ...]
///   }
///
/// Buses listed with buildings become load/generator buses; the slack is named by
/// `slack_bus`; everything else is passive. Errors name the offending field.
NetworkTopology parse_network_json(const std::string& text, const std::string& source_name);

NetworkTopology load_network(const std::filesystem::path& file);

std::string network_to_json(const NetworkTopology& topology);

void save_network(const NetworkTopology& topology, const std::filesystem::path& file);

const char* to_string(LoadConfiguration config);
LoadConfiguration configuration_from_string(const std::string& text);

}  // namespace desopf::network
