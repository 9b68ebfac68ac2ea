#include "desopf/network/topology_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace desopf::network {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& where,
                       const std::string& what) {
    throw InvalidInput(source + ": " + where + ": " + what);
}

const json& require(const json& node, const char* key, const std::string& source,
                    const std::string& where) {
    auto it = node.find(key);
    if (it == node.end()) fail(source, where, std::string("missing field '") + key + "'");
    return *it;
}

double require_number(const json& node, const char* key, const std::string& source,
                      const std::string& where) {
    const json& v = require(node, key, source, where);
    if (!v.is_number()) fail(source, where + "." + key, "expected a number");
    return v.get<double>();
}

int require_int(const json& node, const char* key, const std::string& source,
                const std::string& where) {
    const json& v = require(node, key, source, where);
    if (!v.is_number_integer()) fail(source, where + "." + key, "expected an integer");
    return v.get<int>();
}

}  // namespace

const char* to_string(LoadConfiguration config) {
    return config == LoadConfiguration::Wye ? "wye" : "delta";
}

LoadConfiguration configuration_from_string(const std::string& text) {
    if (text == "delta") return LoadConfiguration::Delta;
    if (text == "wye") return LoadConfiguration::Wye;
    throw InvalidInput("unknown load configuration '" + text + "' (expected delta or wye)");
}

NetworkTopology parse_network_json(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw InvalidInput(source + ": " + err.what());
    }
    if (!doc.is_object()) fail(source, "$", "top-level value must be an object");

    NetworkTopology topo;

    const json& config = require(doc, "configuration", source, "$");
    if (!config.is_string()) fail(source, "$.configuration", "expected a string");
    topo.configuration = configuration_from_string(config.get<std::string>());

    const json& bases = require(doc, "bases", source, "$");
    topo.bases.s_base_va = require_number(bases, "s_base_va", source, "$.bases");
    topo.bases.v_base_v = require_number(bases, "v_base_v", source, "$.bases");

    const json& vb = require(doc, "v_bounds_pu", source, "$");
    topo.v_bounds.lower_pu = require_number(vb, "lower", source, "$.v_bounds_pu");
    topo.v_bounds.upper_pu = require_number(vb, "upper", source, "$.v_bounds_pu");

    const int slack_id = require_int(doc, "slack_bus", source, "$");

    const json& buses = require(doc, "buses", source, "$");
    if (!buses.is_array() || buses.empty()) fail(source, "$.buses", "expected a non-empty array");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const std::string where = "$.buses[" + std::to_string(i) + "]";
        const json& b = buses[i];
        if (!b.is_object()) fail(source, where, "expected an object");
        Bus bus;
        bus.id = require_int(b, "id", source, where);
        if (auto it = b.find("buildings"); it != b.end()) {
            if (!it->is_array()) fail(source, where + ".buildings", "expected an array");
            for (const auto& name : *it) {
                if (!name.is_string()) fail(source, where + ".buildings", "expected strings");
                bus.building_ids.push_back(name.get<std::string>());
            }
        }
        bus.kind = bus.building_ids.empty() ? BusKind::Passive : BusKind::LoadGenerator;
        topo.buses.push_back(std::move(bus));
    }

    bool slack_found = false;
    for (auto& bus : topo.buses) {
        if (bus.id == slack_id) {
            if (!bus.building_ids.empty()) {
                fail(source, "$.slack_bus", "slack bus cannot carry buildings");
            }
            bus.kind = BusKind::Slack;
            slack_found = true;
        }
    }
    if (!slack_found) {
        fail(source, "$.slack_bus", "bus " + std::to_string(slack_id) + " is not declared");
    }

    const json& branches = require(doc, "branches", source, "$");
    if (!branches.is_array()) fail(source, "$.branches", "expected an array");
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const std::string where = "$.branches[" + std::to_string(i) + "]";
        const json& b = branches[i];
        if (!b.is_object()) fail(source, where, "expected an object");
        Branch br;
        br.from = require_int(b, "from", source, where);
        br.to = require_int(b, "to", source, where);
        br.resistance_ohm = require_number(b, "r_ohm", source, where);
        br.reactance_ohm = require_number(b, "x_ohm", source, where);
        br.i_max_a = require_number(b, "i_max_a", source, where);
        topo.branches.push_back(br);
    }

    try {
        topo.validate();
    } catch (const std::exception& err) {
        throw InvalidInput(source + ": " + err.what());
    }
    return topo;
}

NetworkTopology load_network(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open network file " + file.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_network_json(buffer.str(), file.filename().string());
}

std::string network_to_json(const NetworkTopology& topology) {
    json doc;
    doc["configuration"] = to_string(topology.configuration);
    doc["bases"] = {{"s_base_va", topology.bases.s_base_va},
                    {"v_base_v", topology.bases.v_base_v}};
    doc["v_bounds_pu"] = {{"lower", topology.v_bounds.lower_pu},
                          {"upper", topology.v_bounds.upper_pu}};
    json buses = json::array();
    for (const auto& bus : topology.buses) {
        json b;
        b["id"] = bus.id;
        if (!bus.building_ids.empty()) b["buildings"] = bus.building_ids;
        if (bus.kind == BusKind::Slack) doc["slack_bus"] = bus.id;
        buses.push_back(std::move(b));
    }
    doc["buses"] = std::move(buses);
    json branches = json::array();
    for (const auto& br : topology.branches) {
        branches.push_back({{"from", br.from},
                            {"to", br.to},
                            {"r_ohm", br.resistance_ohm},
                            {"x_ohm", br.reactance_ohm},
                            {"i_max_a", br.i_max_a}});
    }
    doc["branches"] = std::move(branches);
    return doc.dump(2) + "\n";
}

void save_network(const NetworkTopology& topology, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw InvalidInput("cannot write network file " + file.string());
    out << network_to_json(topology);
}

}  // namespace desopf::network
