#include "desopf/network/topology.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace desopf::network {

double PerUnitBases::i_base_a() const {
    return s_base_va / (std::sqrt(3.0) * v_base_v);
}

void PerUnitBases::validate() const {
    if (!(s_base_va > 0.0) || !(v_base_v > 0.0)) {
        throw InvalidInput("per-unit bases must be positive");
    }
}

int NetworkTopology::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
    }
    throw StructuralError("network has no slack bus");
}

int NetworkTopology::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == bus_id) return static_cast<int>(i);
    }
    throw StructuralError("unknown bus id " + std::to_string(bus_id));
}

const Bus& NetworkTopology::bus_by_id(int bus_id) const {
    return buses[static_cast<std::size_t>(bus_index(bus_id))];
}

namespace {

// Union-find over bus positions, used for the connectivity check.
class DisjointSet {
public:
    explicit DisjointSet(int n) : parent_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
    std::vector<int> parent_;
};

}  // namespace

void NetworkTopology::validate() const {
    if (buses.empty()) throw InvalidInput("network has no buses");
    bases.validate();

    int slack_count = 0;
    std::set<int> ids;
    std::map<std::string, int> building_home;
    for (const auto& bus : buses) {
        if (!ids.insert(bus.id).second) {
            throw InvalidInput("duplicate bus id " + std::to_string(bus.id));
        }
        if (bus.kind == BusKind::Slack) ++slack_count;
        if (bus.kind != BusKind::LoadGenerator && !bus.building_ids.empty()) {
            throw InvalidInput("bus " + std::to_string(bus.id) +
                               " carries buildings but is not a load/generator bus");
        }
        for (const auto& b : bus.building_ids) {
            auto [it, inserted] = building_home.emplace(b, bus.id);
            if (!inserted) {
                throw InvalidInput("building '" + b + "' attached to buses " +
                                   std::to_string(it->second) + " and " +
                                   std::to_string(bus.id));
            }
        }
    }
    if (slack_count != 1) {
        throw InvalidInput("network must have exactly one slack bus, found " +
                           std::to_string(slack_count));
    }

    for (const auto& br : branches) {
        if (br.from == br.to) {
            throw InvalidInput("branch connects bus " + std::to_string(br.from) +
                               " to itself");
        }
        if (br.resistance_ohm < 0.0) {
            throw InvalidInput("branch (" + std::to_string(br.from) + "," +
                               std::to_string(br.to) + ") has negative resistance");
        }
        if (br.resistance_ohm == 0.0 && br.reactance_ohm == 0.0) {
            throw InvalidInput("branch (" + std::to_string(br.from) + "," +
                               std::to_string(br.to) + ") has zero impedance");
        }
        bus_index(br.from);
        bus_index(br.to);
    }

    if (!(v_bounds.lower_pu < 1.0 && 1.0 < v_bounds.upper_pu)) {
        throw InvalidInput("voltage bounds must straddle 1.0 pu");
    }

    // Connectivity: every bus must reach the slack.
    DisjointSet ds(static_cast<int>(buses.size()));
    for (const auto& br : branches) {
        ds.unite(bus_index(br.from), bus_index(br.to));
    }
    const int slack_root = ds.find(slack_index());
    std::vector<int> isolated;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (ds.find(static_cast<int>(i)) != slack_root) isolated.push_back(buses[i].id);
    }
    if (!isolated.empty()) {
        std::ostringstream oss;
        oss << "network is disconnected; buses not reaching the slack:";
        for (int id : isolated) oss << ' ' << id;
        throw StructuralError(oss.str());
    }
}

}  // namespace desopf::network
