#pragma once

#include "desopf/network/topology.hpp"

namespace desopf::network {

enum class QuantityKind { Power, Voltage, Current };

double to_per_unit(double value, QuantityKind kind, const PerUnitBases& bases);
double from_per_unit(double value, QuantityKind kind, const PerUnitBases& bases);

}  // namespace desopf::network
