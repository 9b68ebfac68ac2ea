#include "desopf/network/per_unit.hpp"

namespace desopf::network {

namespace {

double base_for(QuantityKind kind, const PerUnitBases& bases) {
    switch (kind) {
        case QuantityKind::Power:
            return bases.s_base_va;
        case QuantityKind::Voltage:
            return bases.v_base_v;
        case QuantityKind::Current:
            return bases.i_base_a();
    }
    throw InvalidInput("unknown per-unit quantity kind");
}

}  // namespace

double to_per_unit(double value, QuantityKind kind, const PerUnitBases& bases) {
    bases.validate();
    return value / base_for(kind, bases);
}

double from_per_unit(double value, QuantityKind kind, const PerUnitBases& bases) {
    bases.validate();
    return value * base_for(kind, bases);
}

}  // namespace desopf::network
