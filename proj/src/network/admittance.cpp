#include "desopf/network/admittance.hpp"

#include <cmath>

namespace desopf::network {

std::complex<double> series_admittance(const Branch& branch, double z_base_ohm) {
    if (!(z_base_ohm > 0.0)) throw InvalidInput("impedance base must be positive");
    if (branch.resistance_ohm == 0.0 && branch.reactance_ohm == 0.0) {
        throw InvalidInput("branch (" + std::to_string(branch.from) + "," +
                           std::to_string(branch.to) + ") has zero impedance");
    }
    const std::complex<double> z_pu(branch.resistance_ohm / z_base_ohm,
                                    branch.reactance_ohm / z_base_ohm);
    return 1.0 / z_pu;
}

double series_admittance_sq(const Branch& branch, double z_base_ohm) {
    return std::norm(series_admittance(branch, z_base_ohm));
}

AdmittanceMatrix assemble_admittance(const NetworkTopology& topology) {
    topology.validate();
    const int n = static_cast<int>(topology.buses.size());
    AdmittanceMatrix out;
    out.y = Eigen::MatrixXcd::Zero(n, n);
    const double z_base = topology.bases.z_base_ohm();
    for (const auto& branch : topology.branches) {
        const auto y_series = series_admittance(branch, z_base);
        const int a = topology.bus_index(branch.from);
        const int b = topology.bus_index(branch.to);
        out.y(a, a) += y_series;
        out.y(b, b) += y_series;
        out.y(a, b) -= y_series;
        out.y(b, a) -= y_series;
    }
    return out;
}

CurrentLimitPayload current_limit_squared(const Branch& branch,
                                          LoadConfiguration config,
                                          const PerUnitBases& bases) {
    if (!(branch.i_max_a > 0.0)) {
        throw InvalidInput("branch (" + std::to_string(branch.from) + "," +
                           std::to_string(branch.to) + ") needs a positive current rating");
    }
    CurrentLimitPayload payload;
    payload.admittance_sq = series_admittance_sq(branch, bases.z_base_ohm());
    const double i_max_pu = branch.i_max_a / bases.i_base_a();
    payload.rhs = i_max_pu * i_max_pu / payload.admittance_sq;
    payload.voltage_diff_scale = (config == LoadConfiguration::Wye) ? 1.0 / 9.0 : 1.0;
    return payload;
}

double branch_current_pu(double v_n, double theta_n, double v_m, double theta_m,
                         double admittance_sq, LoadConfiguration config) {
    const double dre = v_n * std::cos(theta_n) - v_m * std::cos(theta_m);
    const double dim = v_n * std::sin(theta_n) - v_m * std::sin(theta_m);
    const double current = std::sqrt(admittance_sq * (dre * dre + dim * dim));
    return (config == LoadConfiguration::Wye) ? current / 3.0 : current;
}

}  // namespace desopf::network
