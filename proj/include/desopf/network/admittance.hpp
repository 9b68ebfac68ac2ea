#pragma once

#include <Eigen/Dense>
#include <complex>

#include "desopf/network/topology.hpp"

namespace desopf::network {

/// Dense nodal admittance matrix in per-unit siemens, indexed by bus position
/// (not bus id). Symmetric; with the no-shunt assumption every row sums to zero.
struct AdmittanceMatrix {
    Eigen::MatrixXcd y;

    int size() const { return static_cast<int>(y.rows()); }
    double conductance(int n, int m) const { return y(n, m).real(); }
    double susceptance(int n, int m) const { return y(n, m).imag(); }
};

/// Per-unit series admittance of one branch, 1 / ((R + jX) / z_base).
/// A branch with zero impedance is rejected.
std::complex<double> series_admittance(const Branch& branch, double z_base_ohm);

/// Squared magnitude of the per-unit series admittance, as used on the
/// right-hand side of branch-current limits.
double series_admittance_sq(const Branch& branch, double z_base_ohm);

AdmittanceMatrix assemble_admittance(const NetworkTopology& topology);

/// Data needed to express one branch-current limit on squared voltage
/// differences: scale * |V_n - V_m|^2 <= rhs, with rhs = (I_max_pu)^2 / yhat^2.
/// Delta keeps scale 1; wye divides the squared term by 9 (line current a third
/// of the delta value at the same voltage profile).
struct CurrentLimitPayload {
    double admittance_sq = 0.0;        // yhat^2
    double rhs = 0.0;                  // (I_max_pu)^2 / yhat^2
    double voltage_diff_scale = 1.0;   // 1 (delta) or 1/9 (wye)
};

CurrentLimitPayload current_limit_squared(const Branch& branch,
                                          LoadConfiguration config,
                                          const PerUnitBases& bases);

/// Line-current magnitude (per unit) implied by a voltage pair across a branch
/// with squared series admittance yhat^2, respecting the configuration
/// convention (wye reports a third of the delta value).
double branch_current_pu(double v_n, double theta_n, double v_m, double theta_m,
                         double admittance_sq, LoadConfiguration config);

}  // namespace desopf::network
