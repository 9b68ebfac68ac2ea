#include "desopf/opf/opf_model.hpp"

#include <numbers>

namespace desopf::opf {

using model::LinearConstraint;
using model::LinearTerm;
using model::Sense;
using model::VarKind;
using network::BusKind;

namespace {

std::string bus_tag(const std::string& base, int bus_id, const std::string& s, int t) {
    return base + "[" + std::to_string(bus_id) + "," + s + "," + std::to_string(t + 1) + "]";
}

}  // namespace

std::vector<int> OpfIndex::all_ids() const {
    std::vector<int> ids;
    for (const auto* group : {&v_mag, &theta, &p_inj, &q_inj}) {
        for (int v : *group) {
            if (v >= 0) ids.push_back(v);
        }
    }
    return ids;
}

PowerBalanceResidual::PowerBalanceResidual(bool reactive, int injection_var, int v_var,
                                           int theta_var, double self_conductance,
                                           double self_susceptance,
                                           std::vector<Neighbour> neighbours)
    : reactive_(reactive),
      inj_(injection_var),
      v_(v_var),
      theta_(theta_var),
      g_self_(self_conductance),
      b_self_(self_susceptance),
      neighbours_(std::move(neighbours)) {
    vars_.push_back(inj_);
    vars_.push_back(v_);
    vars_.push_back(theta_);
    for (const auto& nb : neighbours_) {
        vars_.push_back(nb.v_var);
        vars_.push_back(nb.theta_var);
    }
}

double PowerBalanceResidual::value(std::span<const double> x) const {
    const double vn = x[static_cast<std::size_t>(v_)];
    const double tn = x[static_cast<std::size_t>(theta_)];
    // Self term: cos(0) = 1, sin(0) = 0.
    double sum = vn * (reactive_ ? -b_self_ : g_self_);
    for (const auto& nb : neighbours_) {
        const double vm = x[static_cast<std::size_t>(nb.v_var)];
        const double d = tn - x[static_cast<std::size_t>(nb.theta_var)];
        const double f = reactive_ ? nb.conductance * std::sin(d) - nb.susceptance * std::cos(d)
                                   : nb.conductance * std::cos(d) + nb.susceptance * std::sin(d);
        sum += vm * f;
    }
    return x[static_cast<std::size_t>(inj_)] - vn * sum;
}

void PowerBalanceResidual::gradient(std::span<const double> x,
                                    std::vector<LinearTerm>& out) const {
    const double vn = x[static_cast<std::size_t>(v_)];
    const double tn = x[static_cast<std::size_t>(theta_)];
    const double f_self = reactive_ ? -b_self_ : g_self_;
    double dv_n = 2.0 * vn * f_self;
    double dth_n = 0.0;
    out.push_back({inj_, 1.0});
    for (const auto& nb : neighbours_) {
        const double vm = x[static_cast<std::size_t>(nb.v_var)];
        const double d = tn - x[static_cast<std::size_t>(nb.theta_var)];
        const double t_val = nb.conductance * std::cos(d) + nb.susceptance * std::sin(d);
        const double u_val = nb.conductance * std::sin(d) - nb.susceptance * std::cos(d);
        const double f = reactive_ ? u_val : t_val;
        const double fp = reactive_ ? t_val : -u_val;  // dF/d(theta_n)
        dv_n += vm * f;
        dth_n += vn * vm * fp;
        out.push_back({nb.v_var, -vn * f});
        out.push_back({nb.theta_var, vn * vm * fp});
    }
    out.push_back({v_, -dv_n});
    out.push_back({theta_, -dth_n});
}

void PowerBalanceResidual::add_scaled_hessian(std::span<const double> x, double weight,
                                              std::vector<std::tuple<int, int, double>>& out) const {
    // Residual is inj - S(V, theta); contributions are -weight * Hessian(S).
    const double w = -weight;
    const double vn = x[static_cast<std::size_t>(v_)];
    const double tn = x[static_cast<std::size_t>(theta_)];
    const double f_self = reactive_ ? -b_self_ : g_self_;
    out.emplace_back(v_, v_, w * 2.0 * f_self);
    double d2_vn_thn = 0.0;   // d2S / dVn dThn
    double d2_thn_thn = 0.0;  // d2S / dThn^2
    for (const auto& nb : neighbours_) {
        const double vm = x[static_cast<std::size_t>(nb.v_var)];
        const double d = tn - x[static_cast<std::size_t>(nb.theta_var)];
        const double t_val = nb.conductance * std::cos(d) + nb.susceptance * std::sin(d);
        const double u_val = nb.conductance * std::sin(d) - nb.susceptance * std::cos(d);
        const double f = reactive_ ? u_val : t_val;
        const double fp = reactive_ ? t_val : -u_val;
        const double fpp = reactive_ ? -u_val : -t_val;  // d2F/dThn^2
        out.emplace_back(v_, nb.v_var, w * f);
        out.emplace_back(nb.v_var, nb.theta_var, w * (-vn * fp));
        out.emplace_back(nb.theta_var, nb.theta_var, w * vn * vm * fpp);
        out.emplace_back(theta_, nb.theta_var, w * (-vn * vm * fpp));
        out.emplace_back(v_, nb.theta_var, w * (-vm * fp));
        out.emplace_back(theta_, nb.v_var, w * vn * fp);
        d2_vn_thn += vm * fp;
        d2_thn_thn += vn * vm * fpp;
    }
    out.emplace_back(v_, theta_, w * d2_vn_thn);
    out.emplace_back(theta_, theta_, w * d2_thn_thn);
}

CurrentLimitResidual::CurrentLimitResidual(int v_n, int theta_n, int v_m, int theta_m,
                                           double scale)
    : vn_(v_n), tn_(theta_n), vm_(v_m), tm_(theta_m), scale_(scale),
      vars_{v_n, theta_n, v_m, theta_m} {}

double CurrentLimitResidual::value(std::span<const double> x) const {
    const double vn = x[static_cast<std::size_t>(vn_)];
    const double vm = x[static_cast<std::size_t>(vm_)];
    const double tn = x[static_cast<std::size_t>(tn_)];
    const double tm = x[static_cast<std::size_t>(tm_)];
    const double re = vn * std::cos(tn) - vm * std::cos(tm);
    const double im = vn * std::sin(tn) - vm * std::sin(tm);
    return scale_ * (re * re + im * im);
}

void CurrentLimitResidual::gradient(std::span<const double> x,
                                    std::vector<LinearTerm>& out) const {
    const double vn = x[static_cast<std::size_t>(vn_)];
    const double vm = x[static_cast<std::size_t>(vm_)];
    const double d = x[static_cast<std::size_t>(tn_)] - x[static_cast<std::size_t>(tm_)];
    const double cd = std::cos(d), sd = std::sin(d);
    out.push_back({vn_, scale_ * (2.0 * vn - 2.0 * vm * cd)});
    out.push_back({vm_, scale_ * (2.0 * vm - 2.0 * vn * cd)});
    out.push_back({tn_, scale_ * 2.0 * vn * vm * sd});
    out.push_back({tm_, -scale_ * 2.0 * vn * vm * sd});
}

void CurrentLimitResidual::add_scaled_hessian(std::span<const double> x, double weight,
                                              std::vector<std::tuple<int, int, double>>& out) const {
    const double k = weight * scale_;
    const double vn = x[static_cast<std::size_t>(vn_)];
    const double vm = x[static_cast<std::size_t>(vm_)];
    const double d = x[static_cast<std::size_t>(tn_)] - x[static_cast<std::size_t>(tm_)];
    const double cd = std::cos(d), sd = std::sin(d);
    out.emplace_back(vn_, vn_, 2.0 * k);
    out.emplace_back(vm_, vm_, 2.0 * k);
    out.emplace_back(vn_, vm_, -2.0 * k * cd);
    out.emplace_back(vn_, tn_, 2.0 * k * vm * sd);
    out.emplace_back(vn_, tm_, -2.0 * k * vm * sd);
    out.emplace_back(vm_, tn_, 2.0 * k * vn * sd);
    out.emplace_back(vm_, tm_, -2.0 * k * vn * sd);
    out.emplace_back(tn_, tn_, 2.0 * k * vn * vm * cd);
    out.emplace_back(tm_, tm_, 2.0 * k * vn * vm * cd);
    out.emplace_back(tn_, tm_, -2.0 * k * vn * vm * cd);
}

OpfAttachment attach_opf(des::DesModel& model, const des::CaseData& case_data,
                         network::LoadConfiguration configuration,
                         const ReactiveLoadModel& reactive) {
    const auto& net = case_data.network;
    if (net.buses.empty()) throw InvalidInput("case has no network; cannot attach power flow");
    net.validate();

    auto& cs = model.system;
    OpfAttachment out;
    out.configuration = configuration;
    out.admittance = network::assemble_admittance(net);
    for (const auto& branch : net.branches) {
        out.limits.push_back(network::current_limit_squared(branch, configuration, net.bases));
    }

    OpfIndex& idx = out.index;
    idx.n_buses = static_cast<int>(net.buses.size());
    idx.n_seasons = model.index.n_seasons;
    idx.n_timepoints = model.index.n_timepoints;
    const int total = idx.n_buses * idx.n_seasons * idx.n_timepoints;
    idx.v_mag.assign(static_cast<std::size_t>(total), -1);
    idx.theta.assign(static_cast<std::size_t>(total), -1);
    idx.p_inj.assign(static_cast<std::size_t>(total), -1);
    idx.q_inj.assign(static_cast<std::size_t>(total), -1);

    const double pi = std::numbers::pi;
    const double s_base_kw = net.bases.s_base_va / 1000.0;
    const int slack = net.slack_index();

    // State variables, slack fixings and voltage/angle bounds.
    for (int b = 0; b < idx.n_buses; ++b) {
        const auto& bus = net.buses[static_cast<std::size_t>(b)];
        for (int s = 0; s < idx.n_seasons; ++s) {
            const std::string& sname = case_data.seasons[static_cast<std::size_t>(s)].name;
            for (int t = 0; t < idx.n_timepoints; ++t) {
                const int k = idx.bst(b, s, t);
                const int v = cs.add_variable(bus_tag("v_mag", bus.id, sname, t),
                                              net.v_bounds.lower_pu, net.v_bounds.upper_pu,
                                              VarKind::Continuous, 1.0);
                const int th = cs.add_variable(bus_tag("theta", bus.id, sname, t), -pi, pi);
                const int p = cs.add_variable(bus_tag("p_inj", bus.id, sname, t), -kInf, kInf);
                const int q = cs.add_variable(bus_tag("q_inj", bus.id, sname, t), -kInf, kInf);
                idx.v_mag[static_cast<std::size_t>(k)] = v;
                idx.theta[static_cast<std::size_t>(k)] = th;
                idx.p_inj[static_cast<std::size_t>(k)] = p;
                idx.q_inj[static_cast<std::size_t>(k)] = q;
                if (b == slack) {
                    cs.variable(v).lower = net.v_bounds.lower_pu;  // declared bounds stay
                    cs.fix_variable(v, 1.0);
                    cs.fix_variable(th, 0.0);
                } else if (bus.kind == BusKind::Passive) {
                    cs.fix_variable(p, 0.0);
                    cs.fix_variable(q, 0.0);
                }
            }
        }
    }

    // Nodal balances from the admittance rows.
    for (int b = 0; b < idx.n_buses; ++b) {
        const auto& bus = net.buses[static_cast<std::size_t>(b)];
        for (int s = 0; s < idx.n_seasons; ++s) {
            const std::string& sname = case_data.seasons[static_cast<std::size_t>(s)].name;
            for (int t = 0; t < idx.n_timepoints; ++t) {
                std::vector<PowerBalanceResidual::Neighbour> neighbours;
                for (int m = 0; m < idx.n_buses; ++m) {
                    if (m == b) continue;
                    const auto y = out.admittance.y(b, m);
                    if (y == std::complex<double>(0.0, 0.0)) continue;
                    neighbours.push_back({idx.v_mag[static_cast<std::size_t>(idx.bst(m, s, t))],
                                          idx.theta[static_cast<std::size_t>(idx.bst(m, s, t))],
                                          y.real(), y.imag()});
                }
                const int k = idx.bst(b, s, t);
                for (bool is_reactive : {false, true}) {
                    auto res = std::make_unique<PowerBalanceResidual>(
                        is_reactive,
                        is_reactive ? idx.q_inj[static_cast<std::size_t>(k)]
                                    : idx.p_inj[static_cast<std::size_t>(k)],
                        idx.v_mag[static_cast<std::size_t>(k)],
                        idx.theta[static_cast<std::size_t>(k)],
                        out.admittance.conductance(b, b), out.admittance.susceptance(b, b),
                        neighbours);
                    res->name = bus_tag(is_reactive ? "q_balance" : "p_balance", bus.id, sname, t);
                    res->sense = Sense::Equal;
                    res->rhs = 0.0;
                    cs.add_nonlinear(std::move(res));
                }
            }
        }
    }

    // Branch-current limits.
    for (std::size_t l = 0; l < net.branches.size(); ++l) {
        const auto& branch = net.branches[l];
        const auto& payload = out.limits[l];
        const int a = net.bus_index(branch.from);
        const int b = net.bus_index(branch.to);
        for (int s = 0; s < idx.n_seasons; ++s) {
            const std::string& sname = case_data.seasons[static_cast<std::size_t>(s)].name;
            for (int t = 0; t < idx.n_timepoints; ++t) {
                auto res = std::make_unique<CurrentLimitResidual>(
                    idx.v_mag[static_cast<std::size_t>(idx.bst(a, s, t))],
                    idx.theta[static_cast<std::size_t>(idx.bst(a, s, t))],
                    idx.v_mag[static_cast<std::size_t>(idx.bst(b, s, t))],
                    idx.theta[static_cast<std::size_t>(idx.bst(b, s, t))],
                    payload.voltage_diff_scale);
                res->name = "current_limit[" + std::to_string(branch.from) + "-" +
                            std::to_string(branch.to) + "," + sname + "," + std::to_string(t + 1) +
                            "]";
                res->sense = Sense::LessEqual;
                res->rhs = payload.rhs;
                cs.add_nonlinear(std::move(res));
            }
        }
    }

    // Linking rows: load/generator buses track the attached building flows,
    // with net consumption showing up as a negative injection.
    for (int b = 0; b < idx.n_buses; ++b) {
        const auto& bus = net.buses[static_cast<std::size_t>(b)];
        if (bus.kind != BusKind::LoadGenerator) continue;
        std::vector<int> attached;
        for (const auto& id : bus.building_ids) attached.push_back(case_data.building_index(id));
        for (int s = 0; s < idx.n_seasons; ++s) {
            const std::string& sname = case_data.seasons[static_cast<std::size_t>(s)].name;
            for (int t = 0; t < idx.n_timepoints; ++t) {
                const int k = idx.bst(b, s, t);
                LinearConstraint p_link{bus_tag("link_p", bus.id, sname, t),
                                        {{idx.p_inj[static_cast<std::size_t>(k)], 1.0}},
                                        Sense::Equal,
                                        0.0};
                double q_load_kw = 0.0;
                for (int i : attached) {
                    const auto& des_idx = model.index;
                    const int ist = des_idx.ist(i, s, t);
                    p_link.terms.push_back(
                        {des_idx.pv_export[static_cast<std::size_t>(ist)], -1.0 / s_base_kw});
                    p_link.terms.push_back(
                        {des_idx.grid_import[static_cast<std::size_t>(ist)], 1.0 / s_base_kw});
                    for (int c = 0; c < des_idx.n_batteries; ++c) {
                        p_link.terms.push_back(
                            {des_idx.grid_charge[static_cast<std::size_t>(des_idx.istc(i, s, t, c))],
                             1.0 / s_base_kw});
                    }
                    q_load_kw += reactive.reactive_kw(
                        case_data.buildings[static_cast<std::size_t>(i)].elec_demand_kw.at(sname)
                            [static_cast<std::size_t>(t)]);
                }
                cs.add_linear(std::move(p_link));
                cs.add_linear({bus_tag("link_q", bus.id, sname, t),
                               {{idx.q_inj[static_cast<std::size_t>(k)], 1.0}},
                               Sense::Equal,
                               -q_load_kw / s_base_kw});
            }
        }
    }

    return out;
}

OpfSolution extract_opf_solution(const des::DesModel& model, const OpfAttachment& attachment,
                                 std::span<const double> x, const des::CaseData& case_data) {
    const OpfIndex& idx = attachment.index;
    const auto& net = case_data.network;
    OpfSolution out;
    out.n_buses = idx.n_buses;
    out.n_seasons = idx.n_seasons;
    out.n_timepoints = idx.n_timepoints;
    out.n_branches = static_cast<int>(net.branches.size());
    for (const auto& bus : net.buses) out.bus_ids.push_back(bus.id);
    const int total = idx.n_buses * idx.n_seasons * idx.n_timepoints;
    out.v_pu.resize(static_cast<std::size_t>(total));
    out.theta_deg.resize(static_cast<std::size_t>(total));
    out.p_pu.resize(static_cast<std::size_t>(total));
    out.q_pu.resize(static_cast<std::size_t>(total));
    for (int k = 0; k < total; ++k) {
        out.v_pu[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(idx.v_mag[static_cast<std::size_t>(k)])];
        out.theta_deg[static_cast<std::size_t>(k)] =
            x[static_cast<std::size_t>(idx.theta[static_cast<std::size_t>(k)])] * 180.0 / std::numbers::pi;
        out.p_pu[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(idx.p_inj[static_cast<std::size_t>(k)])];
        out.q_pu[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(idx.q_inj[static_cast<std::size_t>(k)])];
    }

    const double i_base = net.bases.i_base_a();
    out.current_a.resize(static_cast<std::size_t>(out.n_branches * idx.n_seasons * idx.n_timepoints));
    for (int l = 0; l < out.n_branches; ++l) {
        const auto& branch = net.branches[static_cast<std::size_t>(l)];
        const int a = net.bus_index(branch.from);
        const int b = net.bus_index(branch.to);
        const double y_sq = attachment.limits[static_cast<std::size_t>(l)].admittance_sq;
        for (int s = 0; s < idx.n_seasons; ++s) {
            for (int t = 0; t < idx.n_timepoints; ++t) {
                const int ka = idx.bst(a, s, t);
                const int kb = idx.bst(b, s, t);
                const double current_pu = network::branch_current_pu(
                    x[static_cast<std::size_t>(idx.v_mag[static_cast<std::size_t>(ka)])],
                    x[static_cast<std::size_t>(idx.theta[static_cast<std::size_t>(ka)])],
                    x[static_cast<std::size_t>(idx.v_mag[static_cast<std::size_t>(kb)])],
                    x[static_cast<std::size_t>(idx.theta[static_cast<std::size_t>(kb)])], y_sq,
                    attachment.configuration);
                out.current_a[static_cast<std::size_t>(out.lst(l, s, t))] = current_pu * i_base;
            }
        }
    }
    (void)model;
    return out;
}

}  // namespace desopf::opf
