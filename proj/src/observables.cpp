// observables.cpp — Frame measurements

#include "surrogate/observables.hpp"

#include <cmath>
#include <limits>

namespace surrogate {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

ReducedDensity partial_trace_bath(const SpinorState& state) {
    const auto m = state.matrix();
    ReducedDensity out;
    out.rho = m.transpose() * m.conjugate();
    out.trace = out.rho.trace().real();
    if (out.trace > 0.0) out.rho /= out.trace;
    return out;
}

double purity(const ReducedDensity& rho) { return rho.rho.squaredNorm(); }

double coherence_l1(const ReducedDensity& rho, CoherenceVariant variant, double dq) {
    double sum = 0.0;
    const Index n = rho.rho.rows();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (i != j) sum += std::abs(rho.rho(i, j));
        }
    }
    return variant == CoherenceVariant::grid ? sum * dq : sum;
}

EnergyChannels energy_channels(const SpinorState& state, const TotalHamiltonian& h) {
    const double n2 = inner(state, state).real();
    SpinorState tmp;
    EnergyChannels e;
    h.apply(Term::system, state, tmp);
    e.system = inner(state, tmp).real() / n2;
    h.apply(Term::bath, state, tmp);
    e.bath = inner(state, tmp).real() / n2;
    h.apply(Term::coupling, state, tmp);
    e.coupling = inner(state, tmp).real() / n2;
    return e;
}

PhaseSpaceStats phase_space_stats(const SpinorState& state, const SystemModel& model) {
    if (!model.is_grid()) {
        throw Error(ErrorCode::unsupported_variant, "phase-space statistics need a grid system");
    }
    const auto& g = model.grid();
    const auto& q = g.grid->q();
    const auto& p = g.grid->p();
    const Index n = state.n_sys();
    double n2 = 0.0, q1 = 0.0, q2 = 0.0, p1 = 0.0, p2 = 0.0;
    std::vector<cplx> phi(static_cast<std::size_t>(n));
    for (Index s = 0; s < state.n_bath(); ++s) {
        const cplx* row = &state(s, 0);
        double row_norm = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double w = std::norm(row[i]);
            row_norm += w;
            q1 += w * q[static_cast<std::size_t>(i)];
            q2 += w * q[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i)];
        }
        n2 += row_norm;
        if (row_norm == 0.0) continue;
        g.grid->to_momentum(row, phi.data());
        for (Index k = 0; k < n; ++k) {
            const double w = std::norm(phi[static_cast<std::size_t>(k)]);
            p1 += w * p[static_cast<std::size_t>(k)];
            p2 += w * p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
        }
    }
    PhaseSpaceStats st;
    st.q_mean = q1 / n2;
    st.p_mean = p1 / n2;
    const double q2m = q2 / n2, p2m = p2 / n2;
    st.dq = std::sqrt(std::max(0.0, q2m - st.q_mean * st.q_mean));
    st.dp = std::sqrt(std::max(0.0, p2m - st.p_mean * st.p_mean));
    st.lagrangian = p2m / (2.0 * g.mass) - 0.5 * g.mass * g.omega * g.omega * q2m;
    return st;
}

std::array<double, 2> nv_spin_std(const ReducedDensity& rho, const SystemModel& model) {
    if (model.is_grid()) throw Error(ErrorCode::unsupported_variant, "NV spin moments need an NV system");
    Eigen::MatrixXcd sx, sz;
    if (model.kind() == SystemKind::nv_full) {
        const auto s = spin_one_matrices();
        sx = s[0];
        sz = s[2];
    } else {
        const auto s = pseudo_spin_matrices();
        sx = s[0];
        sz = s[2];
    }
    const auto std_of = [&](const Eigen::MatrixXcd& op) {
        const double m1 = (rho.rho * op).trace().real();
        const double m2 = (rho.rho * op * op).trace().real();
        return std::sqrt(std::max(0.0, m2 - m1 * m1));
    };
    return {std_of(sx), std_of(sz)};
}

cplx ladder_mean(double q_mean, double p_mean, double mass, double omega) {
    return std::sqrt(mass * omega / 2.0) * cplx(q_mean, p_mean / (mass * omega));
}

std::vector<double> ratio_R(const std::vector<double>& e_s, const std::vector<double>& q_mean,
                            const std::vector<double>& p_mean, double mass, double omega, LadderMeasure measure,
                            double gap_floor) {
    if (e_s.empty() || e_s.size() != q_mean.size() || e_s.size() != p_mean.size()) {
        throw Error(ErrorCode::shape_mismatch, "ratio series lengths differ");
    }
    const auto size_of = [&](std::size_t i) {
        const cplx a = ladder_mean(q_mean[i], p_mean[i], mass, omega);
        return measure == LadderMeasure::modulus ? std::abs(a) : std::abs(a.real());
    };
    const double a0 = size_of(0);
    if (!(a0 > 1e-12) || !(e_s[0] > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "ratio undefined: initial <a> vanishes or E_S(0) <= 0");
    }
    std::vector<double> r(e_s.size());
    for (std::size_t i = 0; i < e_s.size(); ++i) {
        const double a = size_of(i);
        r[i] = a < gap_floor * a0 ? kNaN : (a0 / e_s[0]) * (e_s[i] / a);
    }
    return r;
}

const std::vector<std::string>& observable_columns(bool nv_columns) {
    static const std::vector<std::string> base{"t",      "E_S",       "E_B",       "E_SB",  "q_mean",
                                               "p_mean", "dq",        "dp",        "lagrangian",
                                               "coherence", "purity", "ratio_R",   "survival"};
    static const std::vector<std::string> nv = [] {
        auto v = base;
        v.push_back("nv_sx_std");
        v.push_back("nv_sz_std");
        return v;
    }();
    return nv_columns ? nv : base;
}

std::vector<double> ObservableRecord::to_row(bool nv_columns) const {
    const auto v = [](const std::optional<double>& x) { return x ? *x : kNaN; };
    std::vector<double> row{t,        v(E_S),        v(E_B),     v(E_SB),   v(q_mean), v(p_mean), v(dq),
                            v(dp),    v(lagrangian), v(coherence), v(purity), v(ratio_R), v(survival)};
    if (nv_columns) {
        row.push_back(v(nv_sx_std));
        row.push_back(v(nv_sz_std));
    }
    return row;
}

ObservableRecord ObservableRecord::from_row(const std::vector<double>& row, bool nv_columns) {
    if (row.size() != observable_columns(nv_columns).size()) {
        throw Error(ErrorCode::shape_mismatch, "observable row has the wrong column count");
    }
    const auto o = [&](std::size_t i) -> std::optional<double> {
        return std::isnan(row[i]) ? std::nullopt : std::optional<double>(row[i]);
    };
    ObservableRecord r;
    r.t = row[0];
    r.E_S = o(1);
    r.E_B = o(2);
    r.E_SB = o(3);
    r.q_mean = o(4);
    r.p_mean = o(5);
    r.dq = o(6);
    r.dp = o(7);
    r.lagrangian = o(8);
    r.coherence = o(9);
    r.purity = o(10);
    r.ratio_R = o(11);
    r.survival = o(12);
    if (nv_columns) {
        r.nv_sx_std = o(13);
        r.nv_sz_std = o(14);
    }
    return r;
}

ObservableRecord measure(double t, const SpinorState& state, const TotalHamiltonian& h,
                         const SpinorState* reference) {
    ObservableRecord r;
    r.t = t;
    const auto e = energy_channels(state, h);
    r.E_S = e.system;
    r.E_B = e.bath;
    r.E_SB = e.coupling;
    const auto rho = partial_trace_bath(state);
    r.purity = purity(rho);
    const auto& sys = h.system();
    if (sys.is_grid()) {
        const auto ps = phase_space_stats(state, sys);
        r.q_mean = ps.q_mean;
        r.p_mean = ps.p_mean;
        r.dq = ps.dq;
        r.dp = ps.dp;
        r.lagrangian = ps.lagrangian;
        r.coherence = coherence_l1(rho, CoherenceVariant::grid, sys.grid().grid->dq());
    } else {
        r.coherence = coherence_l1(rho, CoherenceVariant::discrete);
        const auto sd = nv_spin_std(rho, sys);
        r.nv_sx_std = sd[0];
        r.nv_sz_std = sd[1];
    }
    if (reference) {
        r.survival = std::norm(inner(*reference, state)) / (inner(*reference, *reference).real() *
                                                           inner(state, state).real());
    }
    return r;
}

} // namespace surrogate
