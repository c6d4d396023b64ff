// hamiltonian.cpp — Matrix-free total Hamiltonian

#include "surrogate/hamiltonian.hpp"

#include <cmath>
#include <sstream>

namespace surrogate {

namespace {

// Spin-1/2 operators in the (|0>, |1>) = (down, up) bit basis.
std::array<Eigen::Matrix2cd, 3> half_spin() {
    const cplx i{0.0, 1.0};
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 0.5,
          0.5, 0;
    sy << 0, 0.5 * i,
          -0.5 * i, 0;
    sz << -0.5, 0,
          0, 0.5;
    return {sx, sy, sz};
}

Eigen::Matrix3d dipole_tensor(const Eigen::Vector3d& n) {
    return Eigen::Matrix3d::Identity() - 3.0 * n * n.transpose();
}

template <typename A, typename B>
Eigen::MatrixXcd kron(const A& major, const B& minor) {
    Eigen::MatrixXcd out(major.rows() * minor.rows(), major.cols() * minor.cols());
    for (Index r = 0; r < major.rows(); ++r) {
        for (Index c = 0; c < major.cols(); ++c) {
            out.block(r * minor.rows(), c * minor.cols(), minor.rows(), minor.cols()) =
                major(r, c) * minor;
        }
    }
    return out;
}

} // namespace

DephasingCoupling make_dephasing(double c, double sigma_eps, const std::vector<double>& energies,
                                 double exponent_sign) {
    const int K = static_cast<int>(energies.size());
    if (K < 2) {
        throw Error(ErrorCode::invalid_coupling, "dephasing coupling needs at least two modes");
    }
    if (!(sigma_eps > 0.0)) {
        throw Error(ErrorCode::invalid_coupling, "inelastic bias must be positive");
    }
    DephasingCoupling out;
    out.c = c;
    out.sigma_eps = sigma_eps;
    out.exponent_sign = exponent_sign;
    out.c_jk = Eigen::MatrixXd::Zero(K, K);
    const double pref = c / (static_cast<double>(K) * (K - 1));
    for (int j = 0; j < K; ++j) {
        for (int k = 0; k < K; ++k) {
            if (j == k) continue;
            const double de = energies[j] - energies[k];
            out.c_jk(j, k) = pref * std::exp(exponent_sign * de * de / (2.0 * sigma_eps * sigma_eps));
        }
    }
    return out;
}

DipolarCoupling make_dipolar(const BathSpec& bath) { return {bath.couplings}; }

NvDipoleCoupling make_nv_dipole(const NVSpec& nv) {
    NvDipoleCoupling out;
    for (int k = 1; k <= nv.modes(); ++k) {
        out.gamma.push_back(nv.gamma_k(k));
        out.n.push_back(nv.unit_k(k));
    }
    return out;
}

NvReducedDipoleCoupling make_nv_reduced_dipole(const NVSpec& nv) {
    NvReducedDipoleCoupling out;
    for (int k = 1; k <= nv.modes(); ++k) {
        const double nz = nv.unit_k(k).z();
        out.coeff.push_back(nv.gamma_k(k) * (1.0 - 3.0 * nz * nz));
    }
    return out;
}

TotalHamiltonian::TotalHamiltonian(SystemModel system, BathModel bath, CouplingSpec coupling,
                                   std::string scenario)
    : system_(std::move(system)), bath_(std::move(bath)), coupling_(std::move(coupling)),
      scenario_(std::move(scenario)) {
    if (const auto* tls = std::get_if<TlsBath>(&bath_)) {
        modes_ = tls->spec.modes();
        bath_diagonal_ = configuration_energies(tls->spec);
    } else {
        const auto& nv = std::get<NvBath>(bath_).spec;
        modes_ = nv.modes();
        const auto s = half_spin();
        const Index nb = Index{1} << modes_;
        bath_diagonal_.assign(static_cast<std::size_t>(nb), 0.0);
        for (Index c = 0; c < nb; ++c) {
            double e = 0.0;
            for (int k = 1; k <= modes_; ++k) {
                e += nv.zeeman_bath() * (mode_excited(c, k) ? 0.5 : -0.5);
            }
            if (nv.reduced) {
                for (int j = 1; j <= modes_; ++j) {
                    for (int k = j + 1; k <= modes_; ++k) {
                        const double nz = nv.unit_jk(j, k).z();
                        const double zj = mode_excited(c, j) ? 0.5 : -0.5;
                        const double zk = mode_excited(c, k) ? 0.5 : -0.5;
                        e += nv.gamma_jk(j, k) * (1.0 - 3.0 * nz * nz) * zj * zk;
                    }
                }
            }
            bath_diagonal_[static_cast<std::size_t>(c)] = e;
        }
        if (!nv.reduced) {
            for (int j = 1; j <= modes_; ++j) {
                for (int k = j + 1; k <= modes_; ++k) {
                    const Eigen::Matrix3d t = dipole_tensor(nv.unit_jk(j, k));
                    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
                    for (int a = 0; a < 3; ++a) {
                        for (int b = 0; b < 3; ++b) {
                            // Local index bit_j + 2 bit_k: mode k is the major factor.
                            m += t(a, b) * kron(s[b], s[a]);
                        }
                    }
                    bath_pairs_.push_back({j, k, nv.gamma_jk(j, k) * m});
                }
            }
        }
    }

    if (!system_.is_grid()) system_matrix_ = system_hamiltonian_matrix(system_);

    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, DipolarCoupling>) {
                if (!system_.is_grid()) {
                    throw Error(ErrorCode::invalid_coupling, "dipolar coupling needs a grid system");
                }
                if (static_cast<int>(c.d.size()) != modes_) {
                    throw Error(ErrorCode::shape_mismatch, "coupling count differs from mode count");
                }
            } else if constexpr (std::is_same_v<T, DephasingCoupling>) {
                if (modes_ < 2) {
                    throw Error(ErrorCode::invalid_coupling, "dephasing coupling needs K >= 2");
                }
                if (c.c_jk.rows() != modes_) {
                    throw Error(ErrorCode::shape_mismatch, "c_jk size differs from mode count");
                }
            } else if constexpr (std::is_same_v<T, NvDipoleCoupling>) {
                if (system_.kind() != SystemKind::nv_full) {
                    throw Error(ErrorCode::invalid_coupling, "full NV coupling needs the spin-1 system");
                }
                if (static_cast<int>(c.gamma.size()) != modes_) {
                    throw Error(ErrorCode::shape_mismatch, "coupling count differs from mode count");
                }
                const auto big = spin_one_matrices();
                const auto small = half_spin();
                for (int k = 0; k < modes_; ++k) {
                    const Eigen::Matrix3d t = dipole_tensor(c.n[k]);
                    Eigen::Matrix<cplx, 6, 6> m = Eigen::Matrix<cplx, 6, 6>::Zero();
                    for (int a = 0; a < 3; ++a) {
                        for (int b = 0; b < 3; ++b) {
                            m += t(a, b) * kron(small[b], big[a]);
                        }
                    }
                    nv_coupling_blocks_.push_back(c.gamma[k] * m);
                }
            } else if constexpr (std::is_same_v<T, NvReducedDipoleCoupling>) {
                if (system_.kind() != SystemKind::nv_reduced) {
                    throw Error(ErrorCode::invalid_coupling,
                                "reduced NV coupling needs the pseudo-spin system");
                }
                if (static_cast<int>(c.coeff.size()) != modes_) {
                    throw Error(ErrorCode::shape_mismatch, "coupling count differs from mode count");
                }
                const Index nb = Index{1} << modes_;
                reduced_coupling_diagonal_.assign(static_cast<std::size_t>(nb), 0.0);
                for (Index s = 0; s < nb; ++s) {
                    double sum = 0.0;
                    for (int k = 1; k <= modes_; ++k) {
                        sum += c.coeff[k - 1] * (mode_excited(s, k) ? 0.5 : -0.5);
                    }
                    reduced_coupling_diagonal_[static_cast<std::size_t>(s)] = sum;
                }
            }
        },
        coupling_);
}

void TotalHamiltonian::check(const SpinorState& in) const {
    if (in.modes() != modes_ || in.n_sys() != n_sys()) {
        std::ostringstream os;
        os << "state (K=" << in.modes() << ", N=" << in.n_sys() << ") vs Hamiltonian (K=" << modes_
           << ", N=" << n_sys() << ")";
        throw Error(ErrorCode::shape_mismatch, os.str());
    }
}

void TotalHamiltonian::apply_bath(const SpinorState& in, SpinorState& out, cplx scale) const {
    auto src = in.matrix();
    auto dst = out.matrix();
    for (Index s = 0; s < in.n_bath(); ++s) {
        const double e = bath_diagonal_[static_cast<std::size_t>(s)];
        if (e != 0.0) dst.row(s) += (scale * e) * src.row(s);
    }
    for (const auto& pair : bath_pairs_) {
        const Index bj = Index{1} << (pair.j - 1);
        const Index bk = Index{1} << (pair.k - 1);
        const Eigen::Matrix4cd m = scale * pair.m;
        for (Index s = 0; s < in.n_bath(); ++s) {
            if (s & (bj | bk)) continue;
            const Index idx[4] = {s, s | bj, s | bk, s | bj | bk};
            for (int l = 0; l < 4; ++l) {
                for (int r = 0; r < 4; ++r) {
                    if (m(l, r) != 0.0) dst.row(idx[l]) += m(l, r) * src.row(idx[r]);
                }
            }
        }
    }
}

void TotalHamiltonian::apply_coupling(const SpinorState& in, SpinorState& out, cplx scale) const {
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NoCoupling>) {
                return;
            } else if constexpr (std::is_same_v<T, DipolarCoupling>) {
                const auto& q = system_.grid().grid->q();
                const Eigen::Map<const Eigen::RowVectorXd> qrow(q.data(), static_cast<Index>(q.size()));
                auto src = in.matrix();
                auto dst = out.matrix();
                for (int k = 1; k <= modes_; ++k) {
                    const double dk = c.d[k - 1];
                    if (dk == 0.0) continue;
                    const Index bit = Index{1} << (k - 1);
                    for (Index s = 0; s < in.n_bath(); ++s) {
                        dst.row(s ^ bit) += (scale * dk) * src.row(s).cwiseProduct(qrow.cast<cplx>());
                    }
                }
            } else if constexpr (std::is_same_v<T, DephasingCoupling>) {
                SpinorState hop(in.modes(), in.n_sys());
                for (int j = 1; j <= modes_; ++j) {
                    for (int k = j + 1; k <= modes_; ++k) {
                        const double cjk = c.c_jk(j - 1, k - 1);
                        if (cjk != 0.0) apply_pair_hop(in, j, k, hop, cjk, true);
                    }
                }
                apply_system_hamiltonian(hop, system_, out, scale, true);
            } else if constexpr (std::is_same_v<T, NvDipoleCoupling>) {
                auto src = in.matrix();
                auto dst = out.matrix();
                for (int k = 1; k <= modes_; ++k) {
                    const auto& m = nv_coupling_blocks_[static_cast<std::size_t>(k - 1)];
                    const Eigen::Matrix3cd m00 = scale * m.block<3, 3>(0, 0);
                    const Eigen::Matrix3cd m01 = scale * m.block<3, 3>(0, 3);
                    const Eigen::Matrix3cd m10 = scale * m.block<3, 3>(3, 0);
                    const Eigen::Matrix3cd m11 = scale * m.block<3, 3>(3, 3);
                    const Index bit = Index{1} << (k - 1);
                    for (Index s = 0; s < in.n_bath(); ++s) {
                        if (s & bit) continue;
                        const Index t = s | bit;
                        dst.row(s) += src.row(s) * m00.transpose() + src.row(t) * m01.transpose();
                        dst.row(t) += src.row(s) * m10.transpose() + src.row(t) * m11.transpose();
                    }
                }
            } else if constexpr (std::is_same_v<T, NvReducedDipoleCoupling>) {
                // (S0z - 1/2) = diag(0, -1) in the (m=0, m=-1) basis.
                for (Index s = 0; s < in.n_bath(); ++s) {
                    const double v = reduced_coupling_diagonal_[static_cast<std::size_t>(s)];
                    out(s, 1) += scale * (-v) * in(s, 1);
                }
            }
        },
        coupling_);
}

void TotalHamiltonian::apply(Term term, const SpinorState& in, SpinorState& out, cplx scale,
                             bool accumulate) const {
    check(in);
    if (&in == &out) {
        throw Error(ErrorCode::invalid_argument, "in-place Hamiltonian application");
    }
    if (!accumulate) {
        if (out.same_shape(in)) {
            out.set_zero();
        } else {
            out = SpinorState(in.modes(), in.n_sys());
        }
    } else if (!out.same_shape(in)) {
        throw Error(ErrorCode::shape_mismatch, "accumulation target shape");
    }
    const auto system_term = [&] {
        if (system_.is_grid()) {
            apply_system_hamiltonian(in, system_, out, scale, true);
        } else {
            apply_system_matrix(in, system_matrix_, out, scale, true);
        }
    };
    switch (term) {
    case Term::system: system_term(); break;
    case Term::bath: apply_bath(in, out, scale); break;
    case Term::coupling: apply_coupling(in, out, scale); break;
    case Term::total:
        system_term();
        apply_bath(in, out, scale);
        apply_coupling(in, out, scale);
        break;
    }
}

SpinorState TotalHamiltonian::apply(Term term, const SpinorState& in) const {
    SpinorState out;
    apply(term, in, out);
    return out;
}

LinearOperator TotalHamiltonian::op(Term term) const {
    return [this, term](const SpinorState& in, SpinorState& out) { apply(term, in, out); };
}

SpinorState apply_coupling(const SpinorState& state, const TotalHamiltonian& h) {
    return h.apply(Term::coupling, state);
}

SpinorState apply_total(const SpinorState& state, const TotalHamiltonian& h) {
    return h.apply(Term::total, state);
}

double commutator_residual(const LinearOperator& a, const LinearOperator& b,
                           std::span<const SpinorState> probes, double floor) {
    double worst = 0.0;
    SpinorState tmp, ab, ba;
    for (const auto& psi : probes) {
        b(psi, tmp);
        a(tmp, ab);
        a(psi, tmp);
        b(tmp, ba);
        const double num = (ab.data() - ba.data()).norm();
        const double den = ab.norm() + ba.norm() + floor;
        worst = std::max(worst, num / den);
    }
    return worst;
}

LinearOperator system_operator(const Eigen::MatrixXcd& op) {
    return [op](const SpinorState& in, SpinorState& out) { apply_system_matrix(in, op, out, 1.0, false); };
}

} // namespace surrogate
