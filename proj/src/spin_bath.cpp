// spin_bath.cpp — Matrix-free bath operators on the bit-ordered spinor

#include "surrogate/spin_bath.hpp"

#include <cmath>
#include <sstream>

namespace surrogate {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_spectrum: return "invalid-spectrum";
    case ErrorCode::invalid_mode: return "invalid-mode";
    case ErrorCode::invalid_pair: return "invalid-pair";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::unsupported_excitation: return "unsupported-excitation";
    case ErrorCode::unsupported_variant: return "unsupported-variant";
    case ErrorCode::invalid_coupling: return "invalid-coupling";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::step_failure: return "step-failure";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::config_error: return "config-error";
    }
    return "unknown";
}

SpinorState::SpinorState(int modes, Index n_sys) : modes_(modes), n_sys_(n_sys) {
    if (modes < 0 || modes > 30) {
        throw Error(ErrorCode::invalid_argument, "bath mode count out of range");
    }
    if (n_sys < 1) {
        throw Error(ErrorCode::invalid_argument, "system dimension must be positive");
    }
    amp_ = Eigen::VectorXcd::Zero(n_bath() * n_sys);
}

void SpinorState::normalize() {
    const double n = norm();
    if (n == 0.0) {
        throw Error(ErrorCode::invalid_argument, "cannot normalize the zero state");
    }
    amp_ /= n;
}

SpinorState SpinorState::product(const Eigen::VectorXcd& system,
                                 const std::vector<std::array<cplx, 2>>& mode_states) {
    SpinorState out(static_cast<int>(mode_states.size()), system.size());
    for (Index s = 0; s < out.n_bath(); ++s) {
        cplx w{1.0, 0.0};
        for (int k = 1; k <= out.modes(); ++k) {
            w *= mode_states[k - 1][mode_excited(s, k) ? 1 : 0];
        }
        out.matrix().row(s) = w * system.transpose();
    }
    return out;
}

cplx inner(const SpinorState& a, const SpinorState& b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::shape_mismatch, "inner product of differently shaped states");
    }
    return a.data().dot(b.data());
}

std::vector<double> sample_spectrum(double eps0, double eps_c, int modes, SpectrumScheme scheme) {
    if (modes < 1) {
        throw Error(ErrorCode::invalid_spectrum, "at least one bath mode is required");
    }
    if (!(eps_c > eps0)) {
        std::ostringstream os;
        os << "cutoff " << eps_c << " must exceed lower edge " << eps0;
        throw Error(ErrorCode::invalid_spectrum, os.str());
    }
    std::vector<double> e(static_cast<std::size_t>(modes));
    switch (scheme) {
    case SpectrumScheme::uniform:
        if (modes == 1) {
            e[0] = eps0;
            break;
        }
        for (int k = 0; k < modes; ++k) {
            e[k] = eps0 + (eps_c - eps0) * static_cast<double>(k) / (modes - 1);
        }
        e.back() = eps_c;
        break;
    }
    return e;
}

std::vector<double> coupling_constants(BathSpec& spec) {
    const auto& e = spec.energies;
    const std::size_t n = e.size();
    if (spec.eta < 0.0) {
        throw Error(ErrorCode::invalid_spectrum, "spectral-density slope must be nonnegative");
    }
    spec.dos.assign(n, 1.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double gap = e[k + 1] - e[k];
        if (!(gap > 0.0)) {
            throw Error(ErrorCode::invalid_spectrum, "bath energies must be strictly ascending");
        }
        spec.dos[k] = 1.0 / gap;
    }
    if (n >= 2) {
        spec.dos[n - 1] = spec.dos[n - 2];
    }
    spec.couplings.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double j = spec.eta * e[k];
        spec.couplings[k] = j > 0.0 ? std::sqrt(j / spec.dos[k]) : 0.0;
    }
    return spec.couplings;
}

BathSpec make_bath(double eps0, double eps_c, int modes, double eta) {
    BathSpec spec;
    spec.energies = sample_spectrum(eps0, eps_c, modes);
    spec.eta = eta;
    coupling_constants(spec);
    return spec;
}

namespace {

void check_mode(const SpinorState& s, int k) {
    if (k < 1 || k > s.modes()) {
        std::ostringstream os;
        os << "mode " << k << " outside [1, " << s.modes() << "]";
        throw Error(ErrorCode::invalid_mode, os.str());
    }
}

void prepare_out(const SpinorState& in, SpinorState& out, bool accumulate) {
    if (accumulate) {
        if (!out.same_shape(in)) {
            throw Error(ErrorCode::shape_mismatch, "accumulation target has a different shape");
        }
    } else if (out.same_shape(in)) {
        out.set_zero();
    } else {
        out = SpinorState(in.modes(), in.n_sys());
    }
}

} // namespace

void apply_mode_op(const SpinorState& in, int k, ModeOp which, SpinorState& out, cplx scale,
                   bool accumulate) {
    check_mode(in, k);
    prepare_out(in, out, accumulate);
    const Index bit = Index{1} << (k - 1);
    auto src = in.matrix();
    auto dst = out.matrix();
    // Coefficients of the 2x2 block [[m00, m01], [m10, m11]] in the (|0>, |1>) basis.
    cplx m00{}, m01{}, m10{}, m11{};
    switch (which) {
    case ModeOp::create: m10 = 1.0; break;
    case ModeOp::annihilate: m01 = 1.0; break;
    case ModeOp::sx: m01 = m10 = 0.5; break;
    case ModeOp::sy: m10 = cplx(0.0, -0.5); m01 = cplx(0.0, 0.5); break;
    case ModeOp::sz: m00 = -0.5; m11 = 0.5; break;
    }
    m00 *= scale; m01 *= scale; m10 *= scale; m11 *= scale;
    for (Index s = 0; s < in.n_bath(); ++s) {
        if (s & bit) continue;
        const Index t = s | bit;
        if (m00 != 0.0) dst.row(s) += m00 * src.row(s);
        if (m01 != 0.0) dst.row(s) += m01 * src.row(t);
        if (m10 != 0.0) dst.row(t) += m10 * src.row(s);
        if (m11 != 0.0) dst.row(t) += m11 * src.row(t);
    }
}

SpinorState apply_mode_op(const SpinorState& state, int k, ModeOp which) {
    SpinorState out;
    apply_mode_op(state, k, which, out, 1.0, false);
    return out;
}

void apply_pair_hop(const SpinorState& in, int j, int k, SpinorState& out, cplx scale,
                    bool accumulate) {
    check_mode(in, j);
    check_mode(in, k);
    if (j == k) {
        throw Error(ErrorCode::invalid_pair, "pair hop needs two distinct modes");
    }
    prepare_out(in, out, accumulate);
    const Index bj = Index{1} << (j - 1);
    const Index bk = Index{1} << (k - 1);
    const Index both = bj | bk;
    auto src = in.matrix();
    auto dst = out.matrix();
    for (Index s = 0; s < in.n_bath(); ++s) {
        const Index bits = s & both;
        if (bits == 0 || bits == both) continue;
        dst.row(s ^ both) += scale * src.row(s);
    }
}

SpinorState apply_pair_hop(const SpinorState& state, int j, int k) {
    SpinorState out;
    apply_pair_hop(state, j, k, out, 1.0, false);
    return out;
}

std::vector<double> configuration_energies(const BathSpec& spec) {
    const int K = spec.modes();
    std::vector<double> e(std::size_t{1} << K, 0.0);
    for (std::size_t s = 0; s < e.size(); ++s) {
        double sum = 0.0;
        for (int k = 1; k <= K; ++k) {
            if (mode_excited(s, k)) sum += spec.energies[k - 1];
        }
        e[s] = sum;
    }
    return e;
}

SpinorState apply_bath_hamiltonian(const SpinorState& state, const BathSpec& spec) {
    if (spec.modes() != state.modes()) {
        throw Error(ErrorCode::shape_mismatch, "bath spec and state disagree on mode count");
    }
    const auto e = configuration_energies(spec);
    SpinorState out = state;
    auto m = out.matrix();
    for (Index s = 0; s < out.n_bath(); ++s) {
        m.row(s) *= e[static_cast<std::size_t>(s)];
    }
    return out;
}

} // namespace surrogate
