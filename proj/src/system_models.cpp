// system_models.cpp — Oscillator and NV system Hamiltonians, state preparation

#include "surrogate/system_models.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace surrogate {

GridSystem GridSystem::make(double mass, double omega, Index n_points, double displacement) {
    if (!(mass > 0.0) || !(omega > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "oscillator mass and frequency must be positive");
    }
    const double half = 6.0 * std::sqrt(3.0 / (2.0 * mass * omega)) + std::abs(displacement);
    return make(mass, omega, n_points, -half, half);
}

GridSystem GridSystem::make(double mass, double omega, Index n_points, double q_min, double q_max) {
    if (!(mass > 0.0) || !(omega > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "oscillator mass and frequency must be positive");
    }
    GridSystem g;
    g.mass = mass;
    g.omega = omega;
    g.grid = std::make_shared<const SpectralGrid>(n_points, q_min, q_max);
    const auto& q = g.grid->q();
    const auto& p = g.grid->p();
    g.potential.resize(q.size());
    g.kinetic.resize(p.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        g.potential[i] = 0.5 * mass * omega * omega * q[i] * q[i];
        g.kinetic[i] = p[i] * p[i] / (2.0 * mass);
    }
    return g;
}

double GridSystem::ground_width() const { return std::sqrt(1.0 / (2.0 * mass * omega)); }

double NVSpec::gamma_k(int k) const {
    const double r = positions.at(static_cast<std::size_t>(k - 1)).norm();
    return dipolar_prefactor * g0 * g / (r * r * r);
}

double NVSpec::gamma_jk(int j, int k) const {
    const double r = (positions.at(static_cast<std::size_t>(j - 1)) -
                      positions.at(static_cast<std::size_t>(k - 1)))
                         .norm();
    return dipolar_prefactor * g * g / (r * r * r);
}

Eigen::Vector3d NVSpec::unit_k(int k) const {
    return positions.at(static_cast<std::size_t>(k - 1)).normalized();
}

Eigen::Vector3d NVSpec::unit_jk(int j, int k) const {
    return (positions.at(static_cast<std::size_t>(j - 1)) -
            positions.at(static_cast<std::size_t>(k - 1)))
        .normalized();
}

SystemKind SystemModel::kind() const {
    if (is_grid()) return SystemKind::grid;
    return std::get<NVSpec>(variant).reduced ? SystemKind::nv_reduced : SystemKind::nv_full;
}

Index SystemModel::n_sys() const {
    switch (kind()) {
    case SystemKind::grid: return grid().size();
    case SystemKind::nv_full: return 3;
    case SystemKind::nv_reduced: return 2;
    }
    return 0;
}

const GridSystem& SystemModel::grid() const {
    if (!is_grid()) throw Error(ErrorCode::unsupported_variant, "system is not a grid oscillator");
    return std::get<GridSystem>(variant);
}

const NVSpec& SystemModel::nv() const {
    if (is_grid()) throw Error(ErrorCode::unsupported_variant, "system is not an NV center");
    return std::get<NVSpec>(variant);
}

std::array<Eigen::Matrix3cd, 3> spin_one_matrices() {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx i{0.0, 1.0};
    Eigen::Matrix3cd sx, sy, sz;
    sx << 0, r, 0,
          r, 0, r,
          0, r, 0;
    sy << 0, -i * r, 0,
          i * r, 0, -i * r,
          0, i * r, 0;
    sz << 1, 0, 0,
          0, 0, 0,
          0, 0, -1;
    return {sx, sy, sz};
}

std::array<Eigen::Matrix2cd, 3> pseudo_spin_matrices() {
    const cplx i{0.0, 1.0};
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 0.5,
          0.5, 0;
    sy << 0, -0.5 * i,
          0.5 * i, 0;
    sz << 0.5, 0,
          0, -0.5;
    return {sx, sy, sz};
}

Index nv_index_minus_one(const SystemModel& model) {
    return model.kind() == SystemKind::nv_full ? 2 : 1;
}

Index nv_index_zero(const SystemModel& model) {
    return model.kind() == SystemKind::nv_full ? 1 : 0;
}

Eigen::MatrixXcd system_hamiltonian_matrix(const SystemModel& model) {
    switch (model.kind()) {
    case SystemKind::grid: {
        const Index n = model.n_sys();
        Eigen::MatrixXcd h(n, n);
        SpinorState unit(0, n), col(0, n);
        for (Index j = 0; j < n; ++j) {
            unit.set_zero();
            unit(0, j) = 1.0;
            apply_system_hamiltonian(unit, model, col, 1.0, false);
            h.col(j) = col.data();
        }
        return h;
    }
    case SystemKind::nv_full: {
        const auto& nv = model.nv();
        const auto s = spin_one_matrices();
        return nv.D * s[2] * s[2] + nv.zeeman_system() * s[2];
    }
    case SystemKind::nv_reduced: {
        const auto& nv = model.nv();
        const auto s = pseudo_spin_matrices();
        const Eigen::Matrix2cd shifted = s[2] - 0.5 * Eigen::Matrix2cd::Identity();
        return nv.D * shifted * shifted + nv.zeeman_system() * shifted;
    }
    }
    return {};
}

void apply_system_matrix(const SpinorState& in, const Eigen::MatrixXcd& op, SpinorState& out,
                         cplx scale, bool accumulate) {
    if (op.rows() != in.n_sys() || op.cols() != in.n_sys()) {
        throw Error(ErrorCode::shape_mismatch, "system operator does not match state");
    }
    if (!out.same_shape(in)) {
        if (accumulate) throw Error(ErrorCode::shape_mismatch, "accumulation target shape");
        out = SpinorState(in.modes(), in.n_sys());
    }
    if (accumulate) {
        out.matrix().noalias() += scale * (in.matrix() * op.transpose());
    } else {
        out.matrix().noalias() = scale * (in.matrix() * op.transpose());
    }
}

void apply_system_hamiltonian(const SpinorState& in, const SystemModel& model, SpinorState& out,
                              cplx scale, bool accumulate) {
    if (in.n_sys() != model.n_sys()) {
        throw Error(ErrorCode::shape_mismatch, "state system dimension does not match model");
    }
    if (!model.is_grid()) {
        apply_system_matrix(in, system_hamiltonian_matrix(model), out, scale, accumulate);
        return;
    }
    if (!out.same_shape(in)) {
        if (accumulate) throw Error(ErrorCode::shape_mismatch, "accumulation target shape");
        out = SpinorState(in.modes(), in.n_sys());
    }
    const auto& g = model.grid();
    const Index n = in.n_sys();
    for (Index s = 0; s < in.n_bath(); ++s) {
        const cplx* src = &in(s, 0);
        cplx* dst = &out(s, 0);
        g.grid->apply_momentum_diagonal(src, dst, g.kinetic, scale, accumulate);
        for (Index i = 0; i < n; ++i) {
            dst[i] += scale * g.potential[static_cast<std::size_t>(i)] * src[i];
        }
    }
}

SpinorState apply_system_hamiltonian(const SpinorState& state, const SystemModel& model) {
    SpinorState out;
    apply_system_hamiltonian(state, model, out, 1.0, false);
    return out;
}

double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<std::array<cplx, 2>> bath_mode_states(int modes, const BathInit& init) {
    std::vector<std::array<cplx, 2>> states(static_cast<std::size_t>(modes));
    if (init.kind == BathInitKind::vacuum) {
        for (auto& s : states) s = {cplx{1.0, 0.0}, cplx{0.0, 0.0}};
        return states;
    }
    if (!(init.p_exc >= 0.0 && init.p_exc <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "bath excitation probability outside [0, 1]");
    }
    std::mt19937_64 rng(init.seed);
    const double a0 = std::sqrt(1.0 - init.p_exc);
    const double a1 = std::sqrt(init.p_exc);
    for (auto& s : states) {
        const double phi = nv_constants::two_pi * unit_uniform(rng());
        s = {cplx{a0, 0.0}, std::polar(a1, phi)};
    }
    return states;
}

void apply_position(SpinorState& state, const GridSystem& grid) {
    const auto& q = grid.grid->q();
    for (Index s = 0; s < state.n_bath(); ++s) {
        for (Index i = 0; i < state.n_sys(); ++i) state(s, i) *= q[static_cast<std::size_t>(i)];
    }
}

void apply_translation(SpinorState& state, const GridSystem& grid, double d) {
    const auto& p = grid.grid->p();
    std::vector<cplx> phase(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) phase[i] = std::polar(1.0, -p[i] * d);
    for (Index s = 0; s < state.n_bath(); ++s) {
        grid.grid->apply_momentum_diagonal(&state(s, 0), &state(s, 0), phase, 1.0, false);
    }
}

SpinorState prepare_state(const SystemModel& model, const SpinorState& ground, int modes,
                          const StatePreparation& prep) {
    if (!model.is_grid()) {
        if (prep.excitation.kind != ExcitationKind::none) {
            throw Error(ErrorCode::unsupported_excitation,
                        "oscillator excitations do not apply to the NV center");
        }
        Eigen::VectorXcd sys = Eigen::VectorXcd::Zero(model.n_sys());
        if (prep.nv == NvInitial::minus_one) {
            sys[nv_index_minus_one(model)] = 1.0;
        } else {
            sys[nv_index_minus_one(model)] = 1.0 / std::sqrt(2.0);
            sys[nv_index_zero(model)] = 1.0 / std::sqrt(2.0);
        }
        return SpinorState::product(sys, bath_mode_states(modes, prep.bath));
    }
    if (ground.n_sys() != model.n_sys()) {
        throw Error(ErrorCode::shape_mismatch, "ground state does not match the system grid");
    }
    SpinorState state;
    if (ground.modes() == 0) {
        state = SpinorState::product(ground.data(), bath_mode_states(modes, prep.bath));
    } else {
        if (ground.modes() != modes) {
            throw Error(ErrorCode::shape_mismatch, "ground state mode count differs from request");
        }
        if (prep.bath.kind != BathInitKind::vacuum) {
            throw Error(ErrorCode::invalid_argument,
                        "a total-Hamiltonian ground state already fixes the bath state");
        }
        state = ground;
    }
    const auto& g = model.grid();
    switch (prep.excitation.kind) {
    case ExcitationKind::none: break;
    case ExcitationKind::infrared: apply_position(state, g); break;
    case ExcitationKind::displaced: apply_translation(state, g, prep.excitation.displacement); break;
    case ExcitationKind::displaced_infrared:
        apply_position(state, g);
        apply_translation(state, g, prep.excitation.displacement);
        break;
    }
    state.normalize();
    return state;
}

NVGeometry sample_nv_geometry(int modes, double r_min, double r_max, std::uint64_t seed,
                              const NVSpec& constants, double min_pair_distance) {
    if (!(r_min > 0.0) || !(r_max > r_min)) {
        throw Error(ErrorCode::invalid_argument, "NV shell needs 0 < r_min < r_max");
    }
    if (min_pair_distance < 0.0) min_pair_distance = r_min;
    std::mt19937_64 rng(seed);
    NVGeometry geo;
    const double lo = r_min * r_min * r_min;
    const double hi = r_max * r_max * r_max;
    int attempts = 0;
    while (static_cast<int>(geo.positions.size()) < modes) {
        if (++attempts > 100000) {
            throw Error(ErrorCode::invalid_argument, "could not place bath spins in the shell");
        }
        const double r = std::cbrt(lo + (hi - lo) * unit_uniform(rng()));
        const double cos_t = 2.0 * unit_uniform(rng()) - 1.0;
        const double phi = nv_constants::two_pi * unit_uniform(rng());
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        const Eigen::Vector3d pos(r * sin_t * std::cos(phi), r * sin_t * std::sin(phi), r * cos_t);
        bool ok = true;
        for (const auto& other : geo.positions) {
            if ((other - pos).norm() < min_pair_distance) {
                ok = false;
                break;
            }
        }
        if (ok) geo.positions.push_back(pos);
    }
    NVSpec spec = constants;
    spec.positions = geo.positions;
    geo.gamma_k.resize(static_cast<std::size_t>(modes));
    geo.gamma_jk = Eigen::MatrixXd::Zero(modes, modes);
    for (int k = 1; k <= modes; ++k) {
        geo.gamma_k[k - 1] = spec.gamma_k(k);
        for (int j = 1; j <= modes; ++j) {
            if (j != k) geo.gamma_jk(j - 1, k - 1) = spec.gamma_jk(j, k);
        }
    }
    return geo;
}

} // namespace surrogate
