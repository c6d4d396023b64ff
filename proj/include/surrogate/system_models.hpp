// system_models.hpp — Primary systems: grid harmonic oscillator and NV-center spin
//
// Units: hbar = 1. Oscillator scenarios use atomic units. NV scenarios use
// angular frequency in rad/us (energies quoted as 2*pi*MHz), lengths in nm and
// fields in Gauss.

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "surrogate/spectral_grid.hpp"
#include "surrogate/spin_bath.hpp"

namespace surrogate {

namespace nv_constants {
// Bohr magneton over h, MHz per Gauss (CODATA 2018).
inline constexpr double bohr_magneton_mhz_per_gauss = 1.39962449361;
// mu0 * muB^2 / (4 pi h), MHz nm^3 (CODATA 2018), without Lande factors.
inline constexpr double dipolar_mhz_nm3 = 12.980132;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double zero_field_splitting_mhz = 2870.0;
} // namespace nv_constants

struct GridSystem {
    double mass{1.0};
    double omega{1.0};
    std::shared_ptr<const SpectralGrid> grid;
    std::vector<double> potential;             // m w^2 q^2 / 2
    std::vector<std::complex<double>> kinetic; // p^2 / 2m

    // Default bounds +-(6 sqrt(3/(2 m w)) + |d|).
    static GridSystem make(double mass, double omega, Index n_points, double displacement = 0.0);
    static GridSystem make(double mass, double omega, Index n_points, double q_min, double q_max);

    double ground_width() const;
    Index size() const { return grid->size(); }
};

struct NVSpec {
    double D{nv_constants::two_pi * nv_constants::zero_field_splitting_mhz};
    double g0{2.0};
    double g{2.0};
    double B{59.0};
    double mu_b{nv_constants::two_pi * nv_constants::bohr_magneton_mhz_per_gauss};
    double dipolar_prefactor{nv_constants::two_pi * nv_constants::dipolar_mhz_nm3};
    std::vector<Eigen::Vector3d> positions;
    bool reduced{false};

    int modes() const { return static_cast<int>(positions.size()); }
    double zeeman_system() const { return g0 * mu_b * B; }
    double zeeman_bath() const { return g * mu_b * B; }
    double gamma_k(int k) const;        // 1-based, system-bath
    double gamma_jk(int j, int k) const; // 1-based, bath-bath
    Eigen::Vector3d unit_k(int k) const;
    Eigen::Vector3d unit_jk(int j, int k) const;
};

enum class SystemKind { grid, nv_full, nv_reduced };

struct SystemModel {
    std::variant<GridSystem, NVSpec> variant;

    SystemKind kind() const;
    Index n_sys() const;
    const GridSystem& grid() const;
    const NVSpec& nv() const;
    bool is_grid() const { return std::holds_alternative<GridSystem>(variant); }
};

// Spin-1 matrices in the (m=+1, m=0, m=-1) basis.
std::array<Eigen::Matrix3cd, 3> spin_one_matrices();
// Pseudo-spin-1/2 matrices in the (m=0, m=-1) basis; Sz = diag(1/2, -1/2).
std::array<Eigen::Matrix2cd, 3> pseudo_spin_matrices();
// System index of |m_S = -1> and |m_S = 0>.
Index nv_index_minus_one(const SystemModel& model);
Index nv_index_zero(const SystemModel& model);

// Dense system Hamiltonian (n_sys x n_sys).
Eigen::MatrixXcd system_hamiltonian_matrix(const SystemModel& model);

SpinorState apply_system_hamiltonian(const SpinorState& state, const SystemModel& model);
void apply_system_hamiltonian(const SpinorState& in, const SystemModel& model, SpinorState& out,
                              cplx scale, bool accumulate);

// Applies a system-only operator given by its dense matrix to every bath row.
void apply_system_matrix(const SpinorState& in, const Eigen::MatrixXcd& op, SpinorState& out,
                         cplx scale, bool accumulate);

enum class BathInitKind { vacuum, random_product };
struct BathInit {
    BathInitKind kind{BathInitKind::vacuum};
    double p_exc{0.5};
    std::uint64_t seed{0};
};

enum class ExcitationKind { none, infrared, displaced, displaced_infrared };
struct Excitation {
    ExcitationKind kind{ExcitationKind::none};
    double displacement{0.0};
};

enum class NvInitial { minus_one, superposition };

struct StatePreparation {
    BathInit bath;
    Excitation excitation;
    NvInitial nv{NvInitial::minus_one};
};

// Per-mode (amp0, amp1) pairs for the requested bath initialisation.
// random_product: sqrt(1-p)|0> + e^{i phi} sqrt(p)|1> with seeded phases.
std::vector<std::array<cplx, 2>> bath_mode_states(int modes, const BathInit& init);

// Grid: `ground` is either a system-only state (modes() == 0), which is combined
// with the bath initialisation, or a total-Hamiltonian ground state whose bath
// part is kept (bath init must then be vacuum). The excitation acts on the system.
// NV: `ground` is ignored apart from its shape; the system starts in |m_S=-1> or
// (|0> + |-1>)/sqrt2.
SpinorState prepare_state(const SystemModel& model, const SpinorState& ground, int modes,
                          const StatePreparation& prep);

// Operators used by state preparation, applied to every bath row.
void apply_position(SpinorState& state, const GridSystem& grid);
void apply_translation(SpinorState& state, const GridSystem& grid, double d);

struct NVGeometry {
    std::vector<Eigen::Vector3d> positions;
    std::vector<double> gamma_k;
    Eigen::MatrixXd gamma_jk;
};

// Uniform positions in the shell r_min <= |r| <= r_max, rejecting pairs closer
// than min_pair_distance (defaults to r_min).
NVGeometry sample_nv_geometry(int modes, double r_min, double r_max, std::uint64_t seed,
                              const NVSpec& constants = {}, double min_pair_distance = -1.0);

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
double unit_uniform(std::uint64_t bits);

} // namespace surrogate
