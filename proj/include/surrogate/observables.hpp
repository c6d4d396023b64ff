// observables.hpp — Reduced densities, coherence, energy channels, phase-space moments

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "surrogate/hamiltonian.hpp"

namespace surrogate {

struct ReducedDensity {
    Eigen::MatrixXcd rho;
    double trace{0.0};
};

// rho[i, j] = sum_s psi(s, i) psi*(s, j), normalized to unit trace.
ReducedDensity partial_trace_bath(const SpinorState& state);

double purity(const ReducedDensity& rho);

enum class CoherenceVariant { discrete, grid };
// discrete: sum_{i != j} |rho_ij|. grid: the same sum times dq, i.e. the double
// integral of |rho(q, q')| with uniform weights dq^2 on the kernel rho_ij / dq.
double coherence_l1(const ReducedDensity& rho, CoherenceVariant variant, double dq = 1.0);

struct EnergyChannels {
    double system{0.0};
    double bath{0.0};
    double coupling{0.0};
    double total() const { return system + bath + coupling; }
};
EnergyChannels energy_channels(const SpinorState& state, const TotalHamiltonian& h);

struct PhaseSpaceStats {
    double q_mean{0.0};
    double p_mean{0.0};
    double dq{0.0};
    double dp{0.0};
    double lagrangian{0.0}; // <p^2/2m - m w^2 q^2/2>
};
PhaseSpaceStats phase_space_stats(const SpinorState& state, const SystemModel& model);

// Standard deviations of S^x and S^z of the NV system spin from its reduced density.
std::array<double, 2> nv_spin_std(const ReducedDensity& rho, const SystemModel& model);

enum class LadderMeasure { modulus, real_part };

// <a> = sqrt(m w / 2) (<q> + i <p> / (m w))
cplx ladder_mean(double q_mean, double p_mean, double mass, double omega);

// R(t) = (|<a(0)>| / E_S(0)) (E_S(t) / |<a(t)>|); NaN where |<a(t)>| < gap_floor |<a(0)>|.
std::vector<double> ratio_R(const std::vector<double>& e_s, const std::vector<double>& q_mean,
                            const std::vector<double>& p_mean, double mass, double omega,
                            LadderMeasure measure = LadderMeasure::modulus, double gap_floor = 1e-8);

struct ObservableRecord {
    double t{0.0};
    std::optional<double> E_S, E_B, E_SB;
    std::optional<double> q_mean, p_mean, dq, dp, lagrangian;
    std::optional<double> coherence, purity, ratio_R, survival;
    std::optional<double> nv_sx_std, nv_sz_std;

    // Values in column order (t first); NaN for missing entries.
    std::vector<double> to_row(bool nv_columns) const;
    static ObservableRecord from_row(const std::vector<double>& row, bool nv_columns);
};

const std::vector<std::string>& observable_columns(bool nv_columns);

// Everything measurable on one frame. `reference` (optional) yields the survival probability.
ObservableRecord measure(double t, const SpinorState& state, const TotalHamiltonian& h,
                         const SpinorState* reference = nullptr);

} // namespace surrogate
