// swap.hpp — Branching-phase spin swap and seeded swap ensembles

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "surrogate/propagator.hpp"

namespace surrogate {

struct BranchingPhases {
    Eigen::VectorXcd a; // a_s = c + log|l_s| + i arg l_s, summing to zero
    cplx c_shift{0.0};
};

inline constexpr double kAmplitudeClamp = 1e-30;

BranchingPhases phases_from_amplitudes(const Eigen::VectorXcd& lambda, double clamp = kAmplitudeClamp);
// l_s = exp(a_s - c)
Eigen::VectorXcd reconstruct(const BranchingPhases& phases);

using FreshSpin = std::array<cplx, 2>; // amplitudes of |0>, |1>

// (e^b, e^-b) / Z
FreshSpin fresh_spin_from_b(cplx b);

enum class TargetRule { uniform_random, round_robin };
enum class SwapMode { full, phase_only };

struct SwapPolicy {
    double interval{1.0};
    TargetRule target_rule{TargetRule::uniform_random};
    FreshSpin fresh_spin{cplx{1.0}, cplx{0.0}};
    int n_r{1};
    std::uint64_t seed{0};
    SwapMode mode{SwapMode::full};

    void validate() const;
};

// Basis in which swaps act blockwise: eigenvectors of the bare system Hamiltonian
// (columns). Blocks of fixed system energy level keep their norm, so swaps never
// move population between system levels.
Eigen::MatrixXcd swap_basis(const SystemModel& model);

// Replaces mode k (1-based) by `fresh`. `basis` empty means the identity.
void swap_spin(SpinorState& state, int k, const FreshSpin& fresh, SwapMode mode,
               const Eigen::MatrixXcd& basis = {});
SpinorState swap_spin(const SpinorState& state, int k, const FreshSpin& fresh, SwapMode mode,
                      const Eigen::MatrixXcd& basis = {});

// Per-realization engine seeded from (seed, realization).
std::mt19937_64 realization_rng(std::uint64_t seed, std::uint64_t realization);

// Frame of raw observables; NaN marks a missing value.
using FrameFunction = std::function<std::vector<double>(double, const SpinorState&)>;
using InitialFactory = std::function<SpinorState(int realization)>;

struct EnsembleOptions {
    double t_final{1.0};
    double stride{0.1};
    int threads{1};
    bool swaps_enabled{true};
    bool keep_realizations{false};
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<std::vector<double>> mean;                         // [frame][column]
    std::vector<std::vector<std::vector<double>>> realizations;    // optional per-realization frames
    std::vector<int> swap_counts;
    std::vector<std::string> failures;                             // "" for successful realizations
    int succeeded{0};
};

EnsembleResult ensemble_run(const InitialFactory& initial, const TotalHamiltonian& h, const SwapPolicy& policy,
                            const PropagatorConfig& cfg, const EnsembleOptions& options,
                            const FrameFunction& frame);
EnsembleResult ensemble_run(const SpinorState& initial, const TotalHamiltonian& h, const SwapPolicy& policy,
                            const PropagatorConfig& cfg, const EnsembleOptions& options,
                            const FrameFunction& frame);

} // namespace surrogate
