// propagator.hpp — Short-iterative Lanczos propagation in real and imaginary time

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "surrogate/hamiltonian.hpp"

namespace surrogate {

struct PropagatorConfig {
    double dt{0.05};          // largest internal step
    double tol{1e-10};        // per-step Lanczos error bound (state-norm units)
    int krylov_dim_max{40};
    std::optional<std::pair<double, double>> spectral_bounds; // informational only
    int max_bisections{30};

    void validate() const;
};

struct ImaginaryTimeConfig {
    double dt{1.0};            // imaginary-time step
    double tol{1e-12};
    int krylov_dim_max{40};
    double energy_tol{1e-8};   // relative change between iterations
    double energy_floor{1e-14}; // absolute scale used when |E| is tiny
    int max_iterations{20000};
    int min_iterations{3};
};

struct PropagationStats {
    long steps{0};
    long operator_applications{0};
    double max_error{0.0};
    double min_step{std::numeric_limits<double>::infinity()};
};

// Advances `state` by exp(-i H tau); tau may be negative. Internal steps never exceed cfg.dt.
PropagationStats propagate(SpinorState& state, const LinearOperator& h, double tau,
                           const PropagatorConfig& cfg);
PropagationStats propagate(SpinorState& state, const TotalHamiltonian& h, double tau,
                           const PropagatorConfig& cfg);

// Observer sees (t, state) at t = 0, stride, 2 stride, ... up to t_final (inclusive).
using Observer = std::function<void(double, const SpinorState&)>;

PropagationStats evolve_real(SpinorState& state, const TotalHamiltonian& h, double t_final,
                             const PropagatorConfig& cfg, double stride, const Observer& observer);
PropagationStats evolve_real(SpinorState& state, const LinearOperator& h, double t_final,
                             const PropagatorConfig& cfg, double stride, const Observer& observer);

struct GroundState {
    SpinorState state;
    double energy{0.0};
    int iterations{0};
    std::vector<double> energy_history;
};

// Imaginary-time relaxation from `seed`, renormalizing after every step.
GroundState ground_state_imaginary_time(const LinearOperator& h, SpinorState seed,
                                        const ImaginaryTimeConfig& cfg);
GroundState ground_state_imaginary_time(const TotalHamiltonian& h, SpinorState seed,
                                        const ImaginaryTimeConfig& cfg);

double expectation(const LinearOperator& h, const SpinorState& state);

struct ZenoReport {
    double t_Z{std::numeric_limits<double>::infinity()};
    double delta_H{0.0};
    double mean_H{0.0};
    std::vector<std::pair<double, double>> survival_samples; // (t, P(t))
    // |a t_Z^2 - 1| for the least-squares fit P = 1 - a t^2 on t <= 0.1 t_Z.
    double quadratic_fit_residual{0.0};
};

ZenoReport zeno_time(const SpinorState& state, const LinearOperator& h,
                     const PropagatorConfig& cfg = {}, int samples = 10,
                     double variance_floor = 1e-12);
ZenoReport zeno_time(const SpinorState& state, const TotalHamiltonian& h,
                     const PropagatorConfig& cfg = {}, int samples = 10,
                     double variance_floor = 1e-12);

} // namespace surrogate
