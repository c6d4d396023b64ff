// swap.cpp — Spin swap via branch-averaged conditional phases; ensemble driver

#include "surrogate/swap.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

namespace surrogate {

BranchingPhases phases_from_amplitudes(const Eigen::VectorXcd& lambda, double clamp) {
    if (lambda.size() == 0 || lambda.cwiseAbs().maxCoeff() == 0.0) {
        throw Error(ErrorCode::invalid_argument, "branching phases of an all-zero amplitude vector");
    }
    BranchingPhases out;
    out.a.resize(lambda.size());
    cplx sum = 0.0;
    for (Index s = 0; s < lambda.size(); ++s) {
        const double mag = std::max(std::abs(lambda[s]), clamp);
        out.a[s] = cplx(std::log(mag), std::arg(lambda[s]));
        sum += out.a[s];
    }
    out.c_shift = -sum / static_cast<double>(lambda.size());
    out.a.array() += out.c_shift;
    return out;
}

Eigen::VectorXcd reconstruct(const BranchingPhases& phases) {
    return (phases.a.array() - phases.c_shift).exp().matrix();
}

FreshSpin fresh_spin_from_b(cplx b) {
    const cplx u = std::exp(b), d = std::exp(-b);
    const double z = std::sqrt(std::norm(u) + std::norm(d));
    return {u / z, d / z};
}

void SwapPolicy::validate() const {
    if (!(interval > 0.0)) throw Error(ErrorCode::invalid_argument, "swap interval must be positive");
    if (n_r < 1) throw Error(ErrorCode::invalid_argument, "ensemble size must be at least 1");
    const double n = std::sqrt(std::norm(fresh_spin[0]) + std::norm(fresh_spin[1]));
    if (std::abs(n - 1.0) > 1e-12) throw Error(ErrorCode::invalid_argument, "fresh spin must be normalized");
}

Eigen::MatrixXcd swap_basis(const SystemModel& model) {
    if (!model.is_grid()) return Eigen::MatrixXcd::Identity(model.n_sys(), model.n_sys());
    const Eigen::MatrixXcd h = system_hamiltonian_matrix(model);
    const Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    return es.eigenvectors();
}

namespace {

// Complex logarithms are defined modulo 2 pi i; the partner's branch is taken within
// pi of `a` so that the branch average is the short-arc geometric mean.
cplx partner_phase(cplx a, cplx b) {
    const double d = std::remainder(b.imag() - a.imag(), 2.0 * std::numbers::pi);
    return {b.real(), a.imag() + d};
}

void swap_block(Eigen::Ref<Eigen::VectorXcd> lambda, int k, const FreshSpin& fresh, SwapMode mode) {
    const double block_norm = lambda.norm();
    if (block_norm == 0.0) return;
    const BranchingPhases ph = phases_from_amplitudes(lambda);
    const Index nb = lambda.size();
    const Index bit = Index{1} << (k - 1);

    if (mode == SwapMode::full) {
        double shift = -std::numeric_limits<double>::infinity();
        for (Index s = 0; s < nb; ++s) {
            if (s & bit) continue;
            shift = std::max(shift, 0.5 * (ph.a[s] + ph.a[s | bit]).real());
        }
        Eigen::VectorXcd w(nb);
        for (Index s = 0; s < nb; ++s) {
            if (s & bit) continue;
            const cplx rest = std::exp(0.5 * (ph.a[s] + partner_phase(ph.a[s], ph.a[s | bit])) - shift);
            w[s] = rest * fresh[0];
            w[s | bit] = rest * fresh[1];
        }
        const double wn = w.norm();
        if (wn == 0.0) return;
        const cplx ov = w.dot(lambda);
        const cplx phase = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx(1.0);
        lambda = (block_norm * phase / wn) * w;
    } else {
        const double b_im = 0.5 * (std::arg(fresh[0]) - std::arg(fresh[1]));
        Eigen::VectorXcd a = ph.a;
        for (Index s = 0; s < nb; ++s) {
            if (s & bit) continue;
            const cplx partner = partner_phase(ph.a[s], ph.a[s | bit]);
            const cplx mean = 0.5 * (ph.a[s] + partner);
            const cplx delta = 0.5 * (ph.a[s] - partner);
            const cplx delta_new(delta.real(), b_im);
            a[s] = mean + delta_new;
            a[s | bit] = mean - delta_new;
        }
        lambda = (a.array() - ph.c_shift).exp().matrix();
    }
}

} // namespace

void swap_spin(SpinorState& state, int k, const FreshSpin& fresh, SwapMode mode, const Eigen::MatrixXcd& basis) {
    if (k < 1 || k > state.modes()) {
        std::ostringstream os;
        os << "swap target mode " << k << " outside 1.." << state.modes();
        throw Error(ErrorCode::invalid_mode, os.str());
    }
    const double fn = std::sqrt(std::norm(fresh[0]) + std::norm(fresh[1]));
    if (std::abs(fn - 1.0) > 1e-12) throw Error(ErrorCode::invalid_argument, "fresh spin must be normalized");
    const bool rotate = basis.size() != 0;
    if (rotate && (basis.rows() != state.n_sys() || basis.cols() != state.n_sys())) {
        throw Error(ErrorCode::shape_mismatch, "swap basis does not match the system dimension");
    }
    auto m = state.matrix();
    Eigen::MatrixXcd c = rotate ? Eigen::MatrixXcd(m * basis.conjugate()) : Eigen::MatrixXcd(m);
    for (Index i = 0; i < c.cols(); ++i) swap_block(c.col(i), k, fresh, mode);
    if (rotate) {
        m = c * basis.transpose();
    } else {
        m = c;
    }
    state.normalize();
}

SpinorState swap_spin(const SpinorState& state, int k, const FreshSpin& fresh, SwapMode mode,
                      const Eigen::MatrixXcd& basis) {
    SpinorState out = state;
    swap_spin(out, k, fresh, mode, basis);
    return out;
}

std::mt19937_64 realization_rng(std::uint64_t seed, std::uint64_t realization) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(realization), static_cast<std::uint32_t>(realization >> 32)};
    return std::mt19937_64(seq);
}

namespace {

struct RealizationOutput {
    std::vector<std::vector<double>> frames;
    int swaps{0};
    std::string failure;
};

RealizationOutput run_realization(int r, const InitialFactory& initial, const TotalHamiltonian& h,
                                  const SwapPolicy& policy, const PropagatorConfig& cfg,
                                  const EnsembleOptions& opt, const FrameFunction& frame,
                                  const Eigen::MatrixXcd& basis, const std::vector<double>& out_times) {
    RealizationOutput out;
    try {
        SpinorState psi = initial(r);
        auto rng = realization_rng(policy.seed, static_cast<std::uint64_t>(r));
        const auto op = h.op(Term::total);
        const int modes = h.modes();
        int next_target = 0;
        double t = 0.0;
        long j = 1; // next swap index
        const double eps = 1e-12 * std::max(1.0, opt.t_final);
        const auto do_swap = [&] {
            int k;
            if (policy.target_rule == TargetRule::uniform_random) {
                k = std::min(modes, 1 + static_cast<int>(unit_uniform(rng()) * modes));
            } else {
                k = 1 + next_target;
                next_target = (next_target + 1) % modes;
            }
            swap_spin(psi, k, policy.fresh_spin, policy.mode, basis);
            ++out.swaps;
            ++j;
        };
        for (double t_out : out_times) {
            while (opt.swaps_enabled && modes > 0) {
                const double t_swap = static_cast<double>(j) * policy.interval;
                if (t_swap > t_out + eps) break;
                if (t_swap >= t_out - eps) break; // coincident: observe first, swap afterwards
                propagate(psi, op, t_swap - t, cfg);
                t = t_swap;
                do_swap();
            }
            if (t_out > t) {
                propagate(psi, op, t_out - t, cfg);
                t = t_out;
            }
            out.frames.push_back(frame(t_out, psi));
            // Swap coincident with this output.
            if (opt.swaps_enabled && modes > 0) {
                const double t_swap = static_cast<double>(j) * policy.interval;
                if (std::abs(t_swap - t_out) <= eps) {
                    do_swap();
                }
            }
        }
    } catch (const std::exception& e) {
        out.frames.clear();
        out.failure = e.what();
        if (out.failure.empty()) out.failure = "unknown failure";
    }
    return out;
}

} // namespace

EnsembleResult ensemble_run(const InitialFactory& initial, const TotalHamiltonian& h, const SwapPolicy& policy,
                            const PropagatorConfig& cfg, const EnsembleOptions& options,
                            const FrameFunction& frame) {
    policy.validate();
    cfg.validate();
    if (!(options.stride > 0.0) || !(options.t_final >= 0.0)) {
        throw Error(ErrorCode::invalid_argument, "ensemble needs t_final >= 0 and a positive stride");
    }
    EnsembleResult res;
    const long n_full = static_cast<long>(std::floor(options.t_final / options.stride + 1e-9));
    for (long i = 0; i <= n_full; ++i) res.times.push_back(static_cast<double>(i) * options.stride);
    if (options.t_final - res.times.back() > 1e-9 * options.stride) res.times.push_back(options.t_final);

    const Eigen::MatrixXcd basis = swap_basis(h.system());
    std::vector<RealizationOutput> outputs(static_cast<std::size_t>(policy.n_r));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int r = next++; r < policy.n_r; r = next++) {
            outputs[static_cast<std::size_t>(r)] =
                run_realization(r, initial, h, policy, cfg, options, frame, basis, res.times);
        }
    };
    const int n_threads = std::max(1, std::min(options.threads, policy.n_r));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Fixed-order reduction.
    std::size_t n_cols = 0;
    for (const auto& o : outputs) {
        if (o.failure.empty() && !o.frames.empty()) {
            n_cols = o.frames.front().size();
            break;
        }
    }
    res.mean.assign(res.times.size(), std::vector<double>(n_cols, 0.0));
    for (const auto& o : outputs) {
        res.failures.push_back(o.failure);
        res.swap_counts.push_back(o.swaps);
        if (!o.failure.empty()) continue;
        ++res.succeeded;
        for (std::size_t f = 0; f < res.times.size(); ++f) {
            for (std::size_t c = 0; c < n_cols; ++c) res.mean[f][c] += o.frames[f][c];
        }
    }
    if (res.succeeded == 0) {
        std::string first = outputs.empty() ? std::string("no realizations") : outputs.front().failure;
        throw Error(ErrorCode::step_failure, "every realization failed: " + first);
    }
    for (auto& row : res.mean) {
        for (auto& v : row) v /= static_cast<double>(res.succeeded);
    }
    if (options.keep_realizations) {
        for (auto& o : outputs) res.realizations.push_back(std::move(o.frames));
    }
    return res;
}

EnsembleResult ensemble_run(const SpinorState& initial, const TotalHamiltonian& h, const SwapPolicy& policy,
                            const PropagatorConfig& cfg, const EnsembleOptions& options,
                            const FrameFunction& frame) {
    return ensemble_run([&initial](int) { return initial; }, h, policy, cfg, options, frame);
}

} // namespace surrogate
