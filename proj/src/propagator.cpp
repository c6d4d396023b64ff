// propagator.cpp — Lanczos propagator with full reorthogonalization and step bisection

#include "surrogate/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace surrogate {

void PropagatorConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "propagator dt must be positive");
    if (!(tol > 0.0 && tol <= 1e-3)) {
        throw Error(ErrorCode::invalid_argument, "propagator tol must lie in (0, 1e-3]");
    }
    if (krylov_dim_max < 4) {
        throw Error(ErrorCode::invalid_argument, "krylov_dim_max must be at least 4");
    }
}

namespace {

enum class Flavor { real_time, imaginary_time };

struct Workspace {
    std::vector<SpinorState> v;
    SpinorState w;
};

struct StepResult {
    double advanced;
    double error;
};

// Coefficients of f(T) e0 for the Lanczos tridiagonal T.
Eigen::VectorXcd tridiagonal_function(const std::vector<double>& alpha, const std::vector<double>& beta,
                                      int m, double tau, Flavor flavor) {
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag[i] = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    if (m == 1) {
        Eigen::VectorXcd c(1);
        c[0] = flavor == Flavor::real_time ? std::exp(cplx(0.0, -diag[0] * tau)) : cplx(1.0, 0.0);
        return c;
    }
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& q = es.eigenvectors();
    Eigen::VectorXcd f(m);
    for (int i = 0; i < m; ++i) {
        if (flavor == Flavor::real_time) {
            f[i] = std::exp(cplx(0.0, -lam[i] * tau)) * q(0, i);
        } else {
            f[i] = std::exp(-(lam[i] - lam[0]) * tau) * q(0, i); // shifted to avoid overflow
        }
    }
    return q.cast<cplx>() * f;
}

StepResult krylov_step(SpinorState& psi, const LinearOperator& h, double tau, Flavor flavor, double tol,
                       int m_max, int max_bisections, Workspace& ws, PropagationStats& stats) {
    const double norm0 = psi.norm();
    if (norm0 == 0.0) throw Error(ErrorCode::invalid_argument, "cannot propagate the zero state");
    ws.v[0] = psi;
    ws.v[0].data() /= norm0;

    std::vector<double> alpha, beta;
    Eigen::VectorXcd coeff;
    double err = 0.0;
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
        h(ws.v[static_cast<std::size_t>(j)], ws.w);
        ++stats.operator_applications;
        auto& w = ws.w.data();
        const double a = inner(ws.v[static_cast<std::size_t>(j)], ws.w).real();
        alpha.push_back(a);
        w -= a * ws.v[static_cast<std::size_t>(j)].data();
        if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * ws.v[static_cast<std::size_t>(j - 1)].data();
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                const auto& vi = ws.v[static_cast<std::size_t>(i)].data();
                w -= vi.dot(w) * vi;
            }
        }
        const double b = w.norm();
        m = j + 1;
        double scale = 0.0;
        for (double x : alpha) scale = std::max(scale, std::abs(x));
        for (double x : beta) scale = std::max(scale, x);
        const bool breakdown = b <= 1e-14 * std::max(scale, 1e-300);

        coeff = tridiagonal_function(alpha, beta, m, tau, flavor);
        const double cnorm = flavor == Flavor::real_time ? 1.0 : coeff.norm();
        err = breakdown ? 0.0 : b * std::abs(coeff[m - 1]) / cnorm * (flavor == Flavor::real_time ? norm0 : 1.0);

        if (err <= tol || breakdown) break;
        if (m == m_max) {
            int halvings = 0;
            while (err > tol && halvings < max_bisections) {
                tau *= 0.5;
                ++halvings;
                coeff = tridiagonal_function(alpha, beta, m, tau, flavor);
                const double cn = flavor == Flavor::real_time ? 1.0 : coeff.norm();
                err = b * std::abs(coeff[m - 1]) / cn * (flavor == Flavor::real_time ? norm0 : 1.0);
            }
            if (err > tol) {
                std::ostringstream os;
                os << "Lanczos step failed: error " << err << " > tol " << tol << " after " << halvings
                   << " bisections (m=" << m << ", beta=" << b << ")";
                throw Error(ErrorCode::step_failure, os.str());
            }
            break;
        }
        beta.push_back(b);
        ws.v[static_cast<std::size_t>(j + 1)].data() = w / b;
    }

    auto& out = psi.data();
    out.setZero();
    for (int i = 0; i < m; ++i) out += coeff[i] * ws.v[static_cast<std::size_t>(i)].data();
    if (flavor == Flavor::real_time) {
        out *= norm0;
    } else {
        psi.normalize();
    }
    ++stats.steps;
    stats.max_error = std::max(stats.max_error, err);
    stats.min_step = std::min(stats.min_step, std::abs(tau));
    return {tau, err};
}

void ensure_vector_shapes(Workspace& ws, const SpinorState& psi, int m_max) {
    ws.v.resize(static_cast<std::size_t>(m_max + 1));
    for (auto& v : ws.v) {
        if (!v.same_shape(psi)) v = SpinorState(psi.modes(), psi.n_sys());
    }
    if (!ws.w.same_shape(psi)) ws.w = SpinorState(psi.modes(), psi.n_sys());
}

void advance(SpinorState& state, const LinearOperator& h, double tau, const PropagatorConfig& cfg,
             Workspace& ws, PropagationStats& stats) {
    if (tau == 0.0) return;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(tau) / cfg.dt - 1e-9)));
    const double hstep = tau / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
        double remaining = hstep;
        while (std::abs(remaining) > 1e-14 * std::abs(hstep)) {
            const auto r = krylov_step(state, h, remaining, Flavor::real_time, cfg.tol, cfg.krylov_dim_max,
                                       cfg.max_bisections, ws, stats);
            remaining -= r.advanced;
        }
    }
}

} // namespace

PropagationStats propagate(SpinorState& state, const LinearOperator& h, double tau,
                           const PropagatorConfig& cfg) {
    cfg.validate();
    Workspace ws;
    ensure_vector_shapes(ws, state, cfg.krylov_dim_max);
    PropagationStats stats;
    advance(state, h, tau, cfg, ws, stats);
    return stats;
}

PropagationStats propagate(SpinorState& state, const TotalHamiltonian& h, double tau,
                           const PropagatorConfig& cfg) {
    return propagate(state, h.op(Term::total), tau, cfg);
}

PropagationStats evolve_real(SpinorState& state, const LinearOperator& h, double t_final,
                             const PropagatorConfig& cfg, double stride, const Observer& observer) {
    cfg.validate();
    if (!(stride > 0.0)) throw Error(ErrorCode::invalid_argument, "observer stride must be positive");
    Workspace ws;
    ensure_vector_shapes(ws, state, cfg.krylov_dim_max);
    PropagationStats stats;
    const double sign = t_final < 0.0 ? -1.0 : 1.0;
    const double span = std::abs(t_final);
    const long n_full = static_cast<long>(std::floor(span / stride + 1e-9));
    const double tail = span - static_cast<double>(n_full) * stride;
    if (observer) observer(0.0, state);
    for (long i = 1; i <= n_full; ++i) {
        advance(state, h, sign * stride, cfg, ws, stats);
        if (observer) observer(sign * static_cast<double>(i) * stride, state);
    }
    if (tail > 1e-9 * stride) {
        advance(state, h, sign * tail, cfg, ws, stats);
        if (observer) observer(t_final, state);
    }
    return stats;
}

PropagationStats evolve_real(SpinorState& state, const TotalHamiltonian& h, double t_final,
                             const PropagatorConfig& cfg, double stride, const Observer& observer) {
    return evolve_real(state, h.op(Term::total), t_final, cfg, stride, observer);
}

double expectation(const LinearOperator& h, const SpinorState& state) {
    SpinorState hpsi;
    h(state, hpsi);
    return inner(state, hpsi).real() / inner(state, state).real();
}

GroundState ground_state_imaginary_time(const LinearOperator& h, SpinorState seed,
                                        const ImaginaryTimeConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw Error(ErrorCode::invalid_argument, "imaginary-time step must be positive");
    if (seed.norm() == 0.0) throw Error(ErrorCode::invalid_argument, "zero seed state");
    seed.normalize();
    Workspace ws;
    ensure_vector_shapes(ws, seed, cfg.krylov_dim_max);
    PropagationStats stats;
    GroundState out;
    double e_prev = expectation(h, seed);
    out.energy_history.push_back(e_prev);
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        double remaining = cfg.dt;
        while (remaining > 1e-14 * cfg.dt) {
            const auto r = krylov_step(seed, h, remaining, Flavor::imaginary_time, cfg.tol, cfg.krylov_dim_max,
                                       30, ws, stats);
            remaining -= r.advanced;
        }
        seed.normalize();
        const double e = expectation(h, seed);
        out.energy_history.push_back(e);
        const double change = std::abs(e - e_prev);
        e_prev = e;
        if (it >= cfg.min_iterations && change <= cfg.energy_tol * std::max(std::abs(e), cfg.energy_floor)) {
            out.state = std::move(seed);
            out.energy = e;
            out.iterations = it;
            return out;
        }
    }
    std::ostringstream os;
    os << "imaginary-time relaxation did not converge in " << cfg.max_iterations << " iterations (E=" << e_prev
       << ")";
    throw Error(ErrorCode::no_convergence, os.str());
}

GroundState ground_state_imaginary_time(const TotalHamiltonian& h, SpinorState seed,
                                        const ImaginaryTimeConfig& cfg) {
    return ground_state_imaginary_time(h.op(Term::total), std::move(seed), cfg);
}

ZenoReport zeno_time(const SpinorState& state, const LinearOperator& h, const PropagatorConfig& cfg,
                     int samples, double variance_floor) {
    ZenoReport rep;
    SpinorState hpsi;
    h(state, hpsi);
    const double n2 = inner(state, state).real();
    rep.mean_H = inner(state, hpsi).real() / n2;
    const Eigen::VectorXcd dev = hpsi.data() - rep.mean_H * state.data();
    rep.delta_H = dev.norm() / std::sqrt(n2);
    if (rep.delta_H <= variance_floor * std::max(hpsi.norm() / std::sqrt(n2), 0.0)) {
        rep.t_Z = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.t_Z = 1.0 / rep.delta_H;

    PropagatorConfig pc = cfg;
    const double t_max = 0.1 * rep.t_Z;
    pc.dt = std::min(cfg.dt, t_max / samples);
    SpinorState psi = state;
    double t = 0.0, st4 = 0.0, st2p = 0.0;
    for (int i = 1; i <= samples; ++i) {
        const double ti = t_max * i / samples;
        propagate(psi, h, ti - t, pc);
        t = ti;
        const double p = std::norm(inner(state, psi)) / (n2 * n2);
        rep.survival_samples.emplace_back(ti, p);
        st4 += ti * ti * ti * ti;
        st2p += ti * ti * (1.0 - p);
    }
    const double a = st2p / st4;
    rep.quadratic_fit_residual = std::abs(a * rep.t_Z * rep.t_Z - 1.0);
    return rep;
}

ZenoReport zeno_time(const SpinorState& state, const TotalHamiltonian& h, const PropagatorConfig& cfg,
                     int samples, double variance_floor) {
    return zeno_time(state, h.op(Term::total), cfg, samples, variance_floor);
}

} // namespace surrogate
