// boson_oracle.cpp — Arrowhead spectral decomposition and U(t)

#include "surrogate/boson_oracle.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace surrogate {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Relative separation below which l_i is treated as sitting on a bath pole.
constexpr double kPoleGap = 1e-10;
} // namespace

Eigen::MatrixXd ArrowheadModel::matrix() const {
    const int k = modes();
    if (static_cast<int>(chis.size()) != k) {
        throw Error(ErrorCode::shape_mismatch, "arrowhead couplings and frequencies differ in length");
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k + 1, k + 1);
    h(0, 0) = omega;
    for (int j = 1; j <= k; ++j) {
        h(j, j) = omegas[static_cast<std::size_t>(j - 1)];
        h(0, j) = h(j, 0) = chis[static_cast<std::size_t>(j - 1)];
    }
    return h;
}

ArrowheadModel arrowhead_from_bath(double omega, double mass, const BathSpec& bath) {
    ArrowheadModel m;
    m.omega = omega;
    m.omegas = bath.energies;
    for (int k = 0; k < bath.modes(); ++k) {
        const double e = bath.energies[static_cast<std::size_t>(k)];
        m.chis.push_back(e > 0.0 ? bath.couplings[static_cast<std::size_t>(k)] / std::sqrt(2.0 * mass * e) : 0.0);
    }
    return m;
}

SpectralDecomposition decompose(const ArrowheadModel& model) {
    SpectralDecomposition d;
    d.model = model;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.matrix());
    if (es.info() != Eigen::Success) throw Error(ErrorCode::no_convergence, "arrowhead eigensolver failed");
    d.eigenvalues = es.eigenvalues();
    d.eigenvectors = es.eigenvectors();
    d.y0_sq = d.eigenvectors.row(0).transpose().array().square();
    return d;
}

namespace {
double scale_of(const ArrowheadModel& m) {
    double s = std::abs(m.omega);
    for (double w : m.omegas) s = std::max(s, std::abs(w));
    for (double c : m.chis) s = std::max(s, std::abs(c));
    return std::max(s, 1e-300);
}

bool near_pole(const ArrowheadModel& m, double lam) {
    const double s = scale_of(m);
    for (std::size_t j = 0; j < m.omegas.size(); ++j) {
        if (std::abs(m.omegas[j] - lam) <= kPoleGap * s) return true;
    }
    return false;
}
} // namespace

Eigen::VectorXd secular_residuals(const SpectralDecomposition& d) {
    const auto& m = d.model;
    Eigen::VectorXd r(d.eigenvalues.size());
    for (Index i = 0; i < d.eigenvalues.size(); ++i) {
        const double lam = d.eigenvalues[i];
        if (near_pole(m, lam)) {
            r[i] = kNaN;
            continue;
        }
        double sum = 0.0, scale = std::abs(m.omega) + std::abs(lam);
        for (std::size_t j = 0; j < m.omegas.size(); ++j) {
            const double term = m.chis[j] * m.chis[j] / (m.omegas[j] - lam);
            sum += term;
            scale += std::abs(term);
        }
        r[i] = std::abs(m.omega - lam - sum) / scale;
    }
    return r;
}

Eigen::VectorXd y0_sq_closed_form(const SpectralDecomposition& d) {
    const auto& m = d.model;
    Eigen::VectorXd y(d.eigenvalues.size());
    for (Index i = 0; i < d.eigenvalues.size(); ++i) {
        const double lam = d.eigenvalues[i];
        if (near_pole(m, lam)) {
            y[i] = kNaN;
            continue;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < m.omegas.size(); ++j) {
            const double g = m.omegas[j] - lam;
            sum += m.chis[j] * m.chis[j] / (g * g);
        }
        y[i] = 1.0 / (1.0 + sum);
    }
    return y;
}

Eigen::MatrixXcd evolution_matrix(const SpectralDecomposition& d, double t) {
    const Index n = d.eigenvalues.size();
    Eigen::VectorXcd phase(n);
    for (Index i = 0; i < n; ++i) phase[i] = std::exp(cplx(0.0, -d.eigenvalues[i] * t));
    const Eigen::MatrixXcd a = d.eigenvectors.cast<cplx>();
    return a * phase.asDiagonal() * a.transpose();
}

Eigen::MatrixXcd evolution_matrix_closed_form(const SpectralDecomposition& d, double t) {
    const auto& m = d.model;
    const Index n = d.eigenvalues.size();
    const Eigen::VectorXd y0 = y0_sq_closed_form(d);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
    for (Index l = 0; l < n; ++l) {
        const double lam = d.eigenvalues[l];
        const cplx e = y0[l] * std::exp(cplx(0.0, -lam * t));
        u(0, 0) += e;
        for (Index k = 1; k < n; ++k) {
            const double ck = m.chis[static_cast<std::size_t>(k - 1)] / (lam - m.omegas[static_cast<std::size_t>(k - 1)]);
            u(0, k) += e * ck;
            u(k, 0) += e * ck;
            for (Index j = 1; j < n; ++j) {
                const double cj =
                    m.chis[static_cast<std::size_t>(j - 1)] / (lam - m.omegas[static_cast<std::size_t>(j - 1)]);
                u(j, k) += e * cj * ck;
            }
        }
    }
    return u;
}

double u00_abs2(const SpectralDecomposition& d, double t) {
    const Index n = d.y0_sq.size();
    double sum = 0.0;
    for (Index j = 0; j < n; ++j) sum += d.y0_sq[j] * d.y0_sq[j];
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            sum += 2.0 * std::cos(t * (d.eigenvalues[j] - d.eigenvalues[i])) * d.y0_sq[j] * d.y0_sq[i];
        }
    }
    return sum;
}

double r_envelope(const SpectralDecomposition& d, double t, double h_s0, double omega, double floor) {
    if (!(h_s0 > 0.0)) throw Error(ErrorCode::invalid_argument, "envelope needs a positive initial energy");
    const double u = std::sqrt(std::max(0.0, u00_abs2(d, t)));
    if (u < floor) return kNaN;
    return u - omega / (2.0 * h_s0) * (u - 1.0 / u);
}

} // namespace surrogate
