// spectral_grid.hpp — Periodic position grid with FFT-based momentum-space operators

#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace surrogate {

class SpectralGrid {
public:
    SpectralGrid(Eigen::Index n_points, double q_min, double q_max);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    Eigen::Index size() const { return n_; }
    double q_min() const { return q_min_; }
    double q_max() const { return q_max_; }
    double dq() const { return dq_; }
    const std::vector<double>& q() const { return q_; }
    const std::vector<double>& p() const { return p_; }

    // out (+)= scale * F^-1 diag(fp) F in, one system row of length size().
    void apply_momentum_diagonal(const std::complex<double>* in, std::complex<double>* out,
                                 const std::vector<std::complex<double>>& fp,
                                 std::complex<double> scale, bool accumulate) const;

    // Momentum-space amplitudes normalized so that sum |phi_k|^2 = sum |psi_i|^2.
    void to_momentum(const std::complex<double>* in, std::complex<double>* out) const;

private:
    Eigen::Index n_;
    double q_min_, q_max_, dq_;
    std::vector<double> q_, p_;
    void* forward_{nullptr};
    void* backward_{nullptr};
};

} // namespace surrogate
