// spectral_grid.cpp — FFTW-backed momentum operators

#include "surrogate/spectral_grid.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "surrogate/error.hpp"

namespace surrogate {

namespace {

// Planner calls are not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Scratch {
    fftw_complex* a{nullptr};
    fftw_complex* b{nullptr};
    Eigen::Index n{0};

    ~Scratch() {
        fftw_free(a);
        fftw_free(b);
    }

    void reserve(Eigen::Index size) {
        if (size <= n) return;
        fftw_free(a);
        fftw_free(b);
        a = fftw_alloc_complex(static_cast<std::size_t>(size));
        b = fftw_alloc_complex(static_cast<std::size_t>(size));
        n = size;
    }
};

Scratch& scratch(Eigen::Index size) {
    thread_local Scratch s;
    s.reserve(size);
    return s;
}

} // namespace

SpectralGrid::SpectralGrid(Eigen::Index n_points, double q_min, double q_max)
    : n_(n_points), q_min_(q_min), q_max_(q_max) {
    if (n_points < 2 || !(q_max > q_min)) {
        throw Error(ErrorCode::invalid_argument, "grid needs >= 2 points and q_max > q_min");
    }
    dq_ = (q_max - q_min) / static_cast<double>(n_);
    q_.resize(static_cast<std::size_t>(n_));
    p_.resize(static_cast<std::size_t>(n_));
    const double dp = 2.0 * std::numbers::pi / (static_cast<double>(n_) * dq_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        q_[i] = q_min + dq_ * static_cast<double>(i);
        const Eigen::Index j = i < n_ / 2 ? i : i - n_;
        p_[i] = dp * static_cast<double>(j);
    }
    std::lock_guard lock(planner_mutex());
    fftw_complex* tmp_in = fftw_alloc_complex(static_cast<std::size_t>(n_));
    fftw_complex* tmp_out = fftw_alloc_complex(static_cast<std::size_t>(n_));
    forward_ = fftw_plan_dft_1d(static_cast<int>(n_), tmp_in, tmp_out, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(static_cast<int>(n_), tmp_in, tmp_out, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(tmp_in);
    fftw_free(tmp_out);
}

SpectralGrid::~SpectralGrid() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void SpectralGrid::apply_momentum_diagonal(const std::complex<double>* in, std::complex<double>* out,
                                           const std::vector<std::complex<double>>& fp,
                                           std::complex<double> scale, bool accumulate) const {
    Scratch& s = scratch(n_);
    std::memcpy(s.a, in, sizeof(fftw_complex) * static_cast<std::size_t>(n_));
    fftw_execute_dft(static_cast<fftw_plan>(forward_), s.a, s.b);
    auto* mom = reinterpret_cast<std::complex<double>*>(s.b);
    const std::complex<double> factor = scale / static_cast<double>(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        mom[i] *= fp[i] * factor;
    }
    fftw_execute_dft(static_cast<fftw_plan>(backward_), s.b, s.a);
    const auto* res = reinterpret_cast<const std::complex<double>*>(s.a);
    if (accumulate) {
        for (Eigen::Index i = 0; i < n_; ++i) out[i] += res[i];
    } else {
        std::memcpy(out, res, sizeof(fftw_complex) * static_cast<std::size_t>(n_));
    }
}

void SpectralGrid::to_momentum(const std::complex<double>* in, std::complex<double>* out) const {
    Scratch& s = scratch(n_);
    std::memcpy(s.a, in, sizeof(fftw_complex) * static_cast<std::size_t>(n_));
    fftw_execute_dft(static_cast<fftw_plan>(forward_), s.a, s.b);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_));
    const auto* mom = reinterpret_cast<const std::complex<double>*>(s.b);
    for (Eigen::Index i = 0; i < n_; ++i) out[i] = mom[i] * norm;
}

} // namespace surrogate
