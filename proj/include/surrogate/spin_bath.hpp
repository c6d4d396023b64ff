// spin_bath.hpp — Bit-encoded two-level-system bath and the spinor wave function
//
// A bath of K two-level modes spans 2^K configurations. Configuration s carries
// mode k (1-based) excited iff bit (k-1) of s is set. The total wave function is
// stored bath-major: amplitude (s, i) lives at s * n_sys + i, so each bath
// configuration owns a contiguous system-space row.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "surrogate/error.hpp"

namespace surrogate {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SpectrumScheme { uniform };

struct BathSpec {
    std::vector<double> energies;   // ascending
    double eta{0.0};                // slope of J(e) = eta * e
    std::vector<double> couplings;  // d_k
    std::vector<double> dos;        // rho(e_k)

    int modes() const { return static_cast<int>(energies.size()); }
};

class SpinorState {
public:
    SpinorState() = default;
    SpinorState(int modes, Index n_sys);

    int modes() const { return modes_; }
    Index n_sys() const { return n_sys_; }
    Index n_bath() const { return Index{1} << modes_; }
    Index size() const { return amp_.size(); }

    cplx& operator()(Index s, Index i) { return amp_[s * n_sys_ + i]; }
    const cplx& operator()(Index s, Index i) const { return amp_[s * n_sys_ + i]; }

    Eigen::VectorXcd& data() { return amp_; }
    const Eigen::VectorXcd& data() const { return amp_; }

    // (2^K x n_sys) row-major view; row s is the system wave function of configuration s.
    Eigen::Map<RowMatrixXcd> matrix() { return {amp_.data(), n_bath(), n_sys_}; }
    Eigen::Map<const RowMatrixXcd> matrix() const { return {amp_.data(), n_bath(), n_sys_}; }

    double norm() const { return amp_.norm(); }
    void normalize();
    void set_zero() { amp_.setZero(); }

    bool same_shape(const SpinorState& other) const {
        return modes_ == other.modes_ && n_sys_ == other.n_sys_;
    }

    // |system> (x) |bath product>, bath given as one (amp0, amp1) pair per mode.
    static SpinorState product(const Eigen::VectorXcd& system,
                               const std::vector<std::array<cplx, 2>>& mode_states);

private:
    int modes_{0};
    Index n_sys_{0};
    Eigen::VectorXcd amp_;
};

cplx inner(const SpinorState& a, const SpinorState& b);

inline bool mode_excited(std::uint64_t s, int k) { return (s >> (k - 1)) & 1U; }

// Uniform samples of [eps0, eps_c], endpoints included. K = 1 yields {eps0}.
std::vector<double> sample_spectrum(double eps0, double eps_c, int modes,
                                    SpectrumScheme scheme = SpectrumScheme::uniform);

// Fills dos and couplings for the spectrum already in `spec`.
// rho(e_k) = 1 / (e_{k+1} - e_k); the last mode reuses the previous spacing.
std::vector<double> coupling_constants(BathSpec& spec);

BathSpec make_bath(double eps0, double eps_c, int modes, double eta);

enum class ModeOp { create, annihilate, sx, sy, sz };

// Single-mode operators with k 1-based. Spin operators use the 1/2 normalization:
// sx = (c^+ + c)/2, sy = (c^+ - c)/(2i), sz = (c^+ c - c c^+)/2.
SpinorState apply_mode_op(const SpinorState& state, int k, ModeOp which);
void apply_mode_op(const SpinorState& in, int k, ModeOp which, SpinorState& out, cplx scale,
                   bool accumulate);

// (c^+_j c_k + c^+_k c_j)
SpinorState apply_pair_hop(const SpinorState& state, int j, int k);
void apply_pair_hop(const SpinorState& in, int j, int k, SpinorState& out, cplx scale,
                    bool accumulate);

// sum_k e_k c^+_k c_k
SpinorState apply_bath_hamiltonian(const SpinorState& state, const BathSpec& spec);

// Occupation energy of every configuration, cached by callers that apply H_B repeatedly.
std::vector<double> configuration_energies(const BathSpec& spec);

} // namespace surrogate
