// hamiltonian.hpp — System-bath coupling terms and total Hamiltonian assembly

#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "surrogate/spin_bath.hpp"
#include "surrogate/system_models.hpp"

namespace surrogate {

// out = A in (overwrites out).
using LinearOperator = std::function<void(const SpinorState&, SpinorState&)>;

struct NoCoupling {};

// q (x) sum_k d_k (c^+_k + c_k)
struct DipolarCoupling {
    std::vector<double> d;
};

// H_S (x) sum_{j<k} c_jk (c^+_j c_k + c^+_k c_j)
struct DephasingCoupling {
    double c{0.0};
    double sigma_eps{1.0};
    double exponent_sign{-1.0};
    Eigen::MatrixXd c_jk; // symmetric, zero diagonal
};

// sum_k gamma_k [S0.s_k - 3 (S0.n_k)(s_k.n_k)]
struct NvDipoleCoupling {
    std::vector<double> gamma;
    std::vector<Eigen::Vector3d> n;
};

// sum_k coeff_k (S0z - 1/2) s_k^z with coeff_k = gamma_k [1 - 3 (n_k^z)^2]
struct NvReducedDipoleCoupling {
    std::vector<double> coeff;
};

using CouplingSpec = std::variant<NoCoupling, DipolarCoupling, DephasingCoupling, NvDipoleCoupling,
                                  NvReducedDipoleCoupling>;

// Exponent sign -1 gives exp(-(e_j - e_k)^2 / (2 sigma^2)); +1 reproduces the printed form.
DephasingCoupling make_dephasing(double c, double sigma_eps, const std::vector<double>& energies,
                                 double exponent_sign = -1.0);
DipolarCoupling make_dipolar(const BathSpec& bath);
NvDipoleCoupling make_nv_dipole(const NVSpec& nv);
NvReducedDipoleCoupling make_nv_reduced_dipole(const NVSpec& nv);

// Two-level-system bath with on-site energies, or the dipolar NV nitrogen bath.
struct TlsBath {
    BathSpec spec;
};
struct NvBath {
    NVSpec spec; // spec.reduced selects the secular (zz-only) form
};
using BathModel = std::variant<TlsBath, NvBath>;

enum class Term { system, bath, coupling, total };

class TotalHamiltonian {
public:
    TotalHamiltonian(SystemModel system, BathModel bath, CouplingSpec coupling,
                     std::string scenario = "custom");

    int modes() const { return modes_; }
    Index n_sys() const { return system_.n_sys(); }
    Index dim() const { return (Index{1} << modes_) * n_sys(); }
    const SystemModel& system() const { return system_; }
    const BathModel& bath() const { return bath_; }
    const CouplingSpec& coupling() const { return coupling_; }
    const std::string& scenario() const { return scenario_; }

    void apply(Term term, const SpinorState& in, SpinorState& out, cplx scale = 1.0,
               bool accumulate = false) const;
    SpinorState apply(Term term, const SpinorState& in) const;
    LinearOperator op(Term term) const;

private:
    void check(const SpinorState& in) const;
    void apply_bath(const SpinorState& in, SpinorState& out, cplx scale) const;
    void apply_coupling(const SpinorState& in, SpinorState& out, cplx scale) const;

    SystemModel system_;
    BathModel bath_;
    CouplingSpec coupling_;
    std::string scenario_;
    int modes_{0};

    // Diagonal bath energies per configuration (TLS bath, reduced NV bath).
    std::vector<double> bath_diagonal_;
    // Full NV bath: 4x4 pair blocks in the (bit_j + 2 bit_k) basis.
    struct PairBlock {
        int j, k;
        Eigen::Matrix4cd m;
    };
    std::vector<PairBlock> bath_pairs_;
    // Full NV coupling: 6x6 blocks in the (sys + 3 bit_k) basis per mode.
    std::vector<Eigen::Matrix<cplx, 6, 6>> nv_coupling_blocks_;
    // Reduced NV coupling: sum_k coeff_k s_k^z per configuration.
    std::vector<double> reduced_coupling_diagonal_;
    Eigen::MatrixXcd system_matrix_; // NV only
};

SpinorState apply_coupling(const SpinorState& state, const TotalHamiltonian& h);
SpinorState apply_total(const SpinorState& state, const TotalHamiltonian& h);

// max over probes of |(AB - BA) psi| / (|AB psi| + |BA psi| + floor).
double commutator_residual(const LinearOperator& a, const LinearOperator& b,
                           std::span<const SpinorState> probes, double floor = 1e-300);

// Dense (n_sys x n_sys) system operator lifted to act on every bath row.
LinearOperator system_operator(const Eigen::MatrixXcd& op);

} // namespace surrogate
