// boson_oracle.hpp — Exact rotating-wave oscillator + boson-bath model (arrowhead matrix)

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "surrogate/spin_bath.hpp"

namespace surrogate {

struct ArrowheadModel {
    double omega{1.0};
    std::vector<double> omegas; // bath frequencies
    std::vector<double> chis;   // couplings

    Eigen::MatrixXd matrix() const;
    int modes() const { return static_cast<int>(omegas.size()); }
};

// chi_k = d_k / sqrt(2 m w_k) with w_k = e_k; chi_k = 0 where e_k = 0.
ArrowheadModel arrowhead_from_bath(double omega, double mass, const BathSpec& bath);

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // columns y^(i)
    Eigen::VectorXd y0_sq;        // |y_0^(i)|^2
    ArrowheadModel model;
};

SpectralDecomposition decompose(const ArrowheadModel& model);

// Backward error of the secular equation, |omega - l - sum_j chi_j^2 / (w_j - l)|
// divided by the sum of the magnitudes of its terms (the slope near a pole would
// otherwise amplify the rounding of l). NaN where l coincides with some w_j.
Eigen::VectorXd secular_residuals(const SpectralDecomposition& d);

// (1 + sum_j chi_j^2 / (w_j - l_i)^2)^-1; NaN where the closed form is singular.
Eigen::VectorXd y0_sq_closed_form(const SpectralDecomposition& d);

// U(t) = A exp(-i l t) A^T
Eigen::MatrixXcd evolution_matrix(const SpectralDecomposition& d, double t);
// Component sums written with |y_0|^2 and the couplings; singular near l_i = w_j.
Eigen::MatrixXcd evolution_matrix_closed_form(const SpectralDecomposition& d, double t);

double u00_abs2(const SpectralDecomposition& d, double t);

// R = |U00| - (omega / (2 H_S0)) (|U00| - 1/|U00|); NaN when |U00| < floor.
double r_envelope(const SpectralDecomposition& d, double t, double h_s0, double omega, double floor = 1e-12);

} // namespace surrogate
