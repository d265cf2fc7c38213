#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace nearfield {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

struct FresnelPair {
    double c = 0.0;
    double s = 0.0;
};

// C(x) = ∫₀ˣ cos(πt²/2) dt and S(x) = ∫₀ˣ sin(πt²/2) dt, absolute error below 1e-9.
// Throws std::domain_error for negative or non-finite x.
FresnelPair fresnel(double x);

// sin(Nπx) / (N sin(πx)); removable singularities resolve to their limit ±1.
double dirichlet_sinc(double x, int n);

// Angular grid point φ of the unitary DFT, 0-based column index: (2/N)(index + 1 - (N+1)/2).
double dft_grid_point(int index, int n);

// Fourier vector b(θ) = (1/√N) [e^{jπmθ}], m = 0..N-1.
ComplexVector fourier_vector(double theta, int n);

// Unitary N×N DFT whose columns are b(φ_n) on the 2/N-spaced grid.
ComplexMatrix dft_matrix(int n);

inline double frobenius_norm_sq(const ComplexMatrix& a) { return a.squaredNorm(); }

}  // namespace nearfield
