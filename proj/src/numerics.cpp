#include "nearfield/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nearfield {

namespace {

// Beyond this argument the quadrature panel count (x²/2 panels) gets large and the
// asymptotic expansion is already accurate to ~1e-16.
constexpr double kAsymptoticThreshold = 100.0;

// (π/2)·x² reduced modulo 2π without losing the integer part of x² for large x.
double half_pi_x_squared_mod_2pi(double x)
{
    const double whole = std::floor(x);
    const double frac = x - whole;
    // x²/2 = whole²/2 + whole·frac + frac²/2; only its value mod 4 matters.
    const auto w = static_cast<std::uint64_t>(whole);
    const double whole_sq_half_mod4 = static_cast<double>((w % 8) * (w % 8) % 8) / 2.0;
    const double cross = std::fmod(whole * frac, 4.0);
    const double t = std::fmod(whole_sq_half_mod4 + cross + 0.5 * frac * frac, 4.0);
    return kPi * t;
}

FresnelPair fresnel_asymptotic(double x)
{
    const double u = kPi * x * x;
    const double inv_u2 = 1.0 / (u * u);
    const double f = (1.0 - 3.0 * inv_u2 + 105.0 * inv_u2 * inv_u2) / (kPi * x);
    const double g = (1.0 - 15.0 * inv_u2 + 945.0 * inv_u2 * inv_u2) / (kPi * kPi * x * x * x);
    const double phase = half_pi_x_squared_mod_2pi(x);
    const double sn = std::sin(phase);
    const double cs = std::cos(phase);
    return {0.5 + f * sn - g * cs, 0.5 - f * cs - g * sn};
}

FresnelPair fresnel_quadrature(double x)
{
    using boost::math::quadrature::gauss_kronrod;
    auto cos_part = [](double t) { return std::cos(0.5 * kPi * t * t); };
    auto sin_part = [](double t) { return std::sin(0.5 * kPi * t * t); };

    // Panels between consecutive half-period points √(2k) keep the integrand
    // free of sign changes inside each panel.
    FresnelPair out;
    double lo = 0.0;
    for (int k = 1; lo < x; ++k) {
        const double hi = std::min(std::sqrt(2.0 * k), x);
        out.c += gauss_kronrod<double, 31>::integrate(cos_part, lo, hi, 8, 1e-13);
        out.s += gauss_kronrod<double, 31>::integrate(sin_part, lo, hi, 8, 1e-13);
        lo = hi;
    }
    return out;
}

}  // namespace

FresnelPair fresnel(double x)
{
    if (!std::isfinite(x) || x < 0.0) {
        throw std::domain_error("fresnel: argument must be finite and non-negative");
    }
    if (x == 0.0) {
        return {};
    }
    if (x > kAsymptoticThreshold) {
        return fresnel_asymptotic(x);
    }
    return fresnel_quadrature(x);
}

double dirichlet_sinc(double x, int n)
{
    if (n < 1) {
        throw std::invalid_argument("dirichlet_sinc: N must be positive");
    }
    const double den = static_cast<double>(n) * std::sin(kPi * x);
    if (std::abs(den) < 1e-12) {
        // Near x = k the ratio tends to (-1)^{k(N-1)}.
        const auto k = static_cast<long long>(std::llround(x));
        return ((k * (n - 1)) % 2 == 0) ? 1.0 : -1.0;
    }
    return std::sin(static_cast<double>(n) * kPi * x) / den;
}

double dft_grid_point(int index, int n)
{
    return (2.0 / n) * (static_cast<double>(index + 1) - 0.5 * (n + 1));
}

ComplexVector fourier_vector(double theta, int n)
{
    ComplexVector b(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m) {
        b(m) = std::polar(scale, kPi * m * theta);
    }
    return b;
}

ComplexMatrix dft_matrix(int n)
{
    if (n < 1) {
        throw std::invalid_argument("dft_matrix: N must be positive");
    }
    ComplexMatrix phi(n, n);
    for (int col = 0; col < n; ++col) {
        phi.col(col) = fourier_vector(dft_grid_point(col, n), n);
    }
    return phi;
}

}  // namespace nearfield
