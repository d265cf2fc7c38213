#pragma once

#include <optional>
#include <vector>

#include "nearfield/numerics.hpp"
#include "nearfield/rng.hpp"

namespace nearfield {

// Propagation constant used for wavelengths. 3e8 rather than 299792458 so that the
// tabulated Rayleigh distance of a 256-element half-wavelength ULA at 60 GHz is 163.84 m.
inline constexpr double kSpeedOfLight = 3.0e8;

// Physical scenario shared by every module.
struct SystemConfig {
    int n_bs = 64;                          // ULA elements (even)
    int k_sub = 8;                          // OFDM subcarriers
    double f_c = 60e9;                      // carrier frequency, Hz
    double f_b = 100e6;                     // bandwidth, Hz
    double d = kSpeedOfLight / 60e9 / 2.0;  // element spacing, m
    double r_min = 5.0;                     // nearest scatterer distance, m
    double r_max = 0.0;                     // farthest distance, m; 0 selects the Rayleigh distance
    double phi_max = kPi / 3.0;             // sector half-angle, rad
    double path_mean = 6.0;                 // Poisson mean of the path count

    double wavelength() const { return kSpeedOfLight / f_c; }
    double aperture() const { return n_bs * d; }
    double max_distance() const;
    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

// Half-wavelength spaced array at carrier f_c.
SystemConfig make_system_config(int n_bs, int k_sub, double f_c = 60e9, double f_b = 100e6);

// One scatterer. The reference element (index n_bs/2 - 1) sits at the origin and
// element n sits at (0, Δ_n·d) with Δ_n = n - n_bs/2 + 1.
struct PathComponent {
    Complex alpha{1.0, 0.0};  // complex gain
    double tau = 0.0;         // delay, s
    double theta = 0.0;       // sine of the angle of arrival at the reference element
    double r = 1.0;           // distance to the reference element, m
    double x = 1.0;           // scatterer coordinates, m
    double y = 0.0;
};

// Path placed at angle phi (rad) and distance r from the reference element.
PathComponent make_path(Complex alpha, double tau, double phi, double r);

struct ChannelRealization {
    std::vector<PathComponent> paths;
    ComplexMatrix H;  // n_bs × k_sub

    // Distance of the strongest path (largest |alpha|).
    double dominant_distance() const;
};

enum class ArvMode { exact, fresnel_approx };

// 2D²/λ with aperture D = n_bs·d.
double rayleigh_distance(const SystemConfig& config);

// Δ_n = n - n_bs/2 + 1.
inline int element_offset(int n, int n_bs) { return n - n_bs / 2 + 1; }

// Exact Euclidean distance from the scatterer to every element.
RealVector element_distances(const PathComponent& path, const SystemConfig& config);

// Normalised near-field response: entries (1/√N) e^{-j(2π/λ)(r⁽ⁿ⁾ - r)}. Exact mode uses
// true element distances, fresnel_approx the quadratic expansion of the distance difference.
// Throws std::domain_error for r <= 0 or |theta| >= 1.
ComplexVector near_field_arv(double theta, double r, const SystemConfig& config, ArvMode mode = ArvMode::exact);

// Planar-wave response (1/√n) e^{j2π(d/λ)Δ_n θ}; spacing given in wavelengths.
ComplexVector far_field_arv(double theta, int n, double spacing_wavelengths = 0.5);

// f_k = f_c + (k - (K+1)/2)·f_B/K for k = 1..K.
std::vector<double> subcarrier_frequencies(const SystemConfig& config);

// h_k = √(N_BS/L) Σ_ℓ α_ℓ e^{-j2πτ_ℓ f_k} a(θ_ℓ, r_ℓ) with exact-mode responses.
ChannelRealization synthesize_channel(const std::vector<PathComponent>& paths, const SystemConfig& config);

// Restrictions applied on top of the configured distributions (distance bins,
// fixed path counts for sweeps).
struct SamplingOptions {
    std::optional<double> r_lo;
    std::optional<double> r_hi;
    std::optional<int> path_count;
};

// L ~ Poisson(path_mean) floored at 1; φ ~ U(-phi_max, phi_max); r ~ U(r_min, max_distance);
// α ~ CN(0,1); τ ~ U(0, K/(2 f_B)).
ChannelRealization sample_realization(SeededRng& rng, const SystemConfig& config, const SamplingOptions& options = {});

}  // namespace nearfield
