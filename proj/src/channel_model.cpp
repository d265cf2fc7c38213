#include "nearfield/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nearfield {

double SystemConfig::max_distance() const
{
    return r_max > 0.0 ? r_max : rayleigh_distance(*this);
}

void SystemConfig::validate() const
{
    if (n_bs < 2 || n_bs % 2 != 0) {
        throw std::invalid_argument("system: n_bs must be a positive even number");
    }
    if (k_sub < 1) {
        throw std::invalid_argument("system: k_sub must be positive");
    }
    if (!(f_c > 0.0) || !(f_b > 0.0) || !(d > 0.0)) {
        throw std::invalid_argument("system: f_c, f_b and d must be positive");
    }
    if (!(r_min > 0.0)) {
        throw std::invalid_argument("system: r_min must be positive");
    }
    if (!(phi_max > 0.0 && phi_max < kPi / 2.0)) {
        throw std::invalid_argument("system: phi_max must lie in (0, pi/2)");
    }
    if (max_distance() < r_min) {
        throw std::invalid_argument("system: distance range is empty (max distance below r_min)");
    }
    if (!(path_mean >= 0.0)) {
        throw std::invalid_argument("system: path_mean must be non-negative");
    }
}

SystemConfig make_system_config(int n_bs, int k_sub, double f_c, double f_b)
{
    SystemConfig c;
    c.n_bs = n_bs;
    c.k_sub = k_sub;
    c.f_c = f_c;
    c.f_b = f_b;
    c.d = c.wavelength() / 2.0;
    return c;
}

PathComponent make_path(Complex alpha, double tau, double phi, double r)
{
    PathComponent p;
    p.alpha = alpha;
    p.tau = tau;
    p.r = r;
    p.theta = std::sin(phi);
    p.x = r * std::cos(phi);
    p.y = r * p.theta;
    return p;
}

double ChannelRealization::dominant_distance() const
{
    if (paths.empty()) {
        throw std::logic_error("dominant_distance: realization has no paths");
    }
    const auto it = std::max_element(paths.begin(), paths.end(),
                                     [](const auto& a, const auto& b) { return std::abs(a.alpha) < std::abs(b.alpha); });
    return it->r;
}

double rayleigh_distance(const SystemConfig& config)
{
    const double aperture = config.aperture();
    return 2.0 * aperture * aperture / config.wavelength();
}

RealVector element_distances(const PathComponent& path, const SystemConfig& config)
{
    RealVector out(config.n_bs);
    for (int n = 0; n < config.n_bs; ++n) {
        const double dy = path.y - element_offset(n, config.n_bs) * config.d;
        out(n) = std::hypot(path.x, dy);
    }
    return out;
}

ComplexVector near_field_arv(double theta, double r, const SystemConfig& config, ArvMode mode)
{
    if (!(r > 0.0)) {
        throw std::domain_error("near_field_arv: distance must be positive");
    }
    if (!(std::abs(theta) < 1.0)) {
        throw std::domain_error("near_field_arv: |theta| must be below 1");
    }
    const int n_bs = config.n_bs;
    const double k0 = 2.0 * kPi / config.wavelength();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_bs));
    ComplexVector a(n_bs);
    if (mode == ArvMode::exact) {
        PathComponent p;
        p.r = r;
        p.theta = theta;
        p.x = r * std::sqrt(1.0 - theta * theta);
        p.y = r * theta;
        const RealVector dist = element_distances(p, config);
        for (int n = 0; n < n_bs; ++n) {
            a(n) = std::polar(scale, -k0 * (dist(n) - r));
        }
    } else {
        const double curvature = (1.0 - theta * theta) / (2.0 * r) * config.d * config.d;
        for (int n = 0; n < n_bs; ++n) {
            const double delta = element_offset(n, n_bs);
            const double diff = curvature * delta * delta - delta * config.d * theta;
            a(n) = std::polar(scale, -k0 * diff);
        }
    }
    return a;
}

ComplexVector far_field_arv(double theta, int n, double spacing_wavelengths)
{
    ComplexVector b(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        b(i) = std::polar(scale, 2.0 * kPi * spacing_wavelengths * element_offset(i, n) * theta);
    }
    return b;
}

std::vector<double> subcarrier_frequencies(const SystemConfig& config)
{
    std::vector<double> f(config.k_sub);
    const double spacing = config.f_b / config.k_sub;
    for (int k = 1; k <= config.k_sub; ++k) {
        f[k - 1] = config.f_c + (k - 0.5 * (config.k_sub + 1)) * spacing;
    }
    return f;
}

ChannelRealization synthesize_channel(const std::vector<PathComponent>& paths, const SystemConfig& config)
{
    if (paths.empty()) {
        throw std::invalid_argument("synthesize_channel: at least one path required");
    }
    const auto freqs = subcarrier_frequencies(config);
    const double gain = std::sqrt(static_cast<double>(config.n_bs) / static_cast<double>(paths.size()));
    ChannelRealization out;
    out.paths = paths;
    out.H = ComplexMatrix::Zero(config.n_bs, config.k_sub);
    for (const auto& p : paths) {
        const ComplexVector a = near_field_arv(p.theta, p.r, config, ArvMode::exact);
        for (int k = 0; k < config.k_sub; ++k) {
            // e^{-j2πτf} with the phase reduced in cycles first; τ·f_c is in the hundreds.
            const double cycles = p.tau * freqs[k];
            const double phase = -2.0 * kPi * (cycles - std::floor(cycles));
            out.H.col(k) += (gain * p.alpha * std::polar(1.0, phase)) * a;
        }
    }
    return out;
}

ChannelRealization sample_realization(SeededRng& rng, const SystemConfig& config, const SamplingOptions& options)
{
    const double r_lo = options.r_lo.value_or(config.r_min);
    const double r_hi = options.r_hi.value_or(config.max_distance());
    if (!(r_lo > 0.0) || r_hi < r_lo) {
        throw std::invalid_argument("sample_realization: invalid distance range");
    }
    int count = options.path_count ? *options.path_count : rng.poisson(config.path_mean);
    count = std::max(count, 1);
    const double tau_max = config.k_sub / (2.0 * config.f_b);

    std::vector<PathComponent> paths;
    paths.reserve(count);
    for (int l = 0; l < count; ++l) {
        const double phi = rng.uniform(-config.phi_max, config.phi_max);
        const double r = rng.uniform(r_lo, r_hi);
        const Complex alpha = rng.complex_normal();
        const double tau = rng.uniform(0.0, tau_max);
        paths.push_back(make_path(alpha, tau, phi, r));
    }
    return synthesize_channel(paths, config);
}

}  // namespace nearfield
