#include "nearfield/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nearfield {

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index)
{
    return mix_seed(mix_seed(mix_seed(root) ^ tag) ^ (index * 0xd1b54a32d192ed03ULL));
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double SeededRng::unit()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double a, double b)
{
    if (a == b) {
        return a;
    }
    return a + (b - a) * unit();
}

std::uint64_t SeededRng::uniform_index(std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("uniform_index: empty range");
    }
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) {
        v = engine_();
    }
    return v % n;
}

double SeededRng::standard_normal()
{
    if (spare_normal_) {
        const double v = *spare_normal_;
        spare_normal_.reset();
        return v;
    }
    double u1 = unit();
    while (u1 <= 0.0) {
        u1 = unit();
    }
    const double u2 = unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

std::complex<double> SeededRng::complex_normal()
{
    const double re = standard_normal();
    const double im = standard_normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

int SeededRng::poisson(double mean)
{
    if (!(mean >= 0.0) || mean > 700.0) {
        throw std::invalid_argument("poisson: mean must lie in [0, 700]");
    }
    if (mean == 0.0) {
        return 0;
    }
    const double u = unit();
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u >= cdf) {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p < 1e-300 && k > mean) {
            break;  // tail mass exhausted in floating point
        }
    }
    return k;
}

double SeededRng::sign()
{
    return (engine_() >> 63) != 0 ? 1.0 : -1.0;
}

SeededRng SeededRng::split(std::uint64_t stream) const
{
    return SeededRng(derive_seed(seed_, 0x5eedULL, stream));
}

}  // namespace nearfield
