#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>

namespace nearfield {

// splitmix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Seed for stream (tag, index) under a root seed. Distinct (tag, index) pairs give
// decorrelated streams; the result never depends on thread count or call order.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index = 0);

// Single-owner random stream. Built on std::mt19937_64, whose output sequence is
// fixed by the standard; every distribution is implemented here so draws are
// identical across standard libraries.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double unit();
    // Uniform on [a, b); returns a when a == b.
    double uniform(double a, double b);
    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    // Box–Muller; the second variate of each pair is cached.
    double standard_normal();
    // CN(0, 1): real and imaginary parts N(0, 1/2).
    std::complex<double> complex_normal();
    // Poisson by sequential inversion of the CDF (exact, O(mean) per draw).
    // Throws std::invalid_argument for mean < 0 or mean > 700 (e^{-mean} underflows).
    int poisson(double mean);
    // ±1 with equal probability.
    double sign();

    // Independent child stream; does not advance this stream.
    SeededRng split(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

}  // namespace nearfield
