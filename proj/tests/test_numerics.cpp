#include <doctest.h>

#include <cmath>
#include <limits>

#include "nearfield/numerics.hpp"
#include "nearfield/rng.hpp"

using namespace nearfield;

namespace {

// Maclaurin series of the Fresnel integrals in long double, accurate for x ≤ 3.
FresnelPair fresnel_series(double x)
{
    const long double z = 3.14159265358979323846264338327950288L * x * x / 2.0L;
    long double c = 0.0L;
    long double s = 0.0L;
    long double term = x;  // x·(−1)^n z^{2n}/(2n)! for C, starts at n = 0
    for (int n = 0; n < 60; ++n) {
        c += term / (4 * n + 1);
        term *= -z * z / ((2 * n + 1) * (2 * n + 2));
    }
    term = x * z;
    for (int n = 0; n < 60; ++n) {
        s += term / (4 * n + 3);
        term *= -z * z / ((2 * n + 2) * (2 * n + 3));
    }
    return {static_cast<double>(c), static_cast<double>(s)};
}

}  // namespace

TEST_SUITE("numerics")
{
    TEST_CASE("fresnel at zero")
    {
        const auto f = fresnel(0.0);
        CHECK(f.c == 0.0);
        CHECK(f.s == 0.0);
    }

    TEST_CASE("fresnel against series oracle")
    {
        for (double x : {0.05, 0.3, 0.5, 1.0, 1.7, 2.5, 3.0}) {
            const auto got = fresnel(x);
            const auto want = fresnel_series(x);
            CAPTURE(x);
            CHECK(std::abs(got.c - want.c) < 1e-9);
            CHECK(std::abs(got.s - want.s) < 1e-9);
        }
    }

    TEST_CASE("fresnel frozen reference values")
    {
        // 30-digit reference values.
        struct Row {
            double x, c, s;
        };
        for (const Row r : {Row{1.0, 0.779893400376822829, 0.438259147390354766},
                            Row{7.3, 0.539268015658462482, 0.518947327858144291},
                            Row{50.0, 0.499999189430727968, 0.493633802585938741}}) {
            const auto f = fresnel(r.x);
            CAPTURE(r.x);
            CHECK(std::abs(f.c - r.c) < 1e-9);
            CHECK(std::abs(f.s - r.s) < 1e-9);
        }
        const auto far = fresnel(50.0);
        CHECK(std::abs(far.c - 0.5) < 0.01);
        CHECK(std::abs(far.s - 0.5) < 0.01);
    }

    TEST_CASE("fresnel large argument stays continuous")
    {
        // The increment across the branch switch must match the integral over that interval
        // (composite Simpson; the integrand barely turns over 0.002).
        const double a = 99.999, b = 100.001;
        const int n = 200;
        double dc = 0.0, ds = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = a + (b - a) * i / n;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            dc += w * std::cos(0.5 * kPi * t * t);
            ds += w * std::sin(0.5 * kPi * t * t);
        }
        dc *= (b - a) / (3.0 * n);
        ds *= (b - a) / (3.0 * n);
        const auto below = fresnel(a);
        const auto above = fresnel(b);
        CHECK(std::abs((above.c - below.c) - dc) < 1e-9);
        CHECK(std::abs((above.s - below.s) - ds) < 1e-9);
        const auto huge = fresnel(1e4);
        CHECK(std::abs(huge.c - 0.5) < 1e-4);
        CHECK(std::abs(huge.s - 0.5) < 1e-4);
    }

    TEST_CASE("fresnel rejects invalid input")
    {
        CHECK_THROWS_AS(fresnel(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
        CHECK_THROWS_AS(fresnel(std::numeric_limits<double>::infinity()), std::domain_error);
        CHECK_THROWS_AS(fresnel(-1.0), std::domain_error);
    }

    TEST_CASE("fresnel C is monotone on [0, 1]")
    {
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double c = fresnel(i / 100.0).c;
            CHECK(c > prev);
            prev = c;
        }
    }

    TEST_CASE("dirichlet sinc values")
    {
        CHECK(dirichlet_sinc(0.0, 64) == 1.0);
        CHECK(std::abs(dirichlet_sinc(1.0 / 64.0, 64)) < 1e-12);
        CHECK(dirichlet_sinc(0.3, 1) == doctest::Approx(1.0));
        // Limit at x = 1 is (−1)^{N−1}.
        CHECK(dirichlet_sinc(1.0, 8) == -1.0);
        CHECK(dirichlet_sinc(1.0, 7) == 1.0);
    }

    TEST_CASE("dirichlet sinc matches finite sum")
    {
        for (int n : {2, 8, 13, 64}) {
            for (double x : {0.01, -0.2, 0.37, 0.5, 0.9}) {
                // (1/N) Σ e^{j2πmx} = e^{jπ(N−1)x}·sin(Nπx)/(N sin πx)
                Complex sum = 0.0;
                for (int m = 0; m < n; ++m) {
                    sum += std::polar(1.0, 2.0 * kPi * m * x);
                }
                sum /= static_cast<double>(n);
                const double signed_value = (sum * std::polar(1.0, -kPi * (n - 1) * x)).real();
                CAPTURE(n);
                CAPTURE(x);
                CHECK(std::abs(dirichlet_sinc(x, n) - signed_value) < 1e-12);
            }
        }
        CHECK_THROWS_AS(dirichlet_sinc(0.1, 0), std::invalid_argument);
    }

    TEST_CASE("dft matrix")
    {
        const auto one = dft_matrix(1);
        REQUIRE(one.rows() == 1);
        CHECK(std::abs(one(0, 0) - Complex(1.0, 0.0)) < 1e-15);

        for (int n : {16, 64, 128, 256}) {
            const ComplexMatrix phi = dft_matrix(n);
            const double err = (phi.adjoint() * phi - ComplexMatrix::Identity(n, n)).norm();
            CAPTURE(n);
            CHECK(err <= 1e-10);
        }
        const ComplexMatrix phi64 = dft_matrix(64);
        CHECK((phi64.adjoint() * phi64 - ComplexMatrix::Identity(64, 64)).cwiseAbs().maxCoeff() <= 1e-12);
    }

    TEST_CASE("dft columns by direct summation")
    {
        const int n = 128;
        const ComplexMatrix phi = dft_matrix(n);
        SeededRng rng(11);
        for (int t = 0; t < 10; ++t) {
            const int i = static_cast<int>(rng.uniform_index(n));
            const int j = static_cast<int>(rng.uniform_index(n));
            // Grid φ_g = (2/N)(g − (N−1)/2) for 0-based g.
            const double pi_ = 2.0 / n * (i - (n - 1) / 2.0);
            const double pj = 2.0 / n * (j - (n - 1) / 2.0);
            Complex sum = 0.0;
            for (int m = 0; m < n; ++m) {
                sum += std::polar(1.0, kPi * m * (pj - pi_)) / static_cast<double>(n);
            }
            CHECK(std::abs(sum - (i == j ? 1.0 : 0.0)) < 1e-12);
            CHECK(std::abs(phi.col(i).dot(phi.col(j)) - sum) < 1e-12);
            CHECK(dft_grid_point(i, n) == doctest::Approx(pi_).epsilon(1e-15));
        }
    }

    TEST_CASE("fourier vector has unit norm")
    {
        for (double theta : {-0.9, 0.0, 0.123, 0.77}) {
            CHECK(fourier_vector(theta, 37).norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("product adjoint identity")
    {
        SeededRng rng(5);
        for (int t = 0; t < 5; ++t) {
            const int a = 1 + static_cast<int>(rng.uniform_index(9));
            const int b = 1 + static_cast<int>(rng.uniform_index(9));
            const int c = 1 + static_cast<int>(rng.uniform_index(9));
            ComplexMatrix A(a, b);
            ComplexMatrix B(b, c);
            for (Eigen::Index i = 0; i < A.size(); ++i) {
                A(i) = rng.complex_normal();
            }
            for (Eigen::Index i = 0; i < B.size(); ++i) {
                B(i) = rng.complex_normal();
            }
            const ComplexMatrix lhs = A * B;
            const ComplexMatrix rhs = (B.adjoint() * A.adjoint()).adjoint();
            CHECK((lhs - rhs).norm() <= 1e-12 * A.norm() * B.norm());
            CHECK((A.adjoint().adjoint() - A).norm() == 0.0);
        }
    }

    TEST_CASE("rng draws")
    {
        SeededRng rng(1);
        CHECK(rng.uniform(0.0, 0.0) == 0.0);
        CHECK(rng.uniform(2.5, 2.5) == 2.5);

        SeededRng poisson_rng(2);
        double sum = 0.0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            sum += poisson_rng.poisson(6.0);
        }
        CHECK(std::abs(sum / draws - 6.0) < 0.05);

        SeededRng normal_rng(3);
        double m1 = 0.0;
        double m2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double v = normal_rng.standard_normal();
            m1 += v;
            m2 += v * v;
        }
        CHECK(std::abs(m1 / draws) < 0.02);
        CHECK(std::abs(m2 / draws - 1.0) < 0.02);

        SeededRng sign_rng(4);
        for (int i = 0; i < 100; ++i) {
            const double s = sign_rng.sign();
            CHECK((s == 1.0 || s == -1.0));
        }
        CHECK_THROWS_AS(rng.poisson(-1.0), std::invalid_argument);
    }

    TEST_CASE("rng determinism and streams")
    {
        SeededRng a(42);
        SeededRng b(42);
        for (int i = 0; i < 100; ++i) {
            CHECK(a.standard_normal() == b.standard_normal());
        }
        CHECK(derive_seed(42, 1, 0) == derive_seed(42, 1, 0));
        CHECK(derive_seed(42, 1, 0) != derive_seed(42, 1, 1));
        CHECK(derive_seed(42, 1, 0) != derive_seed(42, 2, 0));
        CHECK(derive_seed(42, 1, 0) != derive_seed(43, 1, 0));

        SeededRng parent(9);
        const auto before = SeededRng(9).next_u64();
        const SeededRng child = parent.split(3);
        CHECK(parent.next_u64() == before);
        CHECK(child.seed() != parent.seed());
    }
}
