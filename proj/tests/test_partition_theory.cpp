#include <doctest.h>

#include <cmath>
#include <string>

#include "nearfield/partition_theory.hpp"

using namespace nearfield;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Tensor3<double> random_tensor(SeededRng& rng, int n_bs, int k)
{
    Tensor3<double> t(2, n_bs, k);
    for (auto& v : t.values) {
        v = rng.standard_normal();
    }
    return t;
}

double norm(const Tensor3<double>& t)
{
    double s = 0.0;
    for (double v : t.values) {
        s += v * v;
    }
    return std::sqrt(s);
}

double diff_norm(const Tensor3<double>& a, const Tensor3<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        s += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    }
    return std::sqrt(s);
}

}  // namespace

TEST_SUITE("partition_theory")
{
    TEST_CASE("partition plan")
    {
        const auto plan = make_partition(256, 4);
        CHECK(plan.M == 4);
        CHECK(plan.N == 64);
        CHECK(plan.n_bs() == 256);
        REQUIRE(plan.ref_indices.size() == 4);
        CHECK(plan.ref_indices[0] == 31);
        CHECK(plan.ref_indices[3] == 223);
        for (int i = 0; i < plan.M; ++i) {
            CHECK(plan.ref_indices[i] >= plan.first(i));
            CHECK(plan.ref_indices[i] < plan.first(i) + plan.N);
        }
        const auto single = make_partition(256, 1);
        CHECK(single.ref_indices[0] == 127);  // the array reference element n_bs/2 − 1
        const auto full = make_partition(8, 8);
        for (int i = 0; i < 8; ++i) {
            CHECK(full.ref_indices[i] == i);
        }
        CHECK_THROWS_AS(make_partition(256, 3), std::invalid_argument);
        CHECK_THROWS_AS(make_partition(256, 0), std::invalid_argument);
    }

    TEST_CASE("piecewise parameters")
    {
        const auto c = make_system_config(256, 8);
        const double theta0 = 0.37;
        const auto one = piecewise_params(theta0, 12.0, make_partition(256, 1), c);
        CHECK(one.theta_tilde[0] == doctest::Approx(theta0).epsilon(1e-14));
        CHECK(std::abs(one.p_tilde[0]) < 1e-12);
        CHECK(one.r_tilde[0] == doctest::Approx(12.0).epsilon(1e-14));

        const auto far = piecewise_params(theta0, 1e9, make_partition(256, 8), c);
        for (double t : far.theta_tilde) {
            CHECK(std::abs(t - theta0) <= 1e-6);
        }

        // First-order Taylor oracle: θ̃₁ − θ̃₂ ≈ (1 − θ0²)·d·N / r0.
        const double t15 = std::sin(15.0 * kPi / 180.0);
        const auto two = piecewise_params(t15, 20.0, make_partition(256, 2), c);
        const double taylor = (1.0 - t15 * t15) / 20.0 * c.d * 128;
        const double got = two.theta_tilde[0] - two.theta_tilde[1];
        CHECK(std::abs(got - taylor) <= 0.02 * taylor);
        for (double t : two.theta_tilde) {
            CHECK(std::abs(t) < 1.0);
        }
        CHECK(two.p_tilde.size() == 2);
        CHECK(two.r_tilde.size() == 2);
        CHECK_THROWS_AS(piecewise_params(t15, 20.0, make_partition(128, 2), c), std::invalid_argument);
    }

    TEST_CASE("piecewise response")
    {
        const auto c = make_system_config(256, 8);
        SeededRng rng(1);
        for (int t = 0; t < 10; ++t) {
            const double theta = rng.uniform(-0.85, 0.85);
            const double r = rng.uniform(5.0, 160.0);
            for (int m : {1, 2, 4, 16}) {
                CHECK(std::abs(piecewise_arv(theta, r, make_partition(256, m), c).norm() - 1.0) <= 1e-12);
            }
            const auto full = piecewise_arv(theta, r, make_partition(256, 256), c);
            CHECK(std::abs(full.dot(near_field_arv(theta, r, c))) >= 1.0 - 1e-6);
        }
        const double dr = rayleigh_distance(c);
        for (double theta : {-0.7, 0.0, 0.5}) {
            const auto b = piecewise_arv(theta, 10.0 * dr, make_partition(256, 1), c);
            CHECK(std::abs(b.dot(near_field_arv(theta, 10.0 * dr, c))) >= 0.999);
        }
    }

    TEST_CASE("similarity sweep")
    {
        const auto c = make_system_config(512, 8);
        const double theta0 = std::sin(kPi / 12.0);
        double previous = 0.0;
        for (int m : {1, 2, 4, 8, 16}) {
            const double s = std::abs(similarity(theta0, 15.0, m, c));
            CAPTURE(m);
            CHECK(s >= previous);
            CHECK(s <= 1.0 + 1e-9);
            previous = s;
        }
        CHECK(std::abs(similarity(theta0, 15.0, 4, c)) >= kInvSqrt2);
        CHECK(std::abs(similarity(theta0, 15.0, 512, c)) >= 1.0 - 1e-4);
    }

    TEST_CASE("fresnel similarity agrees with direct summation")
    {
        const auto c = make_system_config(512, 8);
        const double theta0 = std::sin(kPi / 12.0);
        for (int m : {2, 4, 8}) {
            const double direct = std::abs(similarity(theta0, 15.0, m, c, SimilarityMode::direct));
            const double fres = std::abs(similarity(theta0, 15.0, m, c, SimilarityMode::fresnel));
            CAPTURE(m);
            CHECK(std::abs(direct - fres) <= 0.05);
        }
    }

    TEST_CASE("similarity never exceeds one")
    {
        SeededRng rng(2);
        for (int n_bs : {64, 256}) {
            const auto c = make_system_config(n_bs, 8);
            for (int t = 0; t < 20; ++t) {
                const double theta = rng.uniform(-0.9, 0.9);
                const double r = rng.uniform(1.0, 200.0);
                for (int m : {1, 2, 8, n_bs}) {
                    CHECK(std::abs(similarity(theta, r, m, c)) <= 1.0 + 1e-9);
                    CHECK(std::abs(similarity(theta, r, m, c, SimilarityMode::fresnel)) <= 1.0 + 1e-9);
                }
            }
        }
    }

    TEST_CASE("theorem 1 lower bound")
    {
        CHECK(theorem1_min_m(make_system_config(256, 8)) == 2);
        CHECK(theorem1_min_m(make_system_config(512, 8)) == 3);
        CHECK(theorem1_min_m(make_system_config(1024, 8)) == 6);
        CHECK(theorem1_bound(make_system_config(256, 8)) == doctest::Approx(1.4311).epsilon(1e-4));
        auto bad = make_system_config(256, 8);
        bad.r_min = 0.0;
        CHECK_THROWS_AS(theorem1_min_m(bad), std::invalid_argument);
    }

    TEST_CASE("theorem 2 upper bound")
    {
        const double sec = std::sin(kPi / 3.0);
        CHECK(theorem2_max_m(make_system_config(256, 8), sec) == 2);
        CHECK(theorem2_max_m(make_system_config(512, 8), sec) == 4);
        CHECK(theorem2_bound(make_system_config(256, 8), sec) == doctest::Approx(2.0239).epsilon(1e-4));
        auto unit = make_system_config(256, 8);
        unit.r_min = unit.d / 2.0;
        CHECK(theorem2_max_m(unit, 0.0) == 256);
        CHECK_THROWS_AS(theorem2_max_m(unit, 1.0), std::invalid_argument);
    }

    TEST_CASE("bound consistency diagnostic")
    {
        const double sec = std::sin(kPi / 3.0);
        for (int n_bs : {128, 256, 512, 1024}) {
            const auto c = make_system_config(n_bs, 8);
            const int lo = theorem1_min_m(c);
            const int hi = theorem2_max_m(c, sec);
            MESSAGE("n_bs " << n_bs << ": min-M " << lo << ", max-M " << hi << (lo <= hi ? std::string() : std::string(" (infeasible)")));
            CHECK(lo >= 1);
            CHECK(hi >= 0);
        }
    }

    TEST_CASE("piecewise fidelity at the minimum partition")
    {
        // The bound only makes the Fresnel coefficient reach 1/√2; since C² + S² < 1 the
        // similarity itself can fall short. Oracle: Σ_i max_θ |b(θ)ᴴ a_i| / √M over each
        // subarray block, an upper bound for any piecewise Fourier vector.
        const auto c = make_system_config(256, 8);
        const int m = smallest_divisor_at_least(c.n_bs, theorem1_min_m(c));
        CHECK(m == 2);
        auto best_piecewise = [&](double theta, int parts) {
            const ComplexVector a = near_field_arv(theta, c.r_min, c);
            const int n = c.n_bs / parts;
            double total = 0.0;
            for (int i = 0; i < parts; ++i) {
                const ComplexVector seg = a.segment(i * n, n);
                auto score = [&](double t) { return std::abs(fourier_vector(t, n).dot(seg)); };
                double arg = -1.0, top = 0.0;
                for (int g = 0; g <= 4000; ++g) {
                    const double t = -1.0 + g / 2000.0;
                    if (score(t) > top) {
                        top = score(t);
                        arg = t;
                    }
                }
                for (int g = -200; g <= 200; ++g) {
                    top = std::max(top, score(arg + g * 2.5e-6));
                }
                total += top;
            }
            return total / std::sqrt(static_cast<double>(parts));
        };
        const double edge = std::sin(c.phi_max);
        int short_of_threshold = 0;
        for (int g = 0; g < 20; ++g) {
            const double theta = -edge + (2.0 * edge) * (g + 0.5) / 20.0;
            CAPTURE(theta);
            const double s = std::abs(similarity(theta, c.r_min, m, c));
            const double bound = best_piecewise(theta, m);
            CHECK(s <= bound + 1e-9);
            CHECK(s >= bound - 1e-3);
            if (s < kInvSqrt2) {
                ++short_of_threshold;
                // Shortfalls only where no piecewise Fourier vector clears the threshold.
                CHECK(bound < kInvSqrt2 + 1e-3);
            }
            // The next admissible partition always clears it.
            CHECK(std::abs(similarity(theta, c.r_min, 4, c)) >= kInvSqrt2);
        }
        MESSAGE("min-M grid points below 1/sqrt(2) at r_min: " << short_of_threshold << " of 20");
    }

    TEST_CASE("angular diversity at the maximum partition")
    {
        const auto c = make_system_config(256, 8);
        const double sec = std::sin(c.phi_max);
        const int m = theorem2_max_m(c, sec);
        REQUIRE(m == 2);
        const auto plan = make_partition(c.n_bs, m);
        for (int g = 0; g < 20; ++g) {
            const double theta = -sec + (2.0 * sec) * (g + 0.5) / 20.0;
            const auto params = piecewise_params(theta, c.r_min, plan, c);
            for (int i = 1; i < m; ++i) {
                CAPTURE(theta);
                CHECK(std::abs(params.theta_tilde[i - 1] - params.theta_tilde[i]) >= 2.0 / plan.N);
            }
        }
    }

    TEST_CASE("smallest divisor")
    {
        CHECK(smallest_divisor_at_least(512, 3) == 4);
        CHECK(smallest_divisor_at_least(1024, 6) == 8);
        CHECK(smallest_divisor_at_least(256, 2) == 2);
        CHECK(smallest_divisor_at_least(7, 2) == 7);
    }

    TEST_CASE("beam pattern on the grid")
    {
        const int n = 64;
        for (int g : {0, 17, 63}) {
            const auto bp = beam_pattern(dft_grid_point(g, n), n);
            REQUIRE(bp.values.size() == static_cast<std::size_t>(n));
            CHECK(bp.argmax == g);
            CHECK(std::abs(bp.values[g] - 1.0) <= 1e-12);
            for (int j = 0; j < n; ++j) {
                if (j != g) {
                    CHECK(std::abs(bp.values[j]) <= 1e-10);
                }
            }
        }
        CHECK_THROWS_AS(beam_pattern(1.0, 8), std::domain_error);
    }

    TEST_CASE("beam pattern matches the angular-domain magnitude")
    {
        const int n = 32;
        const ComplexMatrix phi = dft_matrix(n);
        for (double theta : {-0.61, 0.013, 0.5}) {
            const ComplexVector c = phi.adjoint() * fourier_vector(theta, n);
            const auto bp = beam_pattern(theta, n);
            for (int j = 0; j < n; ++j) {
                CHECK(std::abs(std::abs(c(j)) - std::abs(bp.values[j])) <= 1e-12);
                CHECK(bp.power[j] == doctest::Approx(bp.values[j] * bp.values[j]));
            }
        }
    }

    TEST_CASE("dominant beams of the two- and four-way partitions")
    {
        const auto c = make_system_config(256, 8);
        const double theta0 = std::sin(15.0 * kPi / 180.0);
        auto argmaxes = [&](int m) {
            const auto plan = make_partition(c.n_bs, m);
            const auto params = piecewise_params(theta0, 20.0, plan, c);
            std::vector<int> out;
            for (double t : params.theta_tilde) {
                out.push_back(beam_pattern(t, plan.N).argmax);
            }
            return out;
        };
        const auto two = argmaxes(2);
        CHECK(std::abs(two[0] - two[1]) == 1);
        const auto four = argmaxes(4);
        CHECK(four[0] == four[1]);
        // Unmirrored geometry, 0-based columns.
        CHECK(two == std::vector<int>{81, 80});
        CHECK(four == std::vector<int>{40, 40, 40, 39});
    }

    TEST_CASE("subchannel DFT round trip and norm")
    {
        SeededRng rng(3);
        for (int m : {1, 2, 4}) {
            const auto plan = make_partition(64, m);
            for (int t = 0; t < 5; ++t) {
                const auto x = random_tensor(rng, 64, 8);
                const auto f = dft_subchannels(x, plan);
                CHECK(std::abs(norm(f) - norm(x)) <= 1e-10 * norm(x));
                CHECK(diff_norm(idft_subchannels(f, plan), x) <= 1e-10 * norm(x));
                CHECK(diff_norm(dft_subchannels(idft_subchannels(x, plan), plan), x) <= 1e-10 * norm(x));
            }
        }
        const auto plan = make_partition(64, 2);
        CHECK_THROWS_AS(dft_subchannels(Tensor3<double>(2, 32, 4), plan), std::invalid_argument);
        CHECK_THROWS_AS(dft_subchannels(Tensor3<double>(3, 64, 4), plan), std::invalid_argument);
    }

    TEST_CASE("on-grid subchannels map to one-hot blocks")
    {
        const auto plan = make_partition(64, 4);
        const int k = 3;
        const std::vector<int> picks{2, 9, 9, 15};
        ComplexMatrix h(64, k);
        for (int i = 0; i < plan.M; ++i) {
            const ComplexVector b = fourier_vector(dft_grid_point(picks[i], plan.N), plan.N);
            for (int col = 0; col < k; ++col) {
                h.block(plan.first(i), col, plan.N, 1) = b * Complex(1.0 + col, -0.5 * i);
            }
        }
        const auto f = from_tensor(dft_subchannels(to_tensor<double>(h), plan));
        for (int i = 0; i < plan.M; ++i) {
            for (int row = 0; row < plan.N; ++row) {
                for (int col = 0; col < k; ++col) {
                    const Complex v = f(plan.first(i) + row, col);
                    if (row == picks[i]) {
                        CHECK(std::abs(v - Complex(1.0 + col, -0.5 * i)) <= 1e-12);
                    } else {
                        CHECK(std::abs(v) <= 1e-12);
                    }
                }
            }
        }
    }

    TEST_CASE("blockwise transform equals per-subchannel DFT")
    {
        SeededRng rng(4);
        const auto plan = make_partition(128, 4);
        const ComplexMatrix phi = dft_matrix(plan.N);
        ComplexMatrix h(128, 5);
        for (Eigen::Index i = 0; i < h.size(); ++i) {
            h(i) = rng.complex_normal();
        }
        const auto f = from_tensor(dft_subchannels(to_tensor<double>(h), plan));
        for (int i = 0; i < plan.M; ++i) {
            const ComplexMatrix expected = phi.adjoint() * h.middleRows(plan.first(i), plan.N);
            CHECK((f.middleRows(plan.first(i), plan.N) - expected).cwiseAbs().maxCoeff() <= 1e-12);
        }
        const auto back = from_tensor(idft_subchannels(to_tensor<double>(f), plan));
        CHECK((back - h).norm() <= 1e-10 * h.norm());
    }

    TEST_CASE("transform matrices are unitary")
    {
        for (int n : {16, 64, 128}) {
            const ComplexMatrix phi = dft_matrix(n);
            CHECK((phi.adjoint() * phi - ComplexMatrix::Identity(n, n)).norm() <= 1e-10);
        }
        const SubchannelTransform<float> single(16);
        CHECK(single.N() == 16);
        CHECK_THROWS_AS(SubchannelTransform<double>(0), std::invalid_argument);
    }
}
