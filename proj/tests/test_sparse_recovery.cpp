#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nearfield/sparse_recovery.hpp"

using namespace nearfield;

namespace {

ComplexMatrix atom_channel(const PolarDictionary& dict, Eigen::Index atom, SeededRng& rng, int k)
{
    ComplexMatrix h(dict.atoms.rows(), k);
    for (int c = 0; c < k; ++c) {
        h.col(c) = rng.complex_normal() * dict.atoms.col(atom);
    }
    return h;
}

double nmse_db(const ComplexMatrix& h, const ComplexMatrix& est)
{
    return 10.0 * std::log10((h - est).squaredNorm() / h.squaredNorm());
}

}  // namespace

TEST_SUITE("sparse_recovery")
{
    TEST_CASE("dictionary layout")
    {
        const auto c = make_system_config(64, 8);
        const auto dict = build_polar_dictionary(c, 2, 3);
        CHECK(dict.size() > c.n_bs);
        CHECK(static_cast<Eigen::Index>(dict.grid.size()) == dict.size());
        for (Eigen::Index j = 0; j < dict.size(); ++j) {
            CHECK(std::abs(dict.atoms.col(j).norm() - 1.0) <= 1e-10);
        }
        std::set<double> rings;
        for (const auto& g : dict.grid) {
            rings.insert(g.r);
            CHECK(std::abs(g.theta) < 1.0);
        }
        // d_R = 10.24 m at this size: rings d_R and d_R/2 survive r_min = 5, d_R/3 does not.
        CHECK(rings.size() == 3);
        CHECK(rings.count(std::numeric_limits<double>::infinity()) == 1);
        CHECK(rings.count(c.max_distance()) == 1);
        CHECK_THROWS_AS(build_polar_dictionary(c, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(build_polar_dictionary(c, 1, 0), std::invalid_argument);
    }

    TEST_CASE("far-field-only dictionary is the oversampled steering set")
    {
        const auto c = make_system_config(32, 4);
        const int over = 2;
        const auto dict = build_polar_dictionary(c, over, 1, true);
        const int g_count = over * c.n_bs;
        REQUIRE(dict.size() == g_count);
        for (int g = 0; g < g_count; ++g) {
            const double theta = -1.0 + (2.0 * g + 1.0) / g_count;
            CHECK((dict.atoms.col(g) - far_field_arv(theta, c.n_bs)).norm() <= 1e-12);
        }
    }

    TEST_CASE("adjacent atoms on the innermost ring are distinguishable")
    {
        auto c = make_system_config(64, 8);
        c.r_min = 1.0;
        const auto dict = build_polar_dictionary(c, 2, 6);
        double inner = std::numeric_limits<double>::infinity();
        for (const auto& g : dict.grid) {
            inner = std::min(inner, g.r);
        }
        std::vector<Eigen::Index> ring;
        for (Eigen::Index j = 0; j < dict.size(); ++j) {
            if (dict.grid[j].r == inner) {
                ring.push_back(j);
            }
        }
        std::sort(ring.begin(), ring.end(), [&](auto a, auto b) { return dict.grid[a].theta < dict.grid[b].theta; });
        REQUIRE(ring.size() == 128);
        double worst = 0.0;
        for (std::size_t i = 1; i < ring.size(); ++i) {
            worst = std::max(worst, std::abs(dict.atoms.col(ring[i - 1]).dot(dict.atoms.col(ring[i]))));
        }
        CHECK(worst < 0.999);
    }

    TEST_CASE("noiseless single atom is recovered in one step")
    {
        const auto c = make_system_config(64, 8);
        const auto dict = build_polar_dictionary(c, 2, 6);
        SeededRng rng(1);
        for (Eigen::Index atom : {Eigen::Index{3}, Eigen::Index{70}, dict.size() - 5}) {
            const auto h = atom_channel(dict, atom, rng, c.k_sub);
            SompOptions opts;
            opts.max_atoms = 1;
            const auto res = somp(h, dict, opts);
            REQUIRE(res.support.size() == 1);
            CHECK(res.support[0] == atom);
            CHECK(nmse_db(h, res.H_hat) <= -80.0);
        }
    }

    TEST_CASE("two separated atoms are both selected")
    {
        const auto c = make_system_config(64, 8);
        const auto dict = build_polar_dictionary(c, 2, 6);
        SeededRng rng(2);
        const Eigen::Index a = 20;
        const Eigen::Index b = dict.size() - 30;
        REQUIRE(std::abs(dict.grid[a].theta - dict.grid[b].theta) > 0.3);
        const ComplexMatrix h = atom_channel(dict, a, rng, c.k_sub) + atom_channel(dict, b, rng, c.k_sub);

        // Brute-force first pick: the atom with the largest Σ_k |aᴴ h_k|².
        Eigen::Index brute = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < dict.size(); ++j) {
            double score = 0.0;
            for (int k = 0; k < c.k_sub; ++k) {
                score += std::norm(dict.atoms.col(j).dot(h.col(k)));
            }
            if (score > best) {
                best = score;
                brute = j;
            }
        }
        SompOptions opts;
        opts.max_atoms = 2;
        const auto res = somp(h, dict, opts);
        REQUIRE(res.support.size() == 2);
        CHECK(res.support[0] == brute);
        CHECK(std::set<Eigen::Index>(res.support.begin(), res.support.end()) == std::set<Eigen::Index>{a, b});
        CHECK(nmse_db(h, res.H_hat) <= -80.0);
    }

    TEST_CASE("zero input")
    {
        const auto c = make_system_config(32, 4);
        const auto dict = build_polar_dictionary(c, 1, 1);
        const auto res = somp(ComplexMatrix::Zero(c.n_bs, c.k_sub), dict, {});
        CHECK(res.support.empty());
        CHECK(res.H_hat.norm() == 0.0);
        CHECK(res.residual_norm == 0.0);
    }

    TEST_CASE("residual monotone and orthogonal to the support")
    {
        const auto c = make_system_config(64, 8);
        const auto dict = build_polar_dictionary(c, 2, 6);
        SeededRng rng(3);
        const auto h = sample_realization(rng, c).H;
        SompOptions opts;
        opts.max_atoms = 12;
        for (int steps = 1; steps <= opts.max_atoms; ++steps) {
            SompOptions partial;
            partial.max_atoms = steps;
            const auto res = somp(h, dict, partial);
            const ComplexMatrix residual = h - res.H_hat;
            CHECK(std::abs(residual.norm() - res.residual_norm) <= 1e-9 * h.norm());
            for (auto j : res.support) {
                CHECK((dict.atoms.col(j).adjoint() * residual).norm() <= 1e-8 * h.norm());
            }
        }
        const auto full = somp(h, dict, opts);
        CHECK(full.residual_history.size() == full.support.size() + 1);
        for (std::size_t i = 1; i < full.residual_history.size(); ++i) {
            CHECK(full.residual_history[i] <= full.residual_history[i - 1] + 1e-12);
        }
        std::set<Eigen::Index> unique(full.support.begin(), full.support.end());
        CHECK(unique.size() == full.support.size());

        ComplexMatrix rebuilt = ComplexMatrix::Zero(c.n_bs, c.k_sub);
        for (std::size_t i = 0; i < full.support.size(); ++i) {
            rebuilt += dict.atoms.col(full.support[i]) * full.coeffs.row(static_cast<Eigen::Index>(i));
        }
        CHECK((rebuilt - full.H_hat).norm() <= 1e-12 * h.norm());

        const auto again = somp(h, dict, opts);
        CHECK(again.support == full.support);
        CHECK((again.H_hat.array() == full.H_hat.array()).all());
    }

    TEST_CASE("relative residual tolerance stops early")
    {
        const auto c = make_system_config(64, 8);
        const auto dict = build_polar_dictionary(c, 2, 6);
        SeededRng rng(4);
        const auto h = atom_channel(dict, 11, rng, c.k_sub);
        SompOptions opts;
        opts.max_atoms = 10;
        opts.residual_tol = 1e-6;
        const auto res = somp(h, dict, opts);
        CHECK(res.support.size() == 1);
    }

    TEST_CASE("ties break toward the lowest index")
    {
        PolarDictionary dict;
        dict.atoms = ComplexMatrix::Zero(2, 3);
        dict.atoms(0, 0) = 1.0;
        dict.atoms(0, 1) = 1.0;  // duplicate of atom 0
        dict.atoms(1, 2) = 1.0;
        dict.grid.resize(3);
        ComplexMatrix h(2, 1);
        h << 1.0, 0.5;
        SompOptions opts;
        opts.max_atoms = 1;
        CHECK(somp(h, dict, opts).support.front() == 0);
        opts.max_atoms = 4;
        CHECK_THROWS_AS(somp(h, dict, opts), std::invalid_argument);
    }

    TEST_CASE("measurement-domain SOMP")
    {
        const auto c = make_system_config(64, 8);
        const auto dict = build_polar_dictionary(c, 2, 6);
        SeededRng rng(5);
        const auto comb = make_combiner(rng, 16, 4, c.n_bs);
        const Eigen::Index atom = 101;
        const auto h = atom_channel(dict, atom, rng, c.k_sub);
        const ComplexMatrix Y = comb.W.adjoint() * h;
        SompOptions opts;
        opts.max_atoms = 1;
        const auto res = somp_measurements(Y, comb, dict, opts);
        REQUIRE(res.support.size() == 1);
        CHECK(res.support[0] == atom);
        CHECK(nmse_db(h, res.H_hat) <= -80.0);
    }
}
