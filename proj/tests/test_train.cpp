#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nearfield/jssanet/train.hpp"
#include "nearfield/numerics.hpp"
#include "test_support.hpp"

using namespace nearfield;
using namespace nearfield::jssanet;
using nearfield::testing::random_tensor;

namespace {

ModelConfig toy_config()
{
    ModelConfig c;
    c.channels = 4;
    c.blocks = 1;
    c.partitions = 2;
    c.dlkc_dw_kernel = 3;
    c.dlkc_dwd_kernel = 3;
    c.dlkc_dilation = 2;
    c.q_dw_kernel = 3;
    c.ffn_dw_kernel = 3;
    c.conv_io_kernel = 3;
    return c;
}

template <typename T>
SampleSet<T> random_set(std::uint64_t seed, std::size_t count, int n = 16, int k = 4)
{
    SeededRng rng(seed);
    SampleSet<T> s;
    for (std::size_t i = 0; i < count; ++i) {
        auto target = random_tensor<T>(rng, 2, n, k);
        auto input = target;
        for (auto& v : input.values) {
            v += static_cast<T>(0.3 * rng.standard_normal());
        }
        s.inputs.push_back(std::move(input));
        s.targets.push_back(std::move(target));
    }
    return s;
}

}  // namespace

TEST_SUITE("train")
{
    TEST_CASE("learning-rate schedule")
    {
        const double g0 = 3e-3;
        CHECK(learning_rate(1, 30, g0) == doctest::Approx(g0 / 5));
        CHECK(learning_rate(2, 30, g0) == doctest::Approx(g0 / 4));
        CHECK(learning_rate(4, 30, g0) == doctest::Approx(g0 / 2));
        CHECK(learning_rate(5, 30, g0) == doctest::Approx(g0));
        // Cosine phase, γ0/2·(1 + cos((s-5)π/(S-4))).
        CHECK(learning_rate(6, 30, g0) == doctest::Approx(0.5 * g0 * (1 + std::cos(kPi / 26))));
        CHECK(learning_rate(18, 30, g0) == doctest::Approx(0.5 * g0));
        CHECK(learning_rate(30, 30, g0) == doctest::Approx(0.5 * g0 * (1 + std::cos(25 * kPi / 26))));
        CHECK(learning_rate(30, 30, g0) > 0.0);
        double prev = learning_rate(5, 30, g0);
        for (int s = 6; s <= 30; ++s) {
            const double lr = learning_rate(s, 30, g0);
            CHECK(lr < prev);
            prev = lr;
        }
        CHECK_THROWS_AS(learning_rate(0, 30, g0), std::invalid_argument);
        CHECK_THROWS_AS(learning_rate(1, 0, g0), std::invalid_argument);
    }

    TEST_CASE("AdamW update rule")
    {
        TrainSettings s;
        s.weight_decay = 0.1;
        AdamW<double> opt(3, s);
        std::vector<double> theta{1.0, -2.0, 0.5};
        const std::vector<double> grad{0.4, -0.1, 0.0};
        const double lr = 0.01;
        opt.step(theta, grad, lr);
        // First step: m̂ = g, v̂ = g², so the Adam direction is g/(|g| + ε).
        const std::vector<double> start{1.0, -2.0, 0.5};
        for (int i = 0; i < 3; ++i) {
            const double dir = grad[i] / (std::abs(grad[i]) + s.eps);
            CHECK(theta[i] == doctest::Approx(start[i] - lr * (dir + s.weight_decay * start[i])).epsilon(1e-12));
        }
        CHECK(opt.steps() == 1);

        AdamW<double> decay_only(1, s);
        std::vector<double> p{2.0};
        for (int i = 0; i < 3; ++i) {
            decay_only.step(p, {0.0}, lr);
        }
        CHECK(p[0] == doctest::Approx(2.0 * std::pow(1 - lr * s.weight_decay, 3)).epsilon(1e-12));
        CHECK_THROWS_AS(decay_only.step(p, {0.0, 1.0}, lr), std::invalid_argument);
    }

    TEST_CASE("batch gradient is the mean of per-sample gradients")
    {
        const Model<double> m(toy_config(), 1, false);
        const auto data = random_set<double>(2, 5);
        std::vector<std::size_t> order{4, 1, 3};
        std::vector<double> grads;
        const double loss = batch_gradient(m, data, order, 0, 3, grads, 1);
        std::vector<double> expect(m.values.size(), 0.0);
        double expect_loss = 0.0;
        for (auto i : order) {
            std::vector<double> g(m.values.size(), 0.0);
            expect_loss += sample_loss(m, data.inputs[i], data.targets[i], g.data()) / 3.0;
            for (std::size_t j = 0; j < g.size(); ++j) {
                expect[j] += g[j] / 3.0;
            }
        }
        CHECK(loss == doctest::Approx(expect_loss).epsilon(1e-12));
        REQUIRE(grads.size() == expect.size());
        for (std::size_t j = 0; j < grads.size(); ++j) {
            CHECK(grads[j] == doctest::Approx(expect[j]).epsilon(1e-9).scale(1e-9));
        }
        CHECK(evaluate_loss(m, data, 1) ==
              doctest::Approx(std::accumulate(data.inputs.begin(), data.inputs.end(), 0.0,
                                              [&, i = 0](double acc, const auto& x) mutable {
                                                  return acc + sample_loss(m, x, data.targets[i++]);
                                              }) /
                              5.0));
    }

    TEST_CASE("a single sample is memorised")
    {
        Model<double> m(toy_config(), 3);
        const auto data = random_set<double>(4, 1);
        TrainSettings s;
        s.weight_decay = 0.0;
        AdamW<double> opt(m.values.size(), s);
        const std::vector<std::size_t> order{0};
        std::vector<double> grads;
        const double initial = evaluate_loss(m, data, 1);
        double loss = initial;
        int steps = 0;
        for (; steps < 500 && loss >= 1e-3 * initial; ++steps) {
            batch_gradient(m, data, order, 0, 1, grads, 1);
            opt.step(m.values, grads, 1e-2);
            loss = evaluate_loss(m, data, 1);
        }
        MESSAGE("overfit: " << initial << " -> " << loss << " after " << steps << " steps");
        CHECK(loss < 1e-3 * initial);
    }

    TEST_CASE("training is deterministic and independent of the thread count")
    {
        const auto train_set = random_set<float>(5, 12);
        const auto test_set = random_set<float>(6, 4);
        TrainSettings s;
        s.epochs = 3;
        s.batch_size = 4;
        s.seed = 9;
        std::vector<std::vector<EpochRecord>> histories;
        std::vector<std::vector<float>> params;
        for (int threads : {1, 1, 3}) {
            Model<float> m(toy_config(), 7);
            s.threads = threads;
            int calls = 0;
            histories.push_back(train(m, train_set, test_set, s, [&](const EpochRecord&) { ++calls; }));
            params.push_back(m.values);
            CHECK(calls == 3);
        }
        for (std::size_t r = 1; r < histories.size(); ++r) {
            REQUIRE(histories[r].size() == histories[0].size());
            for (std::size_t e = 0; e < histories[0].size(); ++e) {
                CHECK(histories[r][e].train_loss == histories[0][e].train_loss);
                CHECK(histories[r][e].test_loss == histories[0][e].test_loss);
                CHECK(histories[r][e].lr == histories[0][e].lr);
            }
            CHECK(params[r] == params[0]);
        }
        CHECK(histories[0].back().epoch == 3);
        CHECK(histories[0].back().test_loss < histories[0].front().test_loss);
    }

    TEST_CASE("training rejects empty data and reports divergence")
    {
        Model<double> m(toy_config(), 8);
        TrainSettings s;
        s.epochs = 4;
        s.batch_size = 2;
        CHECK_THROWS_AS(train(m, SampleSet<double>{}, random_set<double>(1, 2), s), std::invalid_argument);

        s.lr0 = 1e200;
        bool thrown = false;
        try {
            train(m, random_set<double>(2, 4), random_set<double>(3, 2), s);
        } catch (const DivergenceError& e) {
            thrown = true;
            CHECK(e.history().size() < 4);
        }
        CHECK(thrown);
    }
}
