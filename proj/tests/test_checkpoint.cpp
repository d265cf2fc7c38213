#include <doctest.h>

#include <fstream>

#include "nearfield/binary_io.hpp"
#include "nearfield/jssanet/checkpoint.hpp"
#include "test_support.hpp"

using namespace nearfield;
using namespace nearfield::jssanet;
using nearfield::testing::TempDir;
using nearfield::testing::random_tensor;

TEST_SUITE("checkpoint")
{
    TEST_CASE("round trip preserves parameters, config and metadata")
    {
        TempDir dir("ckpt");
        auto cfg = ModelConfig::desk();
        cfg.use_dft = false;
        cfg.shared_conv1 = false;
        const Model<double> md(cfg, 4, false);
        save_checkpoint(dir.path() / "m.json", md, {77, 12});
        CHECK(std::filesystem::exists(dir.path() / "m.bin"));
        CheckpointMeta meta;
        const auto back = load_checkpoint<double>(dir.path() / "m.json", &meta);
        CHECK(back.config() == cfg);
        CHECK(back.values == md.values);
        CHECK(meta.seed == 77);
        CHECK(meta.epoch == 12);

        const Model<float> mf(ModelConfig::desk(), 5, false);
        save_checkpoint(dir.path() / "f.json", mf, {});
        const auto bf = load_checkpoint<float>(dir.path() / "f.json");
        CHECK(bf.values == mf.values);
        SeededRng rng(1);
        const auto x = random_tensor<float>(rng, 2, 16, 4);
        CHECK(forward(bf, x).values == forward(mf, x).values);
    }

    TEST_CASE("strict loading")
    {
        TempDir dir("ckpt_bad");
        const auto manifest = dir.path() / "m.json";
        const Model<double> m(ModelConfig::desk(), 6);
        save_checkpoint(manifest, m, {});
        const std::string good = read_text_file(manifest);

        CHECK_THROWS_AS(load_checkpoint<double>(dir.path() / "missing.json"), CheckpointError);

        auto with = [&](auto edit) {
            auto j = nlohmann::json::parse(good);
            edit(j);
            write_text_file(manifest, j.dump());
        };
        with([](auto& j) { j["config"]["unknown_knob"] = 1; });
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);
        with([](auto& j) { j["config"]["channels"] = 9; });
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);
        with([](auto& j) { j["format"] = "other"; });
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);
        with([](auto& j) { j["parameters"][0]["name"] = "renamed"; });
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);
        write_text_file(manifest, "{ not json");
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);

        write_text_file(manifest, good);
        CHECK_NOTHROW(load_checkpoint<double>(manifest));
        auto values = read_f64_file(dir.path() / "m.bin");
        values.pop_back();
        write_f64_file(dir.path() / "m.bin", values);
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);
        {
            std::ofstream odd(dir.path() / "m.bin", std::ios::binary | std::ios::app);
            odd << "abc";
        }
        CHECK_THROWS_AS(load_checkpoint<double>(manifest), CheckpointError);
    }

    TEST_CASE("model config JSON")
    {
        nlohmann::json j = ModelConfig::full();
        CHECK(j.at("channels") == 20);
        CHECK(j.get<ModelConfig>() == ModelConfig::full());
        const auto partial = nlohmann::json{{"blocks", 5}}.get<ModelConfig>();
        CHECK(partial.blocks == 5);
        CHECK(partial.channels == ModelConfig{}.channels);
    }
}
