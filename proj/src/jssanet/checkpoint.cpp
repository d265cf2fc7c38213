#include "nearfield/jssanet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <set>

#include "nearfield/binary_io.hpp"

namespace nearfield::jssanet {

namespace {

constexpr int kFormatVersion = 1;

const std::set<std::string>& config_keys()
{
    static const std::set<std::string> keys{"channels",       "blocks",         "partitions",    "dlkc_dw_kernel",
                                            "dlkc_dwd_kernel", "dlkc_dilation", "q_dw_kernel",   "ffn_dw_kernel",
                                            "conv_io_kernel", "use_dft",        "shared_conv1"};
    return keys;
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& c)
{
    j = nlohmann::json{{"channels", c.channels},
                       {"blocks", c.blocks},
                       {"partitions", c.partitions},
                       {"dlkc_dw_kernel", c.dlkc_dw_kernel},
                       {"dlkc_dwd_kernel", c.dlkc_dwd_kernel},
                       {"dlkc_dilation", c.dlkc_dilation},
                       {"q_dw_kernel", c.q_dw_kernel},
                       {"ffn_dw_kernel", c.ffn_dw_kernel},
                       {"conv_io_kernel", c.conv_io_kernel},
                       {"use_dft", c.use_dft},
                       {"shared_conv1", c.shared_conv1}};
}

void from_json(const nlohmann::json& j, ModelConfig& c)
{
    if (!j.is_object()) {
        throw std::invalid_argument("model config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!config_keys().count(key)) {
            throw std::invalid_argument("unknown model config key: " + key);
        }
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            j.at(key).get_to(field);
        }
    };
    get("channels", c.channels);
    get("blocks", c.blocks);
    get("partitions", c.partitions);
    get("dlkc_dw_kernel", c.dlkc_dw_kernel);
    get("dlkc_dwd_kernel", c.dlkc_dwd_kernel);
    get("dlkc_dilation", c.dlkc_dilation);
    get("q_dw_kernel", c.q_dw_kernel);
    get("ffn_dw_kernel", c.ffn_dw_kernel);
    get("conv_io_kernel", c.conv_io_kernel);
    get("use_dft", c.use_dft);
    get("shared_conv1", c.shared_conv1);
}

template <typename T>
void save_checkpoint(const std::filesystem::path& manifest, const Model<T>& model, const CheckpointMeta& meta)
{
    auto blob_path = manifest;
    blob_path.replace_extension(".bin");

    nlohmann::json params = nlohmann::json::array();
    for (const auto& e : model.layout.params.entries()) {
        params.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset}, {"size", e.size}});
    }
    nlohmann::json j{{"format", "nearfield-checkpoint"},
                     {"version", kFormatVersion},
                     {"config", model.config()},
                     {"seed", meta.seed},
                     {"epoch", meta.epoch},
                     {"parameter_count", model.values.size()},
                     {"blob", blob_path.filename().string()},
                     {"parameters", params}};

    std::vector<double> wide(model.values.begin(), model.values.end());
    try {
        write_f64_file(blob_path, wide);
        write_text_file(manifest, j.dump(2) + "\n");
    } catch (const std::exception& e) {
        throw CheckpointError(e.what());
    }
}

template <typename T>
Model<T> load_checkpoint(const std::filesystem::path& manifest, CheckpointMeta* meta)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(manifest));
    } catch (const std::exception& e) {
        throw CheckpointError("checkpoint manifest " + manifest.string() + ": " + e.what());
    }
    try {
        if (j.at("format") != "nearfield-checkpoint" || j.at("version").get<int>() != kFormatVersion) {
            throw CheckpointError("checkpoint: unsupported format");
        }
        Model<T> model;
        model.layout = build_layout(j.at("config").get<ModelConfig>());
        const auto& entries = model.layout.params.entries();
        const auto& stored = j.at("parameters");
        if (stored.size() != entries.size()) {
            throw CheckpointError("checkpoint: parameter table does not match the config");
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (stored[i].at("name").get<std::string>() != entries[i].name ||
                stored[i].at("shape").get<std::vector<int>>() != entries[i].shape ||
                stored[i].at("offset").get<std::size_t>() != entries[i].offset) {
                throw CheckpointError("checkpoint: parameter " + entries[i].name + " does not match the config");
            }
        }
        const auto blob = manifest.parent_path() / j.at("blob").get<std::string>();
        const std::vector<double> wide = read_f64_file(blob);
        if (wide.size() != model.layout.params.size()) {
            throw CheckpointError("checkpoint: blob holds " + std::to_string(wide.size()) + " values, expected " +
                                  std::to_string(model.layout.params.size()));
        }
        model.values.assign(wide.begin(), wide.end());
        if (meta) {
            meta->seed = j.at("seed").get<std::uint64_t>();
            meta->epoch = j.at("epoch").get<int>();
        }
        return model;
    } catch (const CheckpointError&) {
        throw;
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: ") + e.what());
    }
}

template void save_checkpoint(const std::filesystem::path&, const Model<float>&, const CheckpointMeta&);
template void save_checkpoint(const std::filesystem::path&, const Model<double>&, const CheckpointMeta&);
template Model<float> load_checkpoint(const std::filesystem::path&, CheckpointMeta*);
template Model<double> load_checkpoint(const std::filesystem::path&, CheckpointMeta*);

}  // namespace nearfield::jssanet
