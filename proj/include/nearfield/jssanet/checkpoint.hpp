#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "nearfield/jssanet/model.hpp"

namespace nearfield::jssanet {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unknown keys are rejected; missing keys keep their defaults.
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct CheckpointMeta {
    std::uint64_t seed = 0;
    int epoch = 0;
};

// Writes <stem>.json (manifest: format, config, seed, epoch, parameter names/shapes/offsets)
// and <stem>.bin (all parameters as little-endian binary64 in manifest order).
template <typename T>
void save_checkpoint(const std::filesystem::path& manifest, const Model<T>& model, const CheckpointMeta& meta);

// Throws CheckpointError on I/O failure, a malformed manifest, or a blob whose size or
// parameter table disagrees with the layout rebuilt from the stored config.
template <typename T>
Model<T> load_checkpoint(const std::filesystem::path& manifest, CheckpointMeta* meta = nullptr);

}  // namespace nearfield::jssanet
