#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nearfield/channel_model.hpp"
#include "nearfield/jssanet/checkpoint.hpp"
#include "nearfield/jssanet/train.hpp"

namespace nearfield {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Physical scenario as JSON. Element spacing is stored in wavelengths.
nlohmann::json system_to_json(const SystemConfig& s);
// Applies the keys present in j onto base; throws ConfigError on unknown keys.
SystemConfig system_from_json(const nlohmann::json& j, const SystemConfig& base);

struct DatasetSettings {
    int count = 2500;
    std::vector<double> snr_db{5.0};  // one train/test file pair per value
    double train_fraction = 0.8;  // 4:1 split by index
};

struct TheorySettings {
    std::vector<int> n_bs_list{128, 256, 512, 1024};
    std::vector<int> m_list{1, 2, 4, 8, 16};
    double similarity_theta = 0.25881904510252074;  // sin(π/12)
    double similarity_r = 15.0;
    int beam_n_bs = 256;
    double beam_phi_deg = 15.0;
    double beam_r = 20.0;
    std::vector<int> beam_m_list{2, 4};
};

struct EvalSettings {
    std::vector<std::string> estimators{"ls", "lmmse", "somp"};
    std::vector<double> snr_db{-10.0, -5.0, 0.0, 5.0, 10.0};
    std::vector<double> distance_edges;  // bin edges in m; empty = one bin over [r_min, max distance]
    int repetitions = 100;
    int stat_samples = 2000;           // realizations behind the oracle LMMSE statistics
    int somp_angle_oversampling = 2;
    int somp_rings = 6;
    int somp_max_atoms = 12;
    std::string jssanet_checkpoint;    // manifest paths for the network estimators
    std::string jsanet_checkpoint;
    bool timing = false;
};

struct AppConfig {
    std::string preset = "desk";
    std::uint64_t seed = 0;
    int threads = 0;
    std::string precision = "single";  // network arithmetic: single | double
    SystemConfig system;
    int n_rf = 4;
    int t_slots = 0;  // 0 = n_bs / n_rf (square combiner)
    DatasetSettings dataset;
    jssanet::ModelConfig model;
    jssanet::TrainSettings train;
    std::string network = "jssanet";  // jssanet | jsanet
    std::string data_dir;             // dataset location for train; empty = output directory
    double train_snr_db = 5.0;        // which generated SNR the network trains on
    TheorySettings theory;
    EvalSettings eval;

    int effective_t_slots() const { return t_slots > 0 ? t_slots : system.n_bs / n_rf; }
    // Throws ConfigError when values are inconsistent.
    void validate() const;
};

// Built-in defaults: "desk" (n_bs 64, K 8, C 8, B 2) or "full" (n_bs 256, K 32, C 20, B 3).
AppConfig preset_config(const std::string& name);

nlohmann::json config_to_json(const AppConfig& c);
// Strict: every key must exist in the defaults tree. Missing keys keep base values.
AppConfig config_from_json(const nlohmann::json& j, const AppConfig& base);

// Overrides "a.b=value": value parsed as JSON when possible, otherwise taken as a string.
nlohmann::json parse_override(const std::string& assignment);

// defaults(preset) ← file ← overrides. The preset is taken from the highest-precedence
// source that names one. Throws ConfigError.
AppConfig resolve_config(const nlohmann::json& file, const std::vector<std::string>& overrides);

// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace nearfield
