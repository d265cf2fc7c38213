#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nearfield/channel_model.hpp"
#include "nearfield/jssanet/train.hpp"
#include "nearfield/measurement.hpp"

namespace nearfield {

struct GeneratorParams {
    SystemConfig system;
    int t_slots = 16;
    int n_rf = 4;
    double snr_db = 5.0;
    std::uint64_t seed = 0;
};

struct DatasetRecord {
    ComplexMatrix h_ls;  // n_bs × K
    ComplexMatrix h;
};

struct Dataset {
    int version = 1;
    int n_bs = 0;
    int k_sub = 0;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    nlohmann::json generator_params;
    std::vector<DatasetRecord> records;
};

// Stream tags under the root seed.
inline constexpr std::uint64_t kStreamCombiner = 1;
inline constexpr std::uint64_t kStreamChannel = 2;
inline constexpr std::uint64_t kStreamNoise = 3;

// Realizations [first, first + count) of the stream defined by params. Realization i
// uses channel/noise streams derived from (seed, i), so any index range reproduces the
// same records. All realizations share one combiner drawn from the combiner stream.
Dataset generate_dataset(const GeneratorParams& params, std::size_t first, std::size_t count, int threads = 0);

// File layout: u64 LE header length, JSON header {version, n_bs, k_sub, count, snr_db,
// seed, generator_params}, then per record the row-major blocks H_ls.re, H_ls.im, H.re,
// H.im as little-endian binary64. Throws IoError.
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

// "train_snr5dB.bin" / "test_snr-10dB.bin".
std::string dataset_file_name(const std::string& split, double snr_db);

template <typename T>
jssanet::SampleSet<T> to_samples(const Dataset& data);

}  // namespace nearfield
