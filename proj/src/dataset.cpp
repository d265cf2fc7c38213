#include "nearfield/dataset.hpp"

#include <cstdio>

#include "nearfield/binary_io.hpp"
#include "nearfield/config.hpp"
#include "nearfield/parallel.hpp"
#include "nearfield/partition_theory.hpp"

namespace nearfield {

using nlohmann::json;

namespace {

constexpr int kDatasetVersion = 1;

json generator_json(const GeneratorParams& p)
{
    return json{{"system", system_to_json(p.system)}, {"t_slots", p.t_slots}, {"n_rf", p.n_rf}};
}

void append_matrix(std::string& buf, const ComplexMatrix& m, bool imag)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            append_f64_le(buf, imag ? m(r, c).imag() : m(r, c).real());
        }
    }
}

}  // namespace

Dataset generate_dataset(const GeneratorParams& params, std::size_t first, std::size_t count, int threads)
{
    params.system.validate();
    SeededRng combiner_rng(derive_seed(params.seed, kStreamCombiner));
    const CombinerSpec combiner = make_combiner(combiner_rng, params.t_slots, params.n_rf, params.system.n_bs);
    const LeastSquaresEstimator ls(combiner);

    Dataset out;
    out.version = kDatasetVersion;
    out.n_bs = params.system.n_bs;
    out.k_sub = params.system.k_sub;
    out.snr_db = params.snr_db;
    out.seed = params.seed;
    out.generator_params = generator_json(params);
    out.records.resize(count);
    parallel_for(count, threads, [&](std::size_t j) {
        const std::uint64_t index = first + j;
        SeededRng channel_rng(derive_seed(params.seed, kStreamChannel, index));
        SeededRng noise_rng(derive_seed(params.seed, kStreamNoise, index));
        const auto real = sample_realization(channel_rng, params.system);
        const auto obs = observe(real.H, combiner, params.snr_db, noise_rng);
        out.records[j] = {ls(obs.Y), real.H};
    });
    return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data)
{
    const json header{{"version", data.version},
                      {"n_bs", data.n_bs},
                      {"k_sub", data.k_sub},
                      {"count", data.records.size()},
                      {"snr_db", data.snr_db},
                      {"seed", data.seed},
                      {"generator_params", data.generator_params}};
    const std::string head = header.dump();
    std::string buf;
    buf.reserve(8 + head.size() + data.records.size() * 4 * data.n_bs * data.k_sub * 8);
    append_u64_le(buf, head.size());
    buf += head;
    for (const auto& r : data.records) {
        if (r.h.rows() != data.n_bs || r.h.cols() != data.k_sub || r.h_ls.rows() != data.n_bs ||
            r.h_ls.cols() != data.k_sub) {
            throw std::invalid_argument("write_dataset: record shape differs from header");
        }
        append_matrix(buf, r.h_ls, false);
        append_matrix(buf, r.h_ls, true);
        append_matrix(buf, r.h, false);
        append_matrix(buf, r.h, true);
    }
    write_text_file(path, buf);
}

Dataset read_dataset(const std::filesystem::path& path)
{
    const std::string buf = read_text_file(path);
    const std::uint64_t head_len = read_u64_le(buf, 0);
    if (8 + head_len > buf.size()) {
        throw IoError(path.string() + ": truncated header");
    }
    Dataset out;
    std::size_t count = 0;
    try {
        const json header = json::parse(buf.substr(8, head_len));
        out.version = header.at("version").get<int>();
        out.n_bs = header.at("n_bs").get<int>();
        out.k_sub = header.at("k_sub").get<int>();
        out.snr_db = header.at("snr_db").get<double>();
        out.seed = header.at("seed").get<std::uint64_t>();
        out.generator_params = header.at("generator_params");
        count = header.at("count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": bad header: " + e.what());
    }
    if (out.version != kDatasetVersion) {
        throw IoError(path.string() + ": unsupported dataset version");
    }
    const std::size_t entries = static_cast<std::size_t>(out.n_bs) * out.k_sub;
    const std::size_t record_bytes = 4 * entries * 8;
    if (buf.size() != 8 + head_len + count * record_bytes) {
        throw IoError(path.string() + ": payload size does not match the header count");
    }
    std::size_t pos = 8 + head_len;
    auto read_pair = [&](ComplexMatrix& m) {
        m.resize(out.n_bs, out.k_sub);
        for (int part = 0; part < 2; ++part) {
            for (int r = 0; r < out.n_bs; ++r) {
                for (int c = 0; c < out.k_sub; ++c) {
                    const double v = read_f64_le(buf, pos);
                    pos += 8;
                    if (part == 0) {
                        m(r, c) = Complex(v, 0.0);
                    } else {
                        m(r, c).imag(v);
                    }
                }
            }
        }
    };
    out.records.resize(count);
    for (auto& rec : out.records) {
        read_pair(rec.h_ls);
        read_pair(rec.h);
    }
    return out;
}

std::string dataset_file_name(const std::string& split, double snr_db)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_snr%gdB.bin", split.c_str(), snr_db);
    return buf;
}

template <typename T>
jssanet::SampleSet<T> to_samples(const Dataset& data)
{
    jssanet::SampleSet<T> s;
    s.inputs.reserve(data.records.size());
    s.targets.reserve(data.records.size());
    for (const auto& r : data.records) {
        s.inputs.push_back(to_tensor<T>(r.h_ls));
        s.targets.push_back(to_tensor<T>(r.h));
    }
    return s;
}

template jssanet::SampleSet<float> to_samples(const Dataset&);
template jssanet::SampleSet<double> to_samples(const Dataset&);

}  // namespace nearfield
