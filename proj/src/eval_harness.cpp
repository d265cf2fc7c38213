#include "nearfield/eval_harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "nearfield/config.hpp"
#include "nearfield/dataset.hpp"
#include "nearfield/parallel.hpp"
#include "nearfield/partition_theory.hpp"

namespace nearfield {

using nlohmann::json;

namespace {

constexpr std::uint64_t kStreamEstimator = 4;
constexpr std::uint64_t kStreamStatistics = 5;

void require_same(const ComplexMatrix& a, const ComplexMatrix& b, const char* what)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

std::string fmt(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

double nmse(const ComplexMatrix& H, const ComplexMatrix& H_hat)
{
    require_same(H, H_hat, "nmse");
    const double denom = H.squaredNorm();
    if (denom == 0.0) {
        throw std::domain_error("nmse: reference channel is zero");
    }
    return (H - H_hat).squaredNorm() / denom;
}

double nmse_db(double linear)
{
    if (!(linear > 0.0)) {
        return kNmseFloorDb;
    }
    return std::max(kNmseFloorDb, 10.0 * std::log10(linear));
}

double spectral_efficiency(const ComplexMatrix& H, const ComplexMatrix& H_hat, double sigma2)
{
    require_same(H, H_hat, "spectral_efficiency");
    if (!(sigma2 > 0.0)) {
        throw std::invalid_argument("spectral_efficiency: sigma2 must be positive");
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
        const double est_power = H_hat.col(k).squaredNorm();
        if (est_power == 0.0) {
            continue;
        }
        const double gain = std::norm(H_hat.col(k).dot(H.col(k)));
        total += std::log2(1.0 + gain / (sigma2 * est_power));
    }
    return total / static_cast<double>(H.cols());
}

std::vector<ComplexMatrix> sample_binned_channels(const SystemConfig& system, std::uint64_t root, double r_lo,
                                                  double r_hi, std::size_t count, int threads)
{
    std::vector<ComplexMatrix> accepted;
    accepted.reserve(count);
    const std::size_t batch = std::max<std::size_t>(count, 64);
    const std::size_t limit = std::max<std::size_t>(count, 1) * kMaxDrawsPerAccepted;
    std::vector<ChannelRealization> draws(batch);
    for (std::size_t first = 0; accepted.size() < count; first += batch) {
        if (first >= limit) {
            throw std::runtime_error("sample_binned_channels: distance bin [" + fmt(r_lo) + ", " + fmt(r_hi) +
                                     "] is too rarely hit by the dominant path");
        }
        parallel_for(batch, threads, [&](std::size_t i) {
            SeededRng rng(derive_seed(root, 0, first + i));
            draws[i] = sample_realization(rng, system);
        });
        for (std::size_t i = 0; i < batch && accepted.size() < count; ++i) {
            const double r = draws[i].dominant_distance();
            if (r >= r_lo && r <= r_hi) {
                accepted.push_back(std::move(draws[i].H));
            }
        }
    }
    return accepted;
}

Estimator make_ls_estimator()
{
    return {"ls", [](const CellSetup&) -> EstimateFn {
                return [](const Observation&, const ComplexMatrix& h_ls) { return h_ls; };
            }};
}

Estimator make_lmmse_estimator(int stat_samples)
{
    if (stat_samples < 1) {
        throw std::invalid_argument("lmmse: stat_samples must be positive");
    }
    // prepare() runs sequentially, so the memo needs no lock.
    auto memo = std::make_shared<std::map<std::pair<double, double>, std::shared_ptr<const ChannelStatistics>>>();
    return {"lmmse", [stat_samples, memo](const CellSetup& cell) -> EstimateFn {
                const auto key = std::make_pair(cell.r_lo, cell.r_hi);
                auto it = memo->find(key);
                if (it == memo->end()) {
                    const auto channels =
                        sample_binned_channels(cell.system, derive_seed(cell.seed, kStreamStatistics), cell.r_lo,
                                               cell.r_hi, static_cast<std::size_t>(stat_samples), 0);
                    auto stats = std::make_shared<const ChannelStatistics>(estimate_statistics(channels));
                    it = memo->emplace(key, std::move(stats)).first;
                }
                auto filter = std::make_shared<const LmmseEstimator>(*it->second, cell.sigma2);
                return [filter](const Observation&, const ComplexMatrix& h_ls) { return (*filter)(h_ls); };
            }};
}

Estimator make_somp_estimator(std::shared_ptr<const PolarDictionary> dict, int max_atoms)
{
    return {"somp", [dict, max_atoms](const CellSetup& cell) -> EstimateFn {
                const double noise_norm =
                    std::sqrt(cell.sigma2 * cell.system.n_bs * static_cast<double>(cell.system.k_sub));
                return [dict, max_atoms, noise_norm](const Observation&, const ComplexMatrix& h_ls) {
                    SompOptions opts;
                    opts.max_atoms = std::min<int>(max_atoms, static_cast<int>(dict->size()));
                    const double norm = h_ls.norm();
                    opts.residual_tol = norm > 0.0 ? noise_norm / norm : 0.0;
                    return somp(h_ls, *dict, opts).H_hat;
                };
            }};
}

template <typename T>
Estimator make_network_estimator(const std::string& id, std::shared_ptr<const jssanet::Model<T>> model)
{
    return {id, [model](const CellSetup&) -> EstimateFn {
                return [model](const Observation&, const ComplexMatrix& h_ls) {
                    return from_tensor(jssanet::forward(*model, to_tensor<T>(h_ls)));
                };
            }};
}

template Estimator make_network_estimator(const std::string&, std::shared_ptr<const jssanet::Model<float>>);
template Estimator make_network_estimator(const std::string&, std::shared_ptr<const jssanet::Model<double>>);

Report run_sweep(const ExperimentSpec& spec, const std::vector<Estimator>& estimators)
{
    spec.system.validate();
    if (spec.snr_db.empty() || spec.repetitions < 1) {
        throw std::invalid_argument("run_sweep: need a non-empty SNR grid and at least one repetition");
    }
    auto bins = spec.distance_bins;
    if (bins.empty()) {
        bins.emplace_back(spec.system.r_min, spec.system.max_distance());
    }
    const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
    const std::size_t n_bins = bins.size();

    Report report;
    report.metadata = json{{"schema_version", kReportSchemaVersion},
                           {"seed", spec.seed},
                           {"config_hash", config_hash(spec.config)},
                           {"repetitions", spec.repetitions},
                           {"estimators", json::array()}};
    for (const auto& e : estimators) {
        report.metadata["estimators"].push_back(e.id);
    }
    if (estimators.empty()) {
        return report;
    }

    SeededRng combiner_rng(derive_seed(spec.seed, kStreamCombiner));
    const CombinerSpec combiner = make_combiner(combiner_rng, spec.t_slots, spec.n_rf, spec.system.n_bs);
    const LeastSquaresEstimator ls(combiner);

    std::vector<std::vector<ComplexMatrix>> channels(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        channels[b] = sample_binned_channels(spec.system, derive_seed(spec.seed, kStreamChannel, b), bins[b].first,
                                             bins[b].second, reps, spec.threads);
    }

    const std::size_t n_snr = spec.snr_db.size();
    std::vector<ReportRow> table(estimators.size() * n_snr * n_bins);
    for (std::size_t s = 0; s < n_snr; ++s) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            const std::size_t cell = s * n_bins + b;
            const std::uint64_t noise_root = derive_seed(spec.seed, kStreamNoise, cell);
            std::vector<Observation> obs(reps);
            std::vector<ComplexMatrix> h_ls(reps);
            std::vector<double> se_perfect(reps, 0.0);
            const double sigma2 = noise_power_for_snr(spec.snr_db[s]);
            parallel_for(reps, spec.threads, [&](std::size_t r) {
                SeededRng rng(derive_seed(noise_root, 0, r));
                obs[r] = observe(channels[b][r], combiner, spec.snr_db[s], rng);
                h_ls[r] = ls(obs[r].Y);
                if (sigma2 > 0.0) {
                    se_perfect[r] = spectral_efficiency(channels[b][r], channels[b][r], sigma2);
                }
            });
            double se_perfect_mean = 0.0;
            for (double v : se_perfect) {
                se_perfect_mean += v;
            }
            se_perfect_mean = sigma2 > 0.0 ? se_perfect_mean / static_cast<double>(reps)
                                           : std::numeric_limits<double>::quiet_NaN();

            CellSetup setup;
            setup.system = spec.system;
            setup.combiner = &combiner;
            setup.snr_db = spec.snr_db[s];
            setup.sigma2 = sigma2;
            setup.r_lo = bins[b].first;
            setup.r_hi = bins[b].second;
            setup.seed = derive_seed(spec.seed, kStreamEstimator, b);

            for (std::size_t e = 0; e < estimators.size(); ++e) {
                ReportRow& row = table[(e * n_snr + s) * n_bins + b];
                row.estimator = estimators[e].id;
                row.snr_db = spec.snr_db[s];
                row.r_lo = bins[b].first;
                row.r_hi = bins[b].second;
                row.se_perfect = se_perfect_mean;
                const auto t0 = std::chrono::steady_clock::now();
                std::vector<double> ratio(reps, 0.0);
                std::vector<double> se(reps, 0.0);
                std::vector<std::string> errors(reps);
                try {
                    const EstimateFn fn = estimators[e].prepare(setup);
                    parallel_for(reps, spec.threads, [&](std::size_t r) {
                        try {
                            const ComplexMatrix est = fn(obs[r], h_ls[r]);
                            ratio[r] = nmse(channels[b][r], est);
                            if (sigma2 > 0.0) {
                                se[r] = spectral_efficiency(channels[b][r], est, sigma2);
                            }
                        } catch (const std::exception& ex) {
                            errors[r] = ex.what();
                        }
                    });
                } catch (const std::exception& ex) {
                    std::fill(errors.begin(), errors.end(), ex.what());
                }
                double ratio_sum = 0.0;
                double se_sum = 0.0;
                int ok = 0;
                std::string first_error;
                for (std::size_t r = 0; r < reps; ++r) {
                    if (!errors[r].empty()) {
                        if (first_error.empty()) {
                            first_error = errors[r];
                        }
                        continue;
                    }
                    ratio_sum += ratio[r];
                    se_sum += se[r];
                    ++ok;
                }
                row.n = ok;
                row.nmse = ok > 0 ? ratio_sum / ok : std::numeric_limits<double>::quiet_NaN();
                row.nmse_db = ok > 0 ? nmse_db(row.nmse) : std::numeric_limits<double>::quiet_NaN();
                row.se = (ok > 0 && sigma2 > 0.0) ? se_sum / ok : std::numeric_limits<double>::quiet_NaN();
                if (!first_error.empty()) {
                    row.status = "error: " + first_error;
                }
                if (spec.timing) {
                    row.runtime_ms =
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                }
            }
        }
    }
    report.rows = std::move(table);
    return report;
}

std::string report_csv(const Report& report, bool include_runtime)
{
    std::string out = "estimator,snr_db,r_lo,r_hi,nmse,nmse_db,se_bits,se_perfect_bits,n,status";
    out += include_runtime ? ",runtime_ms\n" : "\n";
    for (const auto& r : report.rows) {
        out += r.estimator + "," + fmt(r.snr_db) + "," + fmt(r.r_lo) + "," + fmt(r.r_hi) + "," + fmt(r.nmse) + "," +
               fmt(r.nmse_db) + "," + fmt(r.se) + "," + fmt(r.se_perfect) + "," + std::to_string(r.n) + ",\"" +
               r.status + "\"";
        if (include_runtime) {
            out += "," + fmt(r.runtime_ms);
        }
        out += "\n";
    }
    return out;
}

json report_json(const Report& report, bool include_runtime)
{
    json results = json::object();
    for (const auto& r : report.rows) {
        json row{{"snr_db", r.snr_db},
                 {"distance_bin", {r.r_lo, r.r_hi}},
                 {"nmse", number_or_null(r.nmse)},
                 {"nmse_db", number_or_null(r.nmse_db)},
                 {"se_bits", number_or_null(r.se)},
                 {"se_perfect_bits", number_or_null(r.se_perfect)},
                 {"n", r.n},
                 {"status", r.status}};
        if (include_runtime) {
            row["runtime_ms"] = r.runtime_ms;
        }
        results[r.estimator].push_back(row);
    }
    return json{{"metadata", report.metadata}, {"results", results}};
}

}  // namespace nearfield
