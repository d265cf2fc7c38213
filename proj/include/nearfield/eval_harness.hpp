#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nearfield/channel_model.hpp"
#include "nearfield/jssanet/model.hpp"
#include "nearfield/measurement.hpp"
#include "nearfield/sparse_recovery.hpp"

namespace nearfield {

// ‖H - Ĥ‖²_F / ‖H‖²_F. Throws std::domain_error when ‖H‖_F = 0 and
// std::invalid_argument on a shape mismatch.
double nmse(const ComplexMatrix& H, const ComplexMatrix& H_hat);

inline constexpr double kNmseFloorDb = -120.0;
// 10·log10, floored at kNmseFloorDb.
double nmse_db(double linear);

// (1/K) Σ_k log2(1 + |ĥ_kᴴh_k|² / (σ²‖ĥ_k‖²)); a zero ĥ_k contributes 0.
// Throws std::invalid_argument for σ² ≤ 0 or a shape mismatch.
double spectral_efficiency(const ComplexMatrix& H, const ComplexMatrix& H_hat, double sigma2);

// What an estimator sees when it is prepared for one sweep cell.
struct CellSetup {
    SystemConfig system;
    const CombinerSpec* combiner = nullptr;
    double snr_db = 0.0;
    double sigma2 = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    std::uint64_t seed = 0;  // cell-specific stream for any randomness the estimator needs
};

// Maps (observation, Ĥ_LS) to Ĥ; must be safe to call concurrently.
using EstimateFn = std::function<ComplexMatrix(const Observation&, const ComplexMatrix&)>;

struct Estimator {
    std::string id;
    std::function<EstimateFn(const CellSetup&)> prepare;
};

// Realizations from the configured distributions whose dominant path (largest |α|) lies
// in [r_lo, r_hi]; candidate j uses stream derive_seed(root, 0, j) and acceptance is in
// index order. Throws std::runtime_error after kMaxDrawsPerAccepted·count candidates.
inline constexpr std::size_t kMaxDrawsPerAccepted = 1000;
std::vector<ComplexMatrix> sample_binned_channels(const SystemConfig& system, std::uint64_t root, double r_lo,
                                                  double r_hi, std::size_t count, int threads);

Estimator make_ls_estimator();
// Oracle statistics from stat_samples fresh realizations in the cell's distance bin.
Estimator make_lmmse_estimator(int stat_samples);
// SOMP on Ĥ_LS; stops at max_atoms or once the relative residual reaches σ√(n_bs·K)/‖Ĥ_LS‖_F.
Estimator make_somp_estimator(std::shared_ptr<const PolarDictionary> dict, int max_atoms);
template <typename T>
Estimator make_network_estimator(const std::string& id, std::shared_ptr<const jssanet::Model<T>> model);

struct ExperimentSpec {
    SystemConfig system;
    int t_slots = 16;
    int n_rf = 4;
    std::vector<double> snr_db{5.0};
    std::vector<std::pair<double, double>> distance_bins;  // empty = [r_min, max distance]
    int repetitions = 100;
    std::uint64_t seed = 0;
    bool timing = false;
    int threads = 0;
    nlohmann::json config;  // echoed into metadata (hash)
};

struct ReportRow {
    std::string estimator;
    double snr_db = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double nmse = 0.0;        // mean of per-realization ratios
    double nmse_db = 0.0;     // of the mean
    double se = 0.0;          // NaN when σ² = 0
    double se_perfect = 0.0;  // perfect-CSI bound on the same realizations
    int n = 0;
    std::string status = "ok";
    double runtime_ms = 0.0;  // only filled when timing is enabled
};

struct Report {
    std::vector<ReportRow> rows;
    nlohmann::json metadata;
};

inline constexpr int kReportSchemaVersion = 1;

// Rows ordered estimator-major, then SNR, then distance bin. Every estimator sees the
// same channels and noise in a cell; channels are shared across SNRs. Estimator
// failures are recorded in the row status and the sweep continues.
Report run_sweep(const ExperimentSpec& spec, const std::vector<Estimator>& estimators);

// Deterministic bodies (no timestamps; runtime only when include_runtime).
std::string report_csv(const Report& report, bool include_runtime = false);
nlohmann::json report_json(const Report& report, bool include_runtime = false);

}  // namespace nearfield
