#pragma once

#include <span>
#include <stdexcept>

#include "nearfield/numerics.hpp"
#include "nearfield/rng.hpp"

namespace nearfield {

// W = [W_1 … W_T], n_bs × T·n_rf, entries ±1/√n_bs.
struct CombinerSpec {
    int t_slots = 0;
    int n_rf = 0;
    ComplexMatrix W;

    int measurements() const { return t_slots * n_rf; }
};

struct Observation {
    ComplexMatrix Y;  // T·n_rf × K
    double sigma2 = 0.0;
    double snr_db = 0.0;
};

struct ChannelStatistics {
    ComplexMatrix r_hh;     // E[h hᴴ]
    ComplexMatrix r_h_hls;  // E[h ĥ_LSᴴ]
};

class SingularCombinerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

CombinerSpec make_combiner(SeededRng& rng, int t_slots, int n_rf, int n_bs);

// σ² that puts the pre-combining SNR at snr_db for unit average channel power per
// entry (E‖H‖²_F = N_BS·K); +inf maps to σ² = 0.
double noise_power_for_snr(double snr_db);

// Y = WᴴH + WᴴN, N with i.i.d. CN(0, σ²) entries.
Observation observe(const ComplexMatrix& H, const CombinerSpec& combiner, double snr_db, SeededRng& rng);

// Least-squares estimator (WWᴴ)⁻¹W y_k, evaluated as the least-squares solution of
// Wᴴ h = y_k through a column-pivoted QR of Wᴴ. The factorisation is built once.
class LeastSquaresEstimator {
public:
    // Throws SingularCombinerError when WWᴴ is rank deficient.
    explicit LeastSquaresEstimator(const CombinerSpec& combiner);
    ComplexMatrix operator()(const ComplexMatrix& Y) const;

private:
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr_;
    Eigen::Index n_bs_ = 0;
};

ComplexMatrix ls_estimate(const Observation& obs, const CombinerSpec& combiner);

// Same estimator through a Cholesky-type (LDLᴴ) solve of the normal equations
// (WWᴴ) h = W y. Independent route used to cross-check ls_estimate.
ComplexMatrix ls_estimate_normal_equations(const Observation& obs, const CombinerSpec& combiner);

// Sample correlations averaged over realizations and subcarriers. r_hh is Hermitian
// symmetrised. When ls_estimates is empty, r_h_hls = r_hh (noise independent of h).
// Throws StatisticsError on an empty set or mismatched sizes.
ChannelStatistics estimate_statistics(std::span<const ComplexMatrix> channels,
                                      std::span<const ComplexMatrix> ls_estimates = {});

// ĥ_k = R_{h,ĥ}(R_hh + σ²I)⁻¹ ĥ_k^LS with the filter matrix computed once.
class LmmseEstimator {
public:
    // Throws StatisticsError when R_hh is not Hermitian PSD within tolerance.
    LmmseEstimator(const ChannelStatistics& stats, double sigma2);
    ComplexMatrix operator()(const ComplexMatrix& H_ls) const { return filter_ * H_ls; }
    const ComplexMatrix& filter() const { return filter_; }

private:
    ComplexMatrix filter_;
};

ComplexMatrix lmmse_estimate(const ComplexMatrix& H_ls, const ChannelStatistics& stats, double sigma2);

}  // namespace nearfield
