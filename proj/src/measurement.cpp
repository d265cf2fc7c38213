#include "nearfield/measurement.hpp"

#include <cmath>
#include <limits>

namespace nearfield {

CombinerSpec make_combiner(SeededRng& rng, int t_slots, int n_rf, int n_bs)
{
    if (t_slots < 1 || n_rf < 1 || n_bs < 1) {
        throw std::invalid_argument("make_combiner: dimensions must be positive");
    }
    CombinerSpec spec;
    spec.t_slots = t_slots;
    spec.n_rf = n_rf;
    spec.W.resize(n_bs, static_cast<Eigen::Index>(t_slots) * n_rf);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_bs));
    for (Eigen::Index col = 0; col < spec.W.cols(); ++col) {
        for (Eigen::Index row = 0; row < n_bs; ++row) {
            spec.W(row, col) = Complex(scale * rng.sign(), 0.0);
        }
    }
    return spec;
}

double noise_power_for_snr(double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0) {
        return 0.0;
    }
    return std::pow(10.0, -snr_db / 10.0);
}

Observation observe(const ComplexMatrix& H, const CombinerSpec& combiner, double snr_db, SeededRng& rng)
{
    if (H.rows() != combiner.W.rows()) {
        throw std::invalid_argument("observe: channel rows do not match combiner");
    }
    Observation obs;
    obs.snr_db = snr_db;
    obs.sigma2 = noise_power_for_snr(snr_db);
    if (obs.sigma2 == 0.0) {
        obs.Y = combiner.W.adjoint() * H;
        return obs;
    }
    const double sigma = std::sqrt(obs.sigma2);
    ComplexMatrix noisy = H;
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
        for (Eigen::Index n = 0; n < H.rows(); ++n) {
            noisy(n, k) += sigma * rng.complex_normal();
        }
    }
    obs.Y = combiner.W.adjoint() * noisy;
    return obs;
}

LeastSquaresEstimator::LeastSquaresEstimator(const CombinerSpec& combiner)
    : qr_(combiner.W.adjoint()), n_bs_(combiner.W.rows())
{
    if (qr_.rank() < n_bs_) {
        throw SingularCombinerError("ls_estimate: WWᴴ is rank deficient (T·n_rf below n_bs or degenerate signs)");
    }
}

ComplexMatrix LeastSquaresEstimator::operator()(const ComplexMatrix& Y) const
{
    return qr_.solve(Y);
}

ComplexMatrix ls_estimate(const Observation& obs, const CombinerSpec& combiner)
{
    return LeastSquaresEstimator(combiner)(obs.Y);
}

ComplexMatrix ls_estimate_normal_equations(const Observation& obs, const CombinerSpec& combiner)
{
    const ComplexMatrix gram = combiner.W * combiner.W.adjoint();
    Eigen::LDLT<ComplexMatrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw SingularCombinerError("ls_estimate_normal_equations: WWᴴ is not positive definite");
    }
    return ldlt.solve(combiner.W * obs.Y);
}

ChannelStatistics estimate_statistics(std::span<const ComplexMatrix> channels, std::span<const ComplexMatrix> ls_estimates)
{
    if (channels.empty()) {
        throw StatisticsError("estimate_statistics: no training channels");
    }
    if (!ls_estimates.empty() && ls_estimates.size() != channels.size()) {
        throw StatisticsError("estimate_statistics: channel and LS sets differ in size");
    }
    const Eigen::Index n = channels.front().rows();
    ChannelStatistics stats;
    stats.r_hh = ComplexMatrix::Zero(n, n);
    stats.r_h_hls = ComplexMatrix::Zero(n, n);
    double samples = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& H = channels[i];
        if (H.rows() != n) {
            throw StatisticsError("estimate_statistics: inconsistent antenna count");
        }
        stats.r_hh.noalias() += H * H.adjoint();
        if (!ls_estimates.empty()) {
            stats.r_h_hls.noalias() += H * ls_estimates[i].adjoint();
        }
        samples += static_cast<double>(H.cols());
    }
    stats.r_hh /= samples;
    stats.r_hh = (0.5 * (stats.r_hh + stats.r_hh.adjoint())).eval();
    if (ls_estimates.empty()) {
        stats.r_h_hls = stats.r_hh;
    } else {
        stats.r_h_hls /= samples;
    }
    return stats;
}

LmmseEstimator::LmmseEstimator(const ChannelStatistics& stats, double sigma2)
{
    const auto& R = stats.r_hh;
    const Eigen::Index n = R.rows();
    if (R.cols() != n || stats.r_h_hls.rows() != n || stats.r_h_hls.cols() != n) {
        throw StatisticsError("lmmse: correlation matrices must be n_bs × n_bs");
    }
    const double scale = std::max(R.norm(), std::numeric_limits<double>::min());
    if ((R - R.adjoint()).norm() > 1e-9 * scale) {
        throw StatisticsError("lmmse: R_hh is not Hermitian");
    }
    const ComplexMatrix hermitian = 0.5 * (R + R.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
        throw StatisticsError("lmmse: R_hh is not positive semidefinite");
    }
    if (sigma2 < 0.0) {
        throw StatisticsError("lmmse: noise power must be non-negative");
    }
    const ComplexMatrix regularised = hermitian + sigma2 * ComplexMatrix::Identity(n, n);
    // filter = R_{h,ĥ} A⁻¹ with A Hermitian, so filterᴴ = A⁻¹ R_{h,ĥ}ᴴ.
    Eigen::LDLT<ComplexMatrix> ldlt(regularised);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && eig.eigenvalues().minCoeff() + sigma2 > 1e-12 * scale) {
        filter_ = ldlt.solve(stats.r_h_hls.adjoint()).adjoint();
    } else {
        // Singular A (σ² = 0 with rank-deficient R): minimum-norm solution.
        Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(regularised);
        filter_ = cod.solve(stats.r_h_hls.adjoint()).adjoint();
    }
}

ComplexMatrix lmmse_estimate(const ComplexMatrix& H_ls, const ChannelStatistics& stats, double sigma2)
{
    return LmmseEstimator(stats, sigma2)(H_ls);
}

}  // namespace nearfield
