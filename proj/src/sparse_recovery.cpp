#include "nearfield/sparse_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nearfield {

PolarDictionary build_polar_dictionary(const SystemConfig& config, int angle_oversampling, int ring_count,
                                       bool far_field_only)
{
    if (angle_oversampling < 1 || ring_count < 1) {
        throw std::invalid_argument("build_polar_dictionary: oversampling and ring count must be positive");
    }
    const int angles = angle_oversampling * config.n_bs;
    std::vector<double> rings;
    if (!far_field_only) {
        const double d_r = rayleigh_distance(config);
        for (int s = 1; s <= ring_count; ++s) {
            const double r = d_r / s;
            if (r >= config.r_min) {
                rings.push_back(r);
            }
        }
    }
    rings.push_back(std::numeric_limits<double>::infinity());

    PolarDictionary dict;
    dict.atoms.resize(config.n_bs, static_cast<Eigen::Index>(angles) * rings.size());
    dict.grid.reserve(dict.atoms.cols());
    Eigen::Index col = 0;
    for (double r : rings) {
        for (int g = 0; g < angles; ++g) {
            const double theta = static_cast<double>(2 * g + 1 - angles) / angles;
            if (std::isinf(r)) {
                dict.atoms.col(col) = far_field_arv(theta, config.n_bs, config.d / config.wavelength());
            } else {
                dict.atoms.col(col) = near_field_arv(theta, r, config, ArvMode::exact);
            }
            dict.grid.push_back({theta, r});
            ++col;
        }
    }
    if (dict.atoms.cols() == 0) {
        throw std::invalid_argument("build_polar_dictionary: empty grid");
    }
    return dict;
}

namespace {

RecoveryResult somp_core(const ComplexMatrix& target, const ComplexMatrix& sensing, const ComplexMatrix& synthesis,
                         const SompOptions& options)
{
    if (options.max_atoms < 0 || options.max_atoms > sensing.cols()) {
        throw std::invalid_argument("somp: max_atoms must lie in [0, D]");
    }
    RecoveryResult out;
    const double target_norm = target.norm();
    ComplexMatrix residual = target;
    out.residual_norm = target_norm;
    out.residual_history.push_back(target_norm);
    out.coeffs = ComplexMatrix(0, target.cols());
    out.H_hat = ComplexMatrix::Zero(synthesis.rows(), target.cols());
    if (target_norm == 0.0) {
        return out;
    }

    RealVector column_norms = sensing.colwise().norm().transpose();
    std::vector<bool> used(sensing.cols(), false);
    while (static_cast<int>(out.support.size()) < options.max_atoms &&
           out.residual_norm > options.residual_tol * target_norm) {
        const ComplexMatrix corr = sensing.adjoint() * residual;
        Eigen::Index best = -1;
        double best_score = -1.0;
        for (Eigen::Index j = 0; j < corr.rows(); ++j) {
            if (used[j] || column_norms(j) == 0.0) {
                continue;
            }
            const double score = corr.row(j).squaredNorm() / (column_norms(j) * column_norms(j));
            if (score > best_score) {  // strict: ties keep the lower index
                best_score = score;
                best = j;
            }
        }
        if (best < 0) {
            break;
        }
        used[best] = true;
        out.support.push_back(best);

        ComplexMatrix selected(sensing.rows(), static_cast<Eigen::Index>(out.support.size()));
        for (std::size_t i = 0; i < out.support.size(); ++i) {
            selected.col(static_cast<Eigen::Index>(i)) = sensing.col(out.support[i]);
        }
        out.coeffs = selected.colPivHouseholderQr().solve(target);
        residual = target - selected * out.coeffs;
        out.residual_norm = residual.norm();
        out.residual_history.push_back(out.residual_norm);
    }

    for (std::size_t i = 0; i < out.support.size(); ++i) {
        out.H_hat += synthesis.col(out.support[i]) * out.coeffs.row(static_cast<Eigen::Index>(i));
    }
    return out;
}

}  // namespace

RecoveryResult somp(const ComplexMatrix& target, const PolarDictionary& dict, const SompOptions& options)
{
    if (target.rows() != dict.atoms.rows()) {
        throw std::invalid_argument("somp: target rows differ from atom length");
    }
    return somp_core(target, dict.atoms, dict.atoms, options);
}

RecoveryResult somp_measurements(const ComplexMatrix& Y, const CombinerSpec& combiner, const PolarDictionary& dict,
                                 const SompOptions& options)
{
    if (Y.rows() != combiner.W.cols() || combiner.W.rows() != dict.atoms.rows()) {
        throw std::invalid_argument("somp_measurements: dimension mismatch");
    }
    const ComplexMatrix sensing = combiner.W.adjoint() * dict.atoms;
    return somp_core(Y, sensing, dict.atoms, options);
}

}  // namespace nearfield
