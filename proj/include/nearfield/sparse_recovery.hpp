#pragma once

#include <limits>
#include <vector>

#include "nearfield/channel_model.hpp"
#include "nearfield/measurement.hpp"

namespace nearfield {

struct PolarGridPoint {
    double theta = 0.0;
    double r = std::numeric_limits<double>::infinity();  // +inf marks a far-field atom
};

// Near-field codebook: unit-norm exact-mode responses on a (sine, distance) grid.
struct PolarDictionary {
    ComplexMatrix atoms;  // n_bs × D
    std::vector<PolarGridPoint> grid;

    Eigen::Index size() const { return atoms.cols(); }
};

// Sine-uniform angles θ_g = (2g + 1 - G)/G, g < G = angle_oversampling·n_bs, crossed with
// rings r = d_R/s for s = 1..ring_count (rings below r_min are dropped) plus one far-field
// ring. far_field_only keeps just the far-field ring. Throws std::invalid_argument on an
// empty grid or non-positive counts.
PolarDictionary build_polar_dictionary(const SystemConfig& config, int angle_oversampling, int ring_count,
                                       bool far_field_only = false);

struct SompOptions {
    int max_atoms = 12;
    double residual_tol = 0.0;  // stop once ‖R‖_F / ‖target‖_F falls to this value
};

struct RecoveryResult {
    std::vector<Eigen::Index> support;  // selection order
    ComplexMatrix coeffs;               // |support| × K
    ComplexMatrix H_hat;                // n_bs × K
    double residual_norm = 0.0;
    std::vector<double> residual_history;  // ‖R‖_F after each selection, starting with ‖target‖_F
};

// Simultaneous OMP on a channel-domain target (e.g. Ĥ_LS): pick the atom maximising
// Σ_k |aᴴ r_k|², refit all selected atoms jointly by least squares, repeat. Ties go to
// the lowest index.
RecoveryResult somp(const ComplexMatrix& target, const PolarDictionary& dict, const SompOptions& options);

// Same search on raw measurements Y with sensing matrix WᴴΦ; atoms are scored by
// normalised correlation and H_hat is synthesised through Φ.
RecoveryResult somp_measurements(const ComplexMatrix& Y, const CombinerSpec& combiner, const PolarDictionary& dict,
                                 const SompOptions& options);

}  // namespace nearfield
