#pragma once

#include <vector>

#include "nearfield/channel_model.hpp"
#include "nearfield/numerics.hpp"
#include "nearfield/tensor.hpp"

namespace nearfield {

// Uniform split of the array into M subarrays of N elements.
struct PartitionPlan {
    int M = 1;
    int N = 0;
    std::vector<int> ref_indices;  // n_i = iN - ⌊N/2⌋ - 1, i = 1..M (0-based element index)

    int n_bs() const { return M * N; }
    int first(int i) const { return i * N; }  // first element of subarray i (0-based)
};

// Throws std::invalid_argument unless M ≥ 1 divides n_bs.
PartitionPlan make_partition(int n_bs, int M);

struct PiecewiseParams {
    std::vector<double> p_tilde;      // phase p_{n_i} = -(2/λ)(r⁽ⁿⁱ⁾ - r0)
    std::vector<double> theta_tilde;  // sine seen from element n_i
    std::vector<double> r_tilde;      // distance seen from element n_i
};

// Exact-geometry parameters at each reference element.
PiecewiseParams piecewise_params(double theta0, double r0, const PartitionPlan& plan, const SystemConfig& config);

// Concatenation of √(N/N_BS)·e^{jπ(p̃_i - m_i θ̃_i)}·b(θ̃_i), with m_i the position of n_i
// inside subarray i, so the reference element carries phase exactly p̃_i.
ComplexVector piecewise_arv(double theta0, double r0, const PartitionPlan& plan, const SystemConfig& config);

enum class SimilarityMode { direct, fresnel };

// b̃ᴴa(θ0, r0) between the piecewise Fourier vector and the exact response. Fresnel mode
// sums per-subarray closed forms (1/N_BS)(2/√(2a_i))[C(X_i) - jS(X_i)] with
// a_i = (1-θ̃_i²)d/(2r̃_i) and X_i = (N/2)√(2a_i); only the magnitude is comparable to
// direct mode.
Complex similarity(double theta0, double r0, int M, const SystemConfig& config,
                   SimilarityMode mode = SimilarityMode::direct);

// Lower bound on M for 3 dB piecewise fidelity: the real-valued expression and its ceiling.
double theorem1_bound(const SystemConfig& config);
int theorem1_min_m(const SystemConfig& config);

// Upper bound on M for angular diversity across subchannels; may be 0 when the array
// is too small for any partition to separate adjacent subchannels.
double theorem2_bound(const SystemConfig& config, double theta_sec);
int theorem2_max_m(const SystemConfig& config, double theta_sec);

// Smallest divisor of n that is ≥ lower; n itself when none smaller qualifies.
int smallest_divisor_at_least(int n, int lower);

struct BeamPattern {
    std::vector<double> values;  // Ξ((θ̃ - φ_n)/2), signed
    std::vector<double> power;   // values²
    int argmax = 0;              // first index of maximal power
};

// Magnitude structure of Φᴴb(θ̃) on the N-point unitary DFT grid. Throws
// std::domain_error for |θ̃| ≥ 1.
BeamPattern beam_pattern(double theta_tilde, int N);

// Blockwise (I_M ⊗ Φ)ᴴ on a real tensor of shape (2, n_bs, K): channel 0 holds the real
// part, channel 1 the imaginary part. The transform object caches Φ.
template <typename T>
class SubchannelTransform {
public:
    // Throws std::invalid_argument when N < 1.
    explicit SubchannelTransform(int N);

    int N() const { return n_; }

    // Throws std::invalid_argument when the tensor is not 2-channel or N does not divide
    // the height.
    Tensor3<T> forward(const Tensor3<T>& x) const;
    // Inverse map (I_M ⊗ Φ); also the adjoint of forward.
    Tensor3<T> inverse(const Tensor3<T>& x) const;

private:
    Tensor3<T> apply(const Tensor3<T>& x, bool adjoint) const;

    int n_ = 0;
    std::vector<T> re_;  // Φ, row-major N × N
    std::vector<T> im_;
};

template <typename T>
Tensor3<T> dft_subchannels(const Tensor3<T>& x, const PartitionPlan& plan);
template <typename T>
Tensor3<T> idft_subchannels(const Tensor3<T>& x, const PartitionPlan& plan);

// Complex matrix ↔ (2, rows, cols) real tensor.
template <typename T>
Tensor3<T> to_tensor(const ComplexMatrix& m);
template <typename T>
ComplexMatrix from_tensor(const Tensor3<T>& t);

extern template class SubchannelTransform<float>;
extern template class SubchannelTransform<double>;

}  // namespace nearfield
