#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nearfield/tensor.hpp"

// Convolution and normalisation primitives with hand-written reverse-mode rules.
// Layouts: activations are Tensor3 (C, H, W); point-wise weights are (C_out, C_in)
// row-major; depth-wise weights are (C, k, k); full convolution weights are
// (C_out, C_in, k, k). Every layer carries a bias. Padding is zero "same", stride 1,
// cross-correlation orientation.
//
// Backward functions accumulate (+=) into parameter gradients and into dx, so branches
// that share an input can be summed without temporaries.

namespace nearfield::jssanet {

// Multiply counter used to measure cost scaling; counts in-bounds products only.
struct OpCounter {
    std::uint64_t multiplies = 0;
};

template <typename T>
Tensor3<T> pw_conv(const Tensor3<T>& x, const T* w, const T* b, int c_out, OpCounter* ops = nullptr);
template <typename T>
void pw_conv_backward(const Tensor3<T>& x, const Tensor3<T>& dy, const T* w, T* dw, T* db, Tensor3<T>* dx);

// dilation 1 is a plain depth-wise convolution; larger values give the dilated variant.
template <typename T>
Tensor3<T> dw_conv(const Tensor3<T>& x, const T* w, const T* b, int kernel, int dilation = 1,
                   OpCounter* ops = nullptr);
template <typename T>
void dw_conv_backward(const Tensor3<T>& x, const Tensor3<T>& dy, const T* w, int kernel, int dilation, T* dw, T* db,
                      Tensor3<T>* dx);

// Dense k×k convolution. Rows are padded in independent segments of segment_rows
// (0 = whole height) so no tap reads across a segment boundary. When per_segment_weights
// is set, segment s uses the weight/bias block s (weights and biases laid out back to back).
template <typename T>
Tensor3<T> conv2d(const Tensor3<T>& x, const T* w, const T* b, int c_out, int kernel, int segment_rows = 0,
                  bool per_segment_weights = false, OpCounter* ops = nullptr);
template <typename T>
void conv2d_backward(const Tensor3<T>& x, const Tensor3<T>& dy, const T* w, int kernel, int segment_rows,
                     bool per_segment_weights, T* dw, T* db, Tensor3<T>* dx);

// Statistics kept by layer_norm for the backward pass.
template <typename T>
struct LayerNormCache {
    Tensor3<T> normalized;  // (x - mean)·rstd
    std::vector<T> rstd;    // per spatial position
};

inline constexpr double kLayerNormEps = 1e-5;

// Normalisation over channels at each (y, x), then per-channel affine.
template <typename T>
Tensor3<T> layer_norm(const Tensor3<T>& x, const T* scale, const T* shift, LayerNormCache<T>* cache = nullptr);
template <typename T>
void layer_norm_backward(const LayerNormCache<T>& cache, const Tensor3<T>& dy, const T* scale, T* dscale, T* dshift,
                         Tensor3<T>* dx);

// Element-wise helpers.
template <typename T>
Tensor3<T> hadamard(const Tensor3<T>& a, const Tensor3<T>& b, OpCounter* ops = nullptr);
template <typename T>
void add_inplace(Tensor3<T>& a, const Tensor3<T>& b);
// Concatenate / split along height.
template <typename T>
Tensor3<T> concat_rows(const std::vector<Tensor3<T>>& parts);

}  // namespace nearfield::jssanet
