#include "nearfield/jssanet/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace nearfield::jssanet {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

// Valid output range [lo, hi) for tap offset `off` inside a segment of `len` rows/cols.
inline void valid_range(int off, int len, int& lo, int& hi)
{
    lo = std::max(0, -off);
    hi = std::min(len, len - off);
}

}  // namespace

template <typename T>
Tensor3<T> pw_conv(const Tensor3<T>& x, const T* w, const T* b, int c_out, OpCounter* ops)
{
    const int c_in = x.channels;
    const std::size_t plane = x.plane();
    Tensor3<T> y(c_out, x.height, x.width);
    for (int o = 0; o < c_out; ++o) {
        T* out = y.values.data() + o * plane;
        std::fill(out, out + plane, b[o]);
        for (int i = 0; i < c_in; ++i) {
            const T wi = w[o * c_in + i];
            const T* in = x.values.data() + i * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                out[p] += wi * in[p];
            }
        }
    }
    if (ops) {
        ops->multiplies += static_cast<std::uint64_t>(c_out) * c_in * plane;
    }
    return y;
}

template <typename T>
void pw_conv_backward(const Tensor3<T>& x, const Tensor3<T>& dy, const T* w, T* dw, T* db, Tensor3<T>* dx)
{
    const int c_in = x.channels;
    const int c_out = dy.channels;
    require(x.height == dy.height && x.width == dy.width, "pw_conv_backward: shape mismatch");
    const std::size_t plane = x.plane();
    for (int o = 0; o < c_out; ++o) {
        const T* g = dy.values.data() + o * plane;
        T bias_sum = 0;
        for (std::size_t p = 0; p < plane; ++p) {
            bias_sum += g[p];
        }
        db[o] += bias_sum;
        for (int i = 0; i < c_in; ++i) {
            const T* in = x.values.data() + i * plane;
            T acc = 0;
            for (std::size_t p = 0; p < plane; ++p) {
                acc += g[p] * in[p];
            }
            dw[o * c_in + i] += acc;
            if (dx) {
                const T wi = w[o * c_in + i];
                T* d = dx->values.data() + i * plane;
                for (std::size_t p = 0; p < plane; ++p) {
                    d[p] += wi * g[p];
                }
            }
        }
    }
}

template <typename T>
Tensor3<T> dw_conv(const Tensor3<T>& x, const T* w, const T* b, int kernel, int dilation, OpCounter* ops)
{
    require(kernel >= 1 && kernel % 2 == 1 && dilation >= 1, "dw_conv: kernel must be odd, dilation positive");
    const int half = kernel / 2;
    const int H = x.height;
    const int W = x.width;
    Tensor3<T> y(x.channels, H, W);
    std::uint64_t count = 0;
    for (int c = 0; c < x.channels; ++c) {
        const T* in = &x.values[static_cast<std::size_t>(c) * x.plane()];
        T* out = &y.values[static_cast<std::size_t>(c) * y.plane()];
        std::fill(out, out + y.plane(), b[c]);
        for (int u = 0; u < kernel; ++u) {
            const int dy_off = (u - half) * dilation;
            int y_lo, y_hi;
            valid_range(dy_off, H, y_lo, y_hi);
            for (int v = 0; v < kernel; ++v) {
                const int dx_off = (v - half) * dilation;
                int x_lo, x_hi;
                valid_range(dx_off, W, x_lo, x_hi);
                if (y_lo >= y_hi || x_lo >= x_hi) {
                    continue;
                }
                const T tap = w[(c * kernel + u) * kernel + v];
                for (int r = y_lo; r < y_hi; ++r) {
                    const T* src = in + (r + dy_off) * W + dx_off;
                    T* dst = out + r * W;
                    for (int q = x_lo; q < x_hi; ++q) {
                        dst[q] += tap * src[q];
                    }
                }
                count += static_cast<std::uint64_t>(y_hi - y_lo) * (x_hi - x_lo);
            }
        }
    }
    if (ops) {
        ops->multiplies += count;
    }
    return y;
}

template <typename T>
void dw_conv_backward(const Tensor3<T>& x, const Tensor3<T>& dy, const T* w, int kernel, int dilation, T* dw, T* db,
                      Tensor3<T>* dx)
{
    require(x.same_shape(dy), "dw_conv_backward: shape mismatch");
    const int half = kernel / 2;
    const int H = x.height;
    const int W = x.width;
    for (int c = 0; c < x.channels; ++c) {
        const T* in = &x.values[static_cast<std::size_t>(c) * x.plane()];
        const T* g = &dy.values[static_cast<std::size_t>(c) * dy.plane()];
        T* d = dx ? &dx->values[static_cast<std::size_t>(c) * dx->plane()] : nullptr;
        T bias_sum = 0;
        for (std::size_t p = 0; p < x.plane(); ++p) {
            bias_sum += g[p];
        }
        db[c] += bias_sum;
        for (int u = 0; u < kernel; ++u) {
            const int dy_off = (u - half) * dilation;
            int y_lo, y_hi;
            valid_range(dy_off, H, y_lo, y_hi);
            for (int v = 0; v < kernel; ++v) {
                const int dx_off = (v - half) * dilation;
                int x_lo, x_hi;
                valid_range(dx_off, W, x_lo, x_hi);
                if (y_lo >= y_hi || x_lo >= x_hi) {
                    continue;
                }
                const std::size_t widx = (static_cast<std::size_t>(c) * kernel + u) * kernel + v;
                const T tap = w[widx];
                T acc = 0;
                for (int r = y_lo; r < y_hi; ++r) {
                    const T* src = in + (r + dy_off) * W + dx_off;
                    const T* gr = g + r * W;
                    T* dst = d ? d + (r + dy_off) * W + dx_off : nullptr;
                    for (int q = x_lo; q < x_hi; ++q) {
                        acc += gr[q] * src[q];
                        if (dst) {
                            dst[q] += tap * gr[q];
                        }
                    }
                }
                dw[widx] += acc;
            }
        }
    }
}

template <typename T>
Tensor3<T> conv2d(const Tensor3<T>& x, const T* w, const T* b, int c_out, int kernel, int segment_rows,
                  bool per_segment_weights, OpCounter* ops)
{
    require(kernel >= 1 && kernel % 2 == 1, "conv2d: kernel must be odd");
    const int seg = segment_rows > 0 ? segment_rows : x.height;
    require(x.height % seg == 0, "conv2d: segment rows must divide the height");
    const int c_in = x.channels;
    const int half = kernel / 2;
    const int W = x.width;
    const std::size_t wblock = static_cast<std::size_t>(c_out) * c_in * kernel * kernel;
    Tensor3<T> y(c_out, x.height, W);
    std::uint64_t count = 0;
    for (int s = 0; s < x.height / seg; ++s) {
        const T* ws = w + (per_segment_weights ? s * wblock : 0);
        const T* bs = b + (per_segment_weights ? s * c_out : 0);
        const int row0 = s * seg;
        for (int o = 0; o < c_out; ++o) {
            for (int r = 0; r < seg; ++r) {
                T* dst = &y(o, row0 + r, 0);
                std::fill(dst, dst + W, bs[o]);
            }
            for (int i = 0; i < c_in; ++i) {
                for (int u = 0; u < kernel; ++u) {
                    const int dy_off = u - half;
                    int y_lo, y_hi;
                    valid_range(dy_off, seg, y_lo, y_hi);
                    for (int v = 0; v < kernel; ++v) {
                        const int dx_off = v - half;
                        int x_lo, x_hi;
                        valid_range(dx_off, W, x_lo, x_hi);
                        if (y_lo >= y_hi || x_lo >= x_hi) {
                            continue;
                        }
                        const T tap = ws[((static_cast<std::size_t>(o) * c_in + i) * kernel + u) * kernel + v];
                        for (int r = y_lo; r < y_hi; ++r) {
                            const T* src = &x(i, row0 + r + dy_off, 0) + dx_off;
                            T* dst = &y(o, row0 + r, 0);
                            for (int q = x_lo; q < x_hi; ++q) {
                                dst[q] += tap * src[q];
                            }
                        }
                        count += static_cast<std::uint64_t>(y_hi - y_lo) * (x_hi - x_lo);
                    }
                }
            }
        }
    }
    if (ops) {
        ops->multiplies += count;
    }
    return y;
}

template <typename T>
void conv2d_backward(const Tensor3<T>& x, const Tensor3<T>& dy, const T* w, int kernel, int segment_rows,
                     bool per_segment_weights, T* dw, T* db, Tensor3<T>* dx)
{
    require(x.height == dy.height && x.width == dy.width, "conv2d_backward: shape mismatch");
    const int seg = segment_rows > 0 ? segment_rows : x.height;
    const int c_in = x.channels;
    const int c_out = dy.channels;
    const int half = kernel / 2;
    const int W = x.width;
    const std::size_t wblock = static_cast<std::size_t>(c_out) * c_in * kernel * kernel;
    for (int s = 0; s < x.height / seg; ++s) {
        const T* ws = w + (per_segment_weights ? s * wblock : 0);
        T* dws = dw + (per_segment_weights ? s * wblock : 0);
        T* dbs = db + (per_segment_weights ? s * c_out : 0);
        const int row0 = s * seg;
        for (int o = 0; o < c_out; ++o) {
            T bias_sum = 0;
            for (int r = 0; r < seg; ++r) {
                const T* g = &dy(o, row0 + r, 0);
                for (int q = 0; q < W; ++q) {
                    bias_sum += g[q];
                }
            }
            dbs[o] += bias_sum;
            for (int i = 0; i < c_in; ++i) {
                for (int u = 0; u < kernel; ++u) {
                    const int dy_off = u - half;
                    int y_lo, y_hi;
                    valid_range(dy_off, seg, y_lo, y_hi);
                    for (int v = 0; v < kernel; ++v) {
                        const int dx_off = v - half;
                        int x_lo, x_hi;
                        valid_range(dx_off, W, x_lo, x_hi);
                        if (y_lo >= y_hi || x_lo >= x_hi) {
                            continue;
                        }
                        const std::size_t widx = ((static_cast<std::size_t>(o) * c_in + i) * kernel + u) * kernel + v;
                        const T tap = ws[widx];
                        T acc = 0;
                        for (int r = y_lo; r < y_hi; ++r) {
                            const T* src = &x(i, row0 + r + dy_off, 0) + dx_off;
                            const T* g = &dy(o, row0 + r, 0);
                            T* dst = dx ? &(*dx)(i, row0 + r + dy_off, 0) + dx_off : nullptr;
                            for (int q = x_lo; q < x_hi; ++q) {
                                acc += g[q] * src[q];
                                if (dst) {
                                    dst[q] += tap * g[q];
                                }
                            }
                        }
                        dws[widx] += acc;
                    }
                }
            }
        }
    }
}

template <typename T>
Tensor3<T> layer_norm(const Tensor3<T>& x, const T* scale, const T* shift, LayerNormCache<T>* cache)
{
    const int C = x.channels;
    const std::size_t plane = x.plane();
    Tensor3<T> y(C, x.height, x.width);
    Tensor3<T> normalized(C, x.height, x.width);
    std::vector<T> rstd(plane);
    for (std::size_t p = 0; p < plane; ++p) {
        T mean = 0;
        for (int c = 0; c < C; ++c) {
            mean += x.values[c * plane + p];
        }
        mean /= static_cast<T>(C);
        T var = 0;
        for (int c = 0; c < C; ++c) {
            const T dev = x.values[c * plane + p] - mean;
            var += dev * dev;
        }
        var /= static_cast<T>(C);
        const T inv = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
        rstd[p] = inv;
        for (int c = 0; c < C; ++c) {
            const T n = (x.values[c * plane + p] - mean) * inv;
            normalized.values[c * plane + p] = n;
            y.values[c * plane + p] = n * scale[c] + shift[c];
        }
    }
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->rstd = std::move(rstd);
    }
    return y;
}

template <typename T>
void layer_norm_backward(const LayerNormCache<T>& cache, const Tensor3<T>& dy, const T* scale, T* dscale, T* dshift,
                         Tensor3<T>* dx)
{
    const auto& xn = cache.normalized;
    require(xn.same_shape(dy), "layer_norm_backward: shape mismatch");
    const int C = xn.channels;
    const std::size_t plane = xn.plane();
    std::vector<T> dxn(C);
    for (std::size_t p = 0; p < plane; ++p) {
        T mean_d = 0;
        T mean_dx = 0;
        for (int c = 0; c < C; ++c) {
            const T g = dy.values[c * plane + p];
            const T n = xn.values[c * plane + p];
            dscale[c] += g * n;
            dshift[c] += g;
            dxn[c] = g * scale[c];
            mean_d += dxn[c];
            mean_dx += dxn[c] * n;
        }
        if (!dx) {
            continue;
        }
        mean_d /= static_cast<T>(C);
        mean_dx /= static_cast<T>(C);
        const T inv = cache.rstd[p];
        for (int c = 0; c < C; ++c) {
            dx->values[c * plane + p] += inv * (dxn[c] - mean_d - xn.values[c * plane + p] * mean_dx);
        }
    }
}

template <typename T>
Tensor3<T> hadamard(const Tensor3<T>& a, const Tensor3<T>& b, OpCounter* ops)
{
    require_same_shape(a, b, "hadamard");
    Tensor3<T> out(a.channels, a.height, a.width);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.values[i] = a.values[i] * b.values[i];
    }
    if (ops) {
        ops->multiplies += a.size();
    }
    return out;
}

template <typename T>
void add_inplace(Tensor3<T>& a, const Tensor3<T>& b)
{
    require_same_shape(a, b, "add_inplace");
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.values[i] += b.values[i];
    }
}

template <typename T>
Tensor3<T> concat_rows(const std::vector<Tensor3<T>>& parts)
{
    require(!parts.empty(), "concat_rows: nothing to concatenate");
    int height = 0;
    for (const auto& p : parts) {
        require(p.channels == parts.front().channels && p.width == parts.front().width, "concat_rows: shape mismatch");
        height += p.height;
    }
    Tensor3<T> out(parts.front().channels, height, parts.front().width);
    int row = 0;
    for (const auto& p : parts) {
        out.set_rows(row, p);
        row += p.height;
    }
    return out;
}

#define NEARFIELD_LAYERS_INSTANTIATE(T)                                                                              \
    template Tensor3<T> pw_conv(const Tensor3<T>&, const T*, const T*, int, OpCounter*);                           \
    template void pw_conv_backward(const Tensor3<T>&, const Tensor3<T>&, const T*, T*, T*, Tensor3<T>*);           \
    template Tensor3<T> dw_conv(const Tensor3<T>&, const T*, const T*, int, int, OpCounter*);                      \
    template void dw_conv_backward(const Tensor3<T>&, const Tensor3<T>&, const T*, int, int, T*, T*, Tensor3<T>*); \
    template Tensor3<T> conv2d(const Tensor3<T>&, const T*, const T*, int, int, int, bool, OpCounter*);            \
    template void conv2d_backward(const Tensor3<T>&, const Tensor3<T>&, const T*, int, int, bool, T*, T*,          \
                                  Tensor3<T>*);                                                                    \
    template Tensor3<T> layer_norm(const Tensor3<T>&, const T*, const T*, LayerNormCache<T>*);                     \
    template void layer_norm_backward(const LayerNormCache<T>&, const Tensor3<T>&, const T*, T*, T*, Tensor3<T>*); \
    template Tensor3<T> hadamard(const Tensor3<T>&, const Tensor3<T>&, OpCounter*);                                \
    template void add_inplace(Tensor3<T>&, const Tensor3<T>&);                                                     \
    template Tensor3<T> concat_rows(const std::vector<Tensor3<T>>&);

NEARFIELD_LAYERS_INSTANTIATE(float)
NEARFIELD_LAYERS_INSTANTIATE(double)

}  // namespace nearfield::jssanet
