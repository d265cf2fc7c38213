#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nearfield {

// Dense real 3-D tensor in channel-major layout: value(c, y, x) lives at
// (c·height + y)·width + x. Height indexes antennas (or angular bins), width
// indexes subcarriers, channels are feature maps (2 = real/imag for channel data).
template <typename T>
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<T> values;

    Tensor3() = default;
    Tensor3(int c, int h, int w, T fill = T(0))
        : channels(c), height(h), width(w), values(static_cast<std::size_t>(c) * h * w, fill)
    {
        if (c < 0 || h < 0 || w < 0) {
            throw std::invalid_argument("Tensor3: negative dimension");
        }
    }

    std::size_t size() const { return values.size(); }
    std::size_t plane() const { return static_cast<std::size_t>(height) * width; }

    T& operator()(int c, int y, int x) { return values[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    const T& operator()(int c, int y, int x) const { return values[(static_cast<std::size_t>(c) * height + y) * width + x]; }

    std::span<T> channel(int c) { return {values.data() + c * plane(), plane()}; }
    std::span<const T> channel(int c) const { return {values.data() + c * plane(), plane()}; }

    bool same_shape(const Tensor3& o) const { return channels == o.channels && height == o.height && width == o.width; }

    void fill(T v) { std::fill(values.begin(), values.end(), v); }

    // Rows [row_begin, row_begin + rows) of every channel.
    Tensor3 rows(int row_begin, int rows) const
    {
        Tensor3 out(channels, rows, width);
        for (int c = 0; c < channels; ++c) {
            const auto* src = &(*this)(c, row_begin, 0);
            std::copy(src, src + static_cast<std::size_t>(rows) * width, &out(c, 0, 0));
        }
        return out;
    }

    void set_rows(int row_begin, const Tensor3& block)
    {
        for (int c = 0; c < channels; ++c) {
            const auto* src = &block(c, 0, 0);
            std::copy(src, src + block.plane(), &(*this)(c, row_begin, 0));
        }
    }

    template <typename U>
    Tensor3<U> cast() const
    {
        Tensor3<U> out(channels, height, width);
        std::transform(values.begin(), values.end(), out.values.begin(), [](T v) { return static_cast<U>(v); });
        return out;
    }
};

template <typename T>
inline void require_same_shape(const Tensor3<T>& a, const Tensor3<T>& b, const char* what)
{
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": tensor shape mismatch");
    }
}

}  // namespace nearfield
