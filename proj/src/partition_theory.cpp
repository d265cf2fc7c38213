#include "nearfield/partition_theory.hpp"

#include <cmath>
#include <stdexcept>

namespace nearfield {

namespace {

// ceil/floor that treat values within 1e-12 relative of an integer as that integer, so
// exact radicands such as 1 are not pushed across by rounding.
double snap(double v)
{
    const double nearest = std::round(v);
    return std::abs(v - nearest) <= 1e-12 * std::max(1.0, std::abs(v)) ? nearest : v;
}

}  // namespace

PartitionPlan make_partition(int n_bs, int M)
{
    if (M < 1 || n_bs < 1 || n_bs % M != 0) {
        throw std::invalid_argument("make_partition: M must be a positive divisor of n_bs");
    }
    PartitionPlan plan;
    plan.M = M;
    plan.N = n_bs / M;
    plan.ref_indices.reserve(M);
    for (int i = 1; i <= M; ++i) {
        plan.ref_indices.push_back(i * plan.N - plan.N / 2 - 1);
    }
    return plan;
}

PiecewiseParams piecewise_params(double theta0, double r0, const PartitionPlan& plan, const SystemConfig& config)
{
    if (!(std::abs(theta0) < 1.0) || !(r0 > 0.0)) {
        throw std::domain_error("piecewise_params: need |theta0| < 1 and r0 > 0");
    }
    if (plan.n_bs() != config.n_bs) {
        throw std::invalid_argument("piecewise_params: plan does not cover the array");
    }
    const double x = r0 * std::sqrt(1.0 - theta0 * theta0);
    const double y = r0 * theta0;
    PiecewiseParams out;
    for (int n : plan.ref_indices) {
        const double dy = y - element_offset(n, config.n_bs) * config.d;
        const double rn = std::hypot(x, dy);
        out.r_tilde.push_back(rn);
        out.theta_tilde.push_back(dy / rn);
        out.p_tilde.push_back(-(2.0 / config.wavelength()) * (rn - r0));
    }
    return out;
}

ComplexVector piecewise_arv(double theta0, double r0, const PartitionPlan& plan, const SystemConfig& config)
{
    const auto params = piecewise_params(theta0, r0, plan, config);
    ComplexVector out(config.n_bs);
    const double scale = std::sqrt(static_cast<double>(plan.N) / config.n_bs);
    for (int i = 0; i < plan.M; ++i) {
        const int m_ref = plan.ref_indices[i] - plan.first(i);
        const double offset = params.p_tilde[i] - m_ref * params.theta_tilde[i];
        out.segment(plan.first(i), plan.N) =
            (scale * std::polar(1.0, kPi * offset)) * fourier_vector(params.theta_tilde[i], plan.N);
    }
    return out;
}

Complex similarity(double theta0, double r0, int M, const SystemConfig& config, SimilarityMode mode)
{
    const auto plan = make_partition(config.n_bs, M);
    if (mode == SimilarityMode::direct) {
        const ComplexVector b = piecewise_arv(theta0, r0, plan, config);
        const ComplexVector a = near_field_arv(theta0, r0, config, ArvMode::exact);
        return b.dot(a);  // Eigen's dot conjugates the first argument
    }
    const auto params = piecewise_params(theta0, r0, plan, config);
    Complex sum{0.0, 0.0};
    for (int i = 0; i < plan.M; ++i) {
        const double t = params.theta_tilde[i];
        const double a = (1.0 - t * t) * config.d / (2.0 * params.r_tilde[i]);
        const double root = std::sqrt(2.0 * a);
        const auto f = fresnel(0.5 * plan.N * root);
        sum += (2.0 / (config.n_bs * root)) * Complex(f.c, -f.s);
    }
    return sum;
}

double theorem1_bound(const SystemConfig& config)
{
    if (!(config.r_min > 0.0)) {
        throw std::invalid_argument("theorem1: r_min must be positive");
    }
    return std::sqrt(config.d / config.r_min) * config.n_bs / 4.0;
}

int theorem1_min_m(const SystemConfig& config)
{
    return static_cast<int>(std::ceil(snap(theorem1_bound(config))));
}

double theorem2_bound(const SystemConfig& config, double theta_sec)
{
    if (!(theta_sec >= 0.0 && theta_sec < 1.0)) {
        throw std::invalid_argument("theorem2: theta_sec must lie in [0, 1)");
    }
    if (!(config.r_min > 0.0)) {
        throw std::invalid_argument("theorem2: r_min must be positive");
    }
    return std::sqrt((1.0 - theta_sec * theta_sec) * config.d / (2.0 * config.r_min)) * config.n_bs;
}

int theorem2_max_m(const SystemConfig& config, double theta_sec)
{
    return static_cast<int>(std::floor(snap(theorem2_bound(config, theta_sec))));
}

int smallest_divisor_at_least(int n, int lower)
{
    if (n < 1) {
        throw std::invalid_argument("smallest_divisor_at_least: n must be positive");
    }
    for (int m = std::max(1, lower); m < n; ++m) {
        if (n % m == 0) {
            return m;
        }
    }
    return n;
}

BeamPattern beam_pattern(double theta_tilde, int N)
{
    if (!(std::abs(theta_tilde) < 1.0)) {
        throw std::domain_error("beam_pattern: |theta| must be below 1");
    }
    if (N < 1) {
        throw std::invalid_argument("beam_pattern: N must be positive");
    }
    BeamPattern out;
    out.values.resize(N);
    out.power.resize(N);
    for (int n = 0; n < N; ++n) {
        const double v = dirichlet_sinc(0.5 * (theta_tilde - dft_grid_point(n, N)), N);
        out.values[n] = v;
        out.power[n] = v * v;
        if (out.power[n] > out.power[out.argmax]) {
            out.argmax = n;
        }
    }
    return out;
}

template <typename T>
SubchannelTransform<T>::SubchannelTransform(int N) : n_(N)
{
    const ComplexMatrix phi = dft_matrix(N);
    re_.resize(static_cast<std::size_t>(N) * N);
    im_.resize(re_.size());
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            re_[static_cast<std::size_t>(r) * N + c] = static_cast<T>(phi(r, c).real());
            im_[static_cast<std::size_t>(r) * N + c] = static_cast<T>(phi(r, c).imag());
        }
    }
}

template <typename T>
Tensor3<T> SubchannelTransform<T>::apply(const Tensor3<T>& x, bool adjoint) const
{
    if (x.channels != 2) {
        throw std::invalid_argument("subchannel transform: expected (re, im) channels");
    }
    if (x.height % n_ != 0) {
        throw std::invalid_argument("subchannel transform: subarray size does not divide the antenna count");
    }
    const int width = x.width;
    Tensor3<T> out(2, x.height, width);
    for (int block = 0; block < x.height / n_; ++block) {
        const int base = block * n_;
        for (int out_row = 0; out_row < n_; ++out_row) {
            T* out_re = &out(0, base + out_row, 0);
            T* out_im = &out(1, base + out_row, 0);
            for (int in_row = 0; in_row < n_; ++in_row) {
                // Forward uses Φᴴ(out_row, in_row) = conj Φ(in_row, out_row).
                const std::size_t idx = adjoint ? static_cast<std::size_t>(in_row) * n_ + out_row
                                                : static_cast<std::size_t>(out_row) * n_ + in_row;
                const T pr = re_[idx];
                const T pi = adjoint ? -im_[idx] : im_[idx];
                const T* in_re = &x(0, base + in_row, 0);
                const T* in_im = &x(1, base + in_row, 0);
                for (int k = 0; k < width; ++k) {
                    out_re[k] += pr * in_re[k] - pi * in_im[k];
                    out_im[k] += pr * in_im[k] + pi * in_re[k];
                }
            }
        }
    }
    return out;
}

template <typename T>
Tensor3<T> SubchannelTransform<T>::forward(const Tensor3<T>& x) const
{
    return apply(x, true);
}

template <typename T>
Tensor3<T> SubchannelTransform<T>::inverse(const Tensor3<T>& x) const
{
    return apply(x, false);
}

template <typename T>
Tensor3<T> dft_subchannels(const Tensor3<T>& x, const PartitionPlan& plan)
{
    if (x.height != plan.n_bs()) {
        throw std::invalid_argument("dft_subchannels: tensor height differs from the plan");
    }
    return SubchannelTransform<T>(plan.N).forward(x);
}

template <typename T>
Tensor3<T> idft_subchannels(const Tensor3<T>& x, const PartitionPlan& plan)
{
    if (x.height != plan.n_bs()) {
        throw std::invalid_argument("idft_subchannels: tensor height differs from the plan");
    }
    return SubchannelTransform<T>(plan.N).inverse(x);
}

template <typename T>
Tensor3<T> to_tensor(const ComplexMatrix& m)
{
    Tensor3<T> t(2, static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int r = 0; r < t.height; ++r) {
        for (int c = 0; c < t.width; ++c) {
            t(0, r, c) = static_cast<T>(m(r, c).real());
            t(1, r, c) = static_cast<T>(m(r, c).imag());
        }
    }
    return t;
}

template <typename T>
ComplexMatrix from_tensor(const Tensor3<T>& t)
{
    if (t.channels != 2) {
        throw std::invalid_argument("from_tensor: expected (re, im) channels");
    }
    ComplexMatrix m(t.height, t.width);
    for (int r = 0; r < t.height; ++r) {
        for (int c = 0; c < t.width; ++c) {
            m(r, c) = Complex(static_cast<double>(t(0, r, c)), static_cast<double>(t(1, r, c)));
        }
    }
    return m;
}

template class SubchannelTransform<float>;
template class SubchannelTransform<double>;
template Tensor3<float> dft_subchannels(const Tensor3<float>&, const PartitionPlan&);
template Tensor3<double> dft_subchannels(const Tensor3<double>&, const PartitionPlan&);
template Tensor3<float> idft_subchannels(const Tensor3<float>&, const PartitionPlan&);
template Tensor3<double> idft_subchannels(const Tensor3<double>&, const PartitionPlan&);
template Tensor3<float> to_tensor(const ComplexMatrix&);
template Tensor3<double> to_tensor(const ComplexMatrix&);
template ComplexMatrix from_tensor(const Tensor3<float>&);
template ComplexMatrix from_tensor(const Tensor3<double>&);

}  // namespace nearfield
