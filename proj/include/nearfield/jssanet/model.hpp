#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearfield/jssanet/layers.hpp"
#include "nearfield/partition_theory.hpp"

namespace nearfield::jssanet {

struct ModelConfig {
    int channels = 8;         // embedding width C
    int blocks = 2;           // JSSA blocks B
    int partitions = 2;       // subchannels M
    int dlkc_dw_kernel = 5;   // DLKC: (2d-1) depth-wise
    int dlkc_dwd_kernel = 5;  //       ⌈a/d⌉ dilated depth-wise
    int dlkc_dilation = 4;    //       dilation d
    int q_dw_kernel = 5;      // depth-wise kernel of the query branch
    int ffn_dw_kernel = 7;
    int conv_io_kernel = 3;   // Conv1 / Conv2
    bool use_dft = true;      // false gives the JSAnet ablation
    bool shared_conv1 = true;

    // C=8, B=2, M=2, DLKC 21: 5-5(4)-1.
    static ModelConfig desk();
    // C=20, B=3, M=2, DLKC 35: 7-9(4)-1.
    static ModelConfig full();

    // Throws std::invalid_argument (C ≤ 2, non-positive counts, even kernels, ...).
    void validate() const;
    // Throws std::invalid_argument unless partitions divides n_bs.
    void validate_for(int n_bs) const;

    bool operator==(const ModelConfig&) const = default;
};

enum class ParamInit { fan_in_uniform, zeros, ones, branch_output };

struct ParamEntry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
    ParamInit init = ParamInit::fan_in_uniform;
    int fan_in = 1;
};

// Flat parameter index: one contiguous vector, entries in creation order.
class ParamLayout {
public:
    std::size_t add(const std::string& name, std::vector<int> shape, ParamInit init, int fan_in = 1);
    // Throws std::out_of_range for an unknown name.
    const ParamEntry& find(const std::string& name) const;
    const std::vector<ParamEntry>& entries() const { return entries_; }
    std::size_t size() const { return total_; }

private:
    std::vector<ParamEntry> entries_;
    std::size_t total_ = 0;
};

struct PwRef {
    std::size_t w = 0, b = 0;
    int c_in = 0, c_out = 0;
};
struct DwRef {
    std::size_t w = 0, b = 0;
    int channels = 0, kernel = 1, dilation = 1;
};
struct ConvRef {
    std::size_t w = 0, b = 0;
    int c_in = 0, c_out = 0, kernel = 1;
    bool per_segment = false;
};
struct LnRef {
    std::size_t scale = 0, shift = 0;
    int channels = 0;
};
struct DlkcRef {
    DwRef dw, dwd;
    PwRef pw;
};
struct SegmentRef {
    PwRef q_pw;
    DwRef q_dw;
    PwRef k_pw;
    DlkcRef k_dlkc;
    PwRef v_pw;
};
struct JssaRef {
    std::vector<SegmentRef> segments;
    PwRef fuse;
};
struct FfnRef {
    PwRef gate_pw, value_pw;
    DwRef dw;
};
struct BlockRef {
    LnRef ln1;
    JssaRef jssa;
    LnRef ln2;
    FfnRef ffn;
};
struct TailRef {
    PwRef pw_in;
    DlkcRef dlkc;
    PwRef pw_out;
};

struct ModelLayout {
    ModelConfig config;
    ParamLayout params;
    ConvRef conv1;
    std::vector<BlockRef> blocks;
    TailRef tail;
    ConvRef conv2;
};

ModelLayout build_layout(const ModelConfig& config);

// Fan-in uniform U(±1/√fan_in) for weights and biases, LN scale 1 / shift 0. With
// zero_branch_outputs the output layers of every residual branch (JSSA fusion, FFN gate,
// Conv2) start at zero so the network is the identity map.
template <typename T>
std::vector<T> initialize_params(const ModelLayout& layout, std::uint64_t seed, bool zero_branch_outputs = true);

template <typename T>
struct Model {
    ModelLayout layout;
    std::vector<T> values;

    Model() = default;
    Model(const ModelConfig& config, std::uint64_t seed, bool zero_branch_outputs = true)
        : layout(build_layout(config)), values(initialize_params<T>(layout, seed, zero_branch_outputs))
    {
    }
    const ModelConfig& config() const { return layout.config; }
};

template <typename T>
struct DlkcCache {
    Tensor3<T> in, a, b;
};

template <typename T>
struct SegmentCache {
    Tensor3<T> x, qp, q, kp, k, v;
    DlkcCache<T> kc;
};

template <typename T>
struct JssaCache {
    std::vector<SegmentCache<T>> segments;
    Tensor3<T> p;  // concatenated pre-fusion projections
};

template <typename T>
struct FfnCache {
    Tensor3<T> x, g, vp, vd;
};

template <typename T>
struct TailCache {
    Tensor3<T> x, u, kd, w;
    DlkcCache<T> kc;
};

template <typename T>
struct BlockCache {
    LayerNormCache<T> ln1, ln2;
    JssaCache<T> jssa;
    FfnCache<T> ffn;
};

template <typename T>
struct ForwardCache {
    Tensor3<T> f0;  // angular-domain input
    Tensor3<T> f1;  // embedded features
    std::vector<BlockCache<T>> blocks;
    TailCache<T> tail;
    Tensor3<T> tail_out;
    bool use_dft = true;
};

template <typename T>
Tensor3<T> dlkc(const Tensor3<T>& x, const T* params, const DlkcRef& ref, DlkcCache<T>* cache = nullptr,
                OpCounter* ops = nullptr);
template <typename T>
void dlkc_backward(const DlkcCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const DlkcRef& ref,
                   Tensor3<T>* dx);

// Per-segment Q⊙K⊙V with separate parameters, then a point-wise fusion. When maps is
// given it receives the attention map Q_i⊙K_i of every segment.
template <typename T>
Tensor3<T> jssa_layer(const Tensor3<T>& x, const T* params, const JssaRef& ref, JssaCache<T>* cache = nullptr,
                      OpCounter* ops = nullptr, std::vector<Tensor3<T>>* maps = nullptr);
template <typename T>
void jssa_backward(const JssaCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const JssaRef& ref,
                   Tensor3<T>* dx);

// gate_pw(x) ⊙ dw(value_pw(x)).
template <typename T>
Tensor3<T> ffn_layer(const Tensor3<T>& x, const T* params, const FfnRef& ref, FfnCache<T>* cache = nullptr,
                     OpCounter* ops = nullptr);
template <typename T>
void ffn_backward(const FfnCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const FfnRef& ref,
                  Tensor3<T>* dx);

// pw_out(u ⊙ dlkc(u)) with u = pw_in(x).
template <typename T>
Tensor3<T> refine_tail(const Tensor3<T>& x, const T* params, const TailRef& ref, TailCache<T>* cache = nullptr,
                       OpCounter* ops = nullptr);
template <typename T>
void tail_backward(const TailCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const TailRef& ref,
                   Tensor3<T>* dx);

// Input and output are (2, n_bs, K) real/imag tensors. Throws std::invalid_argument on
// a shape/config mismatch. The domain maps follow config().use_dft.
template <typename T>
Tensor3<T> forward(const Model<T>& model, const Tensor3<T>& x, ForwardCache<T>* cache = nullptr,
                   OpCounter* ops = nullptr);
// Same parameters with the DFT/IDFT replaced by identity maps.
template <typename T>
Tensor3<T> jsanet_forward(const Model<T>& model, const Tensor3<T>& x, ForwardCache<T>* cache = nullptr);

// Accumulates dLoss/dθ into grads (size = parameter count) given dLoss/dOutput.
template <typename T>
void backward(const Model<T>& model, const ForwardCache<T>& cache, const Tensor3<T>& d_out, T* grads);

// ‖X_est - X_gt‖²_F; when grads is non-null also accumulates scale·∇ of that loss.
template <typename T>
double sample_loss(const Model<T>& model, const Tensor3<T>& x, const Tensor3<T>& target, T* grads = nullptr,
                   T scale = T(1));

}  // namespace nearfield::jssanet
