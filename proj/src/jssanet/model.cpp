#include "nearfield/jssanet/model.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "nearfield/rng.hpp"

namespace nearfield::jssanet {

ModelConfig ModelConfig::desk()
{
    return ModelConfig{};
}

ModelConfig ModelConfig::full()
{
    ModelConfig c;
    c.channels = 20;
    c.blocks = 3;
    c.partitions = 2;
    c.dlkc_dw_kernel = 7;
    c.dlkc_dwd_kernel = 9;
    c.dlkc_dilation = 4;
    c.q_dw_kernel = 7;
    return c;
}

void ModelConfig::validate() const
{
    auto odd = [](int k) { return k >= 1 && k % 2 == 1; };
    if (channels <= 2) {
        throw std::invalid_argument("model: channels must exceed 2");
    }
    if (blocks < 1 || partitions < 1) {
        throw std::invalid_argument("model: blocks and partitions must be positive");
    }
    if (!odd(dlkc_dw_kernel) || !odd(dlkc_dwd_kernel) || !odd(q_dw_kernel) || !odd(ffn_dw_kernel) ||
        !odd(conv_io_kernel)) {
        throw std::invalid_argument("model: kernel sizes must be odd and positive");
    }
    if (dlkc_dilation < 1) {
        throw std::invalid_argument("model: dilation must be positive");
    }
}

void ModelConfig::validate_for(int n_bs) const
{
    validate();
    if (n_bs < partitions || n_bs % partitions != 0) {
        throw std::invalid_argument("model: partitions must divide the antenna count");
    }
}

std::size_t ParamLayout::add(const std::string& name, std::vector<int> shape, ParamInit init, int fan_in)
{
    for (const auto& e : entries_) {
        if (e.name == name) {
            throw std::logic_error("ParamLayout: duplicate parameter " + name);
        }
    }
    std::size_t size = 1;
    for (int d : shape) {
        size *= static_cast<std::size_t>(d);
    }
    entries_.push_back({name, std::move(shape), total_, size, init, fan_in});
    total_ += size;
    return entries_.back().offset;
}

const ParamEntry& ParamLayout::find(const std::string& name) const
{
    for (const auto& e : entries_) {
        if (e.name == name) {
            return e;
        }
    }
    throw std::out_of_range("ParamLayout: unknown parameter " + name);
}

namespace {

PwRef add_pw(ParamLayout& p, const std::string& name, int c_in, int c_out, ParamInit init = ParamInit::fan_in_uniform)
{
    PwRef r;
    r.c_in = c_in;
    r.c_out = c_out;
    r.w = p.add(name + ".weight", {c_out, c_in}, init, c_in);
    r.b = p.add(name + ".bias", {c_out}, init, c_in);
    return r;
}

DwRef add_dw(ParamLayout& p, const std::string& name, int channels, int kernel, int dilation)
{
    DwRef r;
    r.channels = channels;
    r.kernel = kernel;
    r.dilation = dilation;
    r.w = p.add(name + ".weight", {channels, kernel, kernel}, ParamInit::fan_in_uniform, kernel * kernel);
    r.b = p.add(name + ".bias", {channels}, ParamInit::fan_in_uniform, kernel * kernel);
    return r;
}

ConvRef add_conv(ParamLayout& p, const std::string& name, int c_in, int c_out, int kernel, int copies, ParamInit init)
{
    ConvRef r;
    r.c_in = c_in;
    r.c_out = c_out;
    r.kernel = kernel;
    r.per_segment = copies > 1;
    const int fan_in = c_in * kernel * kernel;
    if (copies > 1) {
        r.w = p.add(name + ".weight", {copies, c_out, c_in, kernel, kernel}, init, fan_in);
        r.b = p.add(name + ".bias", {copies, c_out}, init, fan_in);
    } else {
        r.w = p.add(name + ".weight", {c_out, c_in, kernel, kernel}, init, fan_in);
        r.b = p.add(name + ".bias", {c_out}, init, fan_in);
    }
    return r;
}

LnRef add_ln(ParamLayout& p, const std::string& name, int channels)
{
    LnRef r;
    r.channels = channels;
    r.scale = p.add(name + ".scale", {channels}, ParamInit::ones);
    r.shift = p.add(name + ".shift", {channels}, ParamInit::zeros);
    return r;
}

DlkcRef add_dlkc(ParamLayout& p, const std::string& name, const ModelConfig& c)
{
    DlkcRef r;
    r.dw = add_dw(p, name + ".dw", c.channels, c.dlkc_dw_kernel, 1);
    r.dwd = add_dw(p, name + ".dwd", c.channels, c.dlkc_dwd_kernel, c.dlkc_dilation);
    r.pw = add_pw(p, name + ".pw", c.channels, c.channels);
    return r;
}

template <typename T>
void add_rows(Tensor3<T>& dst, int row0, const Tensor3<T>& src)
{
    for (int c = 0; c < src.channels; ++c) {
        const T* s = &src(c, 0, 0);
        T* d = &dst(c, row0, 0);
        for (std::size_t i = 0; i < src.plane(); ++i) {
            d[i] += s[i];
        }
    }
}

template <typename T>
const SubchannelTransform<T>& transform_for(int n)
{
    thread_local std::unique_ptr<SubchannelTransform<T>> cached;
    if (!cached || cached->N() != n) {
        cached = std::make_unique<SubchannelTransform<T>>(n);
    }
    return *cached;
}

}  // namespace

ModelLayout build_layout(const ModelConfig& config)
{
    config.validate();
    ModelLayout l;
    l.config = config;
    auto& p = l.params;
    const int C = config.channels;
    l.conv1 = add_conv(p, "conv1", 2, C, config.conv_io_kernel, config.shared_conv1 ? 1 : config.partitions,
                       ParamInit::fan_in_uniform);
    for (int b = 0; b < config.blocks; ++b) {
        const std::string pre = "block" + std::to_string(b);
        BlockRef blk;
        blk.ln1 = add_ln(p, pre + ".ln1", C);
        for (int i = 0; i < config.partitions; ++i) {
            const std::string seg = pre + ".jssa.seg" + std::to_string(i);
            SegmentRef s;
            s.q_pw = add_pw(p, seg + ".q_pw", C, C);
            s.q_dw = add_dw(p, seg + ".q_dw", C, config.q_dw_kernel, 1);
            s.k_pw = add_pw(p, seg + ".k_pw", C, C);
            s.k_dlkc = add_dlkc(p, seg + ".k_dlkc", config);
            s.v_pw = add_pw(p, seg + ".v_pw", C, C);
            blk.jssa.segments.push_back(s);
        }
        blk.jssa.fuse = add_pw(p, pre + ".jssa.fuse", C, C, ParamInit::branch_output);
        blk.ln2 = add_ln(p, pre + ".ln2", C);
        blk.ffn.gate_pw = add_pw(p, pre + ".ffn.gate_pw", C, C, ParamInit::branch_output);
        blk.ffn.value_pw = add_pw(p, pre + ".ffn.value_pw", C, C);
        blk.ffn.dw = add_dw(p, pre + ".ffn.dw", C, config.ffn_dw_kernel, 1);
        l.blocks.push_back(std::move(blk));
    }
    l.tail.pw_in = add_pw(p, "tail.pw_in", C, C);
    l.tail.dlkc = add_dlkc(p, "tail.dlkc", config);
    l.tail.pw_out = add_pw(p, "tail.pw_out", C, C);
    l.conv2 = add_conv(p, "conv2", C, 2, config.conv_io_kernel, 1, ParamInit::branch_output);
    return l;
}

template <typename T>
std::vector<T> initialize_params(const ModelLayout& layout, std::uint64_t seed, bool zero_branch_outputs)
{
    std::vector<T> values(layout.params.size());
    SeededRng rng(seed);
    for (const auto& e : layout.params.entries()) {
        T* v = values.data() + e.offset;
        ParamInit init = e.init;
        if (init == ParamInit::branch_output) {
            init = zero_branch_outputs ? ParamInit::zeros : ParamInit::fan_in_uniform;
        }
        const double bound = 1.0 / std::sqrt(static_cast<double>(e.fan_in));
        for (std::size_t i = 0; i < e.size; ++i) {
            switch (init) {
            case ParamInit::zeros: v[i] = T(0); break;
            case ParamInit::ones: v[i] = T(1); break;
            default: v[i] = static_cast<T>(rng.uniform(-bound, bound)); break;
            }
        }
    }
    return values;
}

template <typename T>
Tensor3<T> dlkc(const Tensor3<T>& x, const T* params, const DlkcRef& ref, DlkcCache<T>* cache, OpCounter* ops)
{
    Tensor3<T> a = dw_conv(x, params + ref.dw.w, params + ref.dw.b, ref.dw.kernel, 1, ops);
    Tensor3<T> b = dw_conv(a, params + ref.dwd.w, params + ref.dwd.b, ref.dwd.kernel, ref.dwd.dilation, ops);
    Tensor3<T> out = pw_conv(b, params + ref.pw.w, params + ref.pw.b, ref.pw.c_out, ops);
    if (cache) {
        cache->in = x;
        cache->a = std::move(a);
        cache->b = std::move(b);
    }
    return out;
}

template <typename T>
void dlkc_backward(const DlkcCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const DlkcRef& ref,
                   Tensor3<T>* dx)
{
    Tensor3<T> db(cache.b.channels, cache.b.height, cache.b.width);
    pw_conv_backward(cache.b, dy, params + ref.pw.w, grads + ref.pw.w, grads + ref.pw.b, &db);
    Tensor3<T> da(cache.a.channels, cache.a.height, cache.a.width);
    dw_conv_backward(cache.a, db, params + ref.dwd.w, ref.dwd.kernel, ref.dwd.dilation, grads + ref.dwd.w,
                     grads + ref.dwd.b, &da);
    dw_conv_backward(cache.in, da, params + ref.dw.w, ref.dw.kernel, 1, grads + ref.dw.w, grads + ref.dw.b, dx);
}

template <typename T>
Tensor3<T> jssa_layer(const Tensor3<T>& x, const T* params, const JssaRef& ref, JssaCache<T>* cache, OpCounter* ops,
                      std::vector<Tensor3<T>>* maps)
{
    const int M = static_cast<int>(ref.segments.size());
    if (M < 1 || x.height % M != 0) {
        throw std::invalid_argument("jssa_layer: partition count must divide the height");
    }
    const int N = x.height / M;
    if (cache) {
        cache->segments.assign(M, {});
    }
    if (maps) {
        maps->clear();
    }
    std::vector<Tensor3<T>> parts;
    parts.reserve(M);
    for (int i = 0; i < M; ++i) {
        const auto& s = ref.segments[i];
        Tensor3<T> xs = x.rows(i * N, N);
        Tensor3<T> qp = pw_conv(xs, params + s.q_pw.w, params + s.q_pw.b, s.q_pw.c_out, ops);
        Tensor3<T> q = dw_conv(qp, params + s.q_dw.w, params + s.q_dw.b, s.q_dw.kernel, 1, ops);
        Tensor3<T> kp = pw_conv(xs, params + s.k_pw.w, params + s.k_pw.b, s.k_pw.c_out, ops);
        DlkcCache<T>* kc = cache ? &cache->segments[i].kc : nullptr;
        Tensor3<T> k = dlkc(kp, params, s.k_dlkc, kc, ops);
        Tensor3<T> v = pw_conv(xs, params + s.v_pw.w, params + s.v_pw.b, s.v_pw.c_out, ops);
        Tensor3<T> attn = hadamard(q, k, ops);
        parts.push_back(hadamard(attn, v, ops));
        if (maps) {
            maps->push_back(std::move(attn));
        }
        if (cache) {
            auto& sc = cache->segments[i];
            sc.x = std::move(xs);
            sc.qp = std::move(qp);
            sc.q = std::move(q);
            sc.kp = std::move(kp);
            sc.k = std::move(k);
            sc.v = std::move(v);
        }
    }
    Tensor3<T> p = concat_rows(parts);
    Tensor3<T> out = pw_conv(p, params + ref.fuse.w, params + ref.fuse.b, ref.fuse.c_out, ops);
    if (cache) {
        cache->p = std::move(p);
    }
    return out;
}

template <typename T>
void jssa_backward(const JssaCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const JssaRef& ref,
                   Tensor3<T>* dx)
{
    Tensor3<T> dp(cache.p.channels, cache.p.height, cache.p.width);
    pw_conv_backward(cache.p, dy, params + ref.fuse.w, grads + ref.fuse.w, grads + ref.fuse.b, &dp);
    const int M = static_cast<int>(ref.segments.size());
    const int N = cache.p.height / M;
    for (int i = 0; i < M; ++i) {
        const auto& s = ref.segments[i];
        const auto& sc = cache.segments[i];
        const Tensor3<T> dpi = dp.rows(i * N, N);
        Tensor3<T> dq(sc.q.channels, N, sc.q.width);
        Tensor3<T> dk(dq.channels, N, dq.width);
        Tensor3<T> dv(dq.channels, N, dq.width);
        for (std::size_t j = 0; j < dpi.size(); ++j) {
            const T g = dpi.values[j];
            dq.values[j] = g * sc.k.values[j] * sc.v.values[j];
            dk.values[j] = g * sc.q.values[j] * sc.v.values[j];
            dv.values[j] = g * sc.q.values[j] * sc.k.values[j];
        }
        Tensor3<T> dxs(sc.x.channels, N, sc.x.width);
        Tensor3<T> dqp(sc.qp.channels, N, sc.qp.width);
        dw_conv_backward(sc.qp, dq, params + s.q_dw.w, s.q_dw.kernel, 1, grads + s.q_dw.w, grads + s.q_dw.b, &dqp);
        pw_conv_backward(sc.x, dqp, params + s.q_pw.w, grads + s.q_pw.w, grads + s.q_pw.b, &dxs);
        Tensor3<T> dkp(sc.kp.channels, N, sc.kp.width);
        dlkc_backward(sc.kc, dk, params, grads, s.k_dlkc, &dkp);
        pw_conv_backward(sc.x, dkp, params + s.k_pw.w, grads + s.k_pw.w, grads + s.k_pw.b, &dxs);
        pw_conv_backward(sc.x, dv, params + s.v_pw.w, grads + s.v_pw.w, grads + s.v_pw.b, &dxs);
        if (dx) {
            add_rows(*dx, i * N, dxs);
        }
    }
}

template <typename T>
Tensor3<T> ffn_layer(const Tensor3<T>& x, const T* params, const FfnRef& ref, FfnCache<T>* cache, OpCounter* ops)
{
    Tensor3<T> g = pw_conv(x, params + ref.gate_pw.w, params + ref.gate_pw.b, ref.gate_pw.c_out, ops);
    Tensor3<T> vp = pw_conv(x, params + ref.value_pw.w, params + ref.value_pw.b, ref.value_pw.c_out, ops);
    Tensor3<T> vd = dw_conv(vp, params + ref.dw.w, params + ref.dw.b, ref.dw.kernel, 1, ops);
    Tensor3<T> out = hadamard(g, vd, ops);
    if (cache) {
        cache->x = x;
        cache->g = std::move(g);
        cache->vp = std::move(vp);
        cache->vd = std::move(vd);
    }
    return out;
}

template <typename T>
void ffn_backward(const FfnCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const FfnRef& ref,
                  Tensor3<T>* dx)
{
    Tensor3<T> dg(dy.channels, dy.height, dy.width);
    Tensor3<T> dvd(dy.channels, dy.height, dy.width);
    for (std::size_t j = 0; j < dy.size(); ++j) {
        dg.values[j] = dy.values[j] * cache.vd.values[j];
        dvd.values[j] = dy.values[j] * cache.g.values[j];
    }
    Tensor3<T> dvp(cache.vp.channels, cache.vp.height, cache.vp.width);
    dw_conv_backward(cache.vp, dvd, params + ref.dw.w, ref.dw.kernel, 1, grads + ref.dw.w, grads + ref.dw.b, &dvp);
    pw_conv_backward(cache.x, dvp, params + ref.value_pw.w, grads + ref.value_pw.w, grads + ref.value_pw.b, dx);
    pw_conv_backward(cache.x, dg, params + ref.gate_pw.w, grads + ref.gate_pw.w, grads + ref.gate_pw.b, dx);
}

template <typename T>
Tensor3<T> refine_tail(const Tensor3<T>& x, const T* params, const TailRef& ref, TailCache<T>* cache, OpCounter* ops)
{
    Tensor3<T> u = pw_conv(x, params + ref.pw_in.w, params + ref.pw_in.b, ref.pw_in.c_out, ops);
    DlkcCache<T>* kc = cache ? &cache->kc : nullptr;
    Tensor3<T> kd = dlkc(u, params, ref.dlkc, kc, ops);
    Tensor3<T> w = hadamard(u, kd, ops);
    Tensor3<T> out = pw_conv(w, params + ref.pw_out.w, params + ref.pw_out.b, ref.pw_out.c_out, ops);
    if (cache) {
        cache->x = x;
        cache->u = std::move(u);
        cache->kd = std::move(kd);
        cache->w = std::move(w);
    }
    return out;
}

template <typename T>
void tail_backward(const TailCache<T>& cache, const Tensor3<T>& dy, const T* params, T* grads, const TailRef& ref,
                   Tensor3<T>* dx)
{
    Tensor3<T> dw(cache.w.channels, cache.w.height, cache.w.width);
    pw_conv_backward(cache.w, dy, params + ref.pw_out.w, grads + ref.pw_out.w, grads + ref.pw_out.b, &dw);
    Tensor3<T> du(dw.channels, dw.height, dw.width);
    Tensor3<T> dkd(dw.channels, dw.height, dw.width);
    for (std::size_t j = 0; j < dw.size(); ++j) {
        du.values[j] = dw.values[j] * cache.kd.values[j];
        dkd.values[j] = dw.values[j] * cache.u.values[j];
    }
    dlkc_backward(cache.kc, dkd, params, grads, ref.dlkc, &du);
    pw_conv_backward(cache.x, du, params + ref.pw_in.w, grads + ref.pw_in.w, grads + ref.pw_in.b, dx);
}

namespace {

template <typename T>
Tensor3<T> forward_impl(const Model<T>& model, const Tensor3<T>& x, bool use_dft, ForwardCache<T>* cache,
                        OpCounter* ops)
{
    const auto& l = model.layout;
    const auto& cfg = l.config;
    if (x.channels != 2) {
        throw std::invalid_argument("forward: input must have (re, im) channels");
    }
    if (model.values.size() != l.params.size()) {
        throw std::invalid_argument("forward: parameter vector does not match the layout");
    }
    cfg.validate_for(x.height);
    const int N = x.height / cfg.partitions;
    const T* p = model.values.data();

    Tensor3<T> f0 = use_dft ? transform_for<T>(N).forward(x) : x;
    Tensor3<T> X = conv2d(f0, p + l.conv1.w, p + l.conv1.b, l.conv1.c_out, l.conv1.kernel, N, l.conv1.per_segment, ops);
    if (cache) {
        cache->use_dft = use_dft;
        cache->blocks.assign(l.blocks.size(), {});
        cache->f1 = X;
    }
    for (std::size_t b = 0; b < l.blocks.size(); ++b) {
        const auto& blk = l.blocks[b];
        BlockCache<T>* bc = cache ? &cache->blocks[b] : nullptr;
        Tensor3<T> a = layer_norm(X, p + blk.ln1.scale, p + blk.ln1.shift, bc ? &bc->ln1 : nullptr);
        add_inplace(X, jssa_layer(a, p, blk.jssa, bc ? &bc->jssa : nullptr, ops));
        Tensor3<T> c = layer_norm(X, p + blk.ln2.scale, p + blk.ln2.shift, bc ? &bc->ln2 : nullptr);
        add_inplace(X, ffn_layer(c, p, blk.ffn, bc ? &bc->ffn : nullptr, ops));
    }
    Tensor3<T> t = refine_tail(X, p, l.tail, cache ? &cache->tail : nullptr, ops);
    Tensor3<T> f2 = conv2d(t, p + l.conv2.w, p + l.conv2.b, l.conv2.c_out, l.conv2.kernel, 0, false, ops);
    add_inplace(f2, f0);
    if (cache) {
        cache->f0 = std::move(f0);
        cache->tail_out = std::move(t);
    }
    return use_dft ? transform_for<T>(N).inverse(f2) : f2;
}

}  // namespace

template <typename T>
Tensor3<T> forward(const Model<T>& model, const Tensor3<T>& x, ForwardCache<T>* cache, OpCounter* ops)
{
    return forward_impl(model, x, model.config().use_dft, cache, ops);
}

template <typename T>
Tensor3<T> jsanet_forward(const Model<T>& model, const Tensor3<T>& x, ForwardCache<T>* cache)
{
    return forward_impl(model, x, false, cache, nullptr);
}

template <typename T>
void backward(const Model<T>& model, const ForwardCache<T>& cache, const Tensor3<T>& d_out, T* grads)
{
    const auto& l = model.layout;
    const T* p = model.values.data();
    const int N = d_out.height / l.config.partitions;
    const Tensor3<T> df2 = cache.use_dft ? transform_for<T>(N).forward(d_out) : d_out;

    const auto& t = cache.tail_out;
    Tensor3<T> dt(t.channels, t.height, t.width);
    conv2d_backward(t, df2, p + l.conv2.w, l.conv2.kernel, 0, false, grads + l.conv2.w, grads + l.conv2.b, &dt);
    Tensor3<T> dX(t.channels, t.height, t.width);
    tail_backward(cache.tail, dt, p, grads, l.tail, &dX);
    for (std::size_t b = l.blocks.size(); b-- > 0;) {
        const auto& blk = l.blocks[b];
        const auto& bc = cache.blocks[b];
        Tensor3<T> dc(dX.channels, dX.height, dX.width);
        ffn_backward(bc.ffn, dX, p, grads, blk.ffn, &dc);
        layer_norm_backward(bc.ln2, dc, p + blk.ln2.scale, grads + blk.ln2.scale, grads + blk.ln2.shift, &dX);
        Tensor3<T> da(dX.channels, dX.height, dX.width);
        jssa_backward(bc.jssa, dX, p, grads, blk.jssa, &da);
        layer_norm_backward(bc.ln1, da, p + blk.ln1.scale, grads + blk.ln1.scale, grads + blk.ln1.shift, &dX);
    }
    conv2d_backward<T>(cache.f0, dX, p + l.conv1.w, l.conv1.kernel, N, l.conv1.per_segment, grads + l.conv1.w,
                       grads + l.conv1.b, nullptr);
}

template <typename T>
double sample_loss(const Model<T>& model, const Tensor3<T>& x, const Tensor3<T>& target, T* grads, T scale)
{
    require_same_shape(x, target, "sample_loss");
    ForwardCache<T> cache;
    const Tensor3<T> out = forward(model, x, grads ? &cache : nullptr);
    double loss = 0.0;
    Tensor3<T> d_out(out.channels, out.height, out.width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const T diff = out.values[i] - target.values[i];
        loss += static_cast<double>(diff) * static_cast<double>(diff);
        d_out.values[i] = T(2) * scale * diff;
    }
    if (grads) {
        backward(model, cache, d_out, grads);
    }
    return loss;
}

#define NEARFIELD_MODEL_INSTANTIATE(T)                                                                                \
    template std::vector<T> initialize_params<T>(const ModelLayout&, std::uint64_t, bool);                            \
    template Tensor3<T> dlkc(const Tensor3<T>&, const T*, const DlkcRef&, DlkcCache<T>*, OpCounter*);                \
    template void dlkc_backward(const DlkcCache<T>&, const Tensor3<T>&, const T*, T*, const DlkcRef&, Tensor3<T>*); \
    template Tensor3<T> jssa_layer(const Tensor3<T>&, const T*, const JssaRef&, JssaCache<T>*, OpCounter*,          \
                                   std::vector<Tensor3<T>>*);                                                         \
    template void jssa_backward(const JssaCache<T>&, const Tensor3<T>&, const T*, T*, const JssaRef&, Tensor3<T>*); \
    template Tensor3<T> ffn_layer(const Tensor3<T>&, const T*, const FfnRef&, FfnCache<T>*, OpCounter*);             \
    template void ffn_backward(const FfnCache<T>&, const Tensor3<T>&, const T*, T*, const FfnRef&, Tensor3<T>*);    \
    template Tensor3<T> refine_tail(const Tensor3<T>&, const T*, const TailRef&, TailCache<T>*, OpCounter*);         \
    template void tail_backward(const TailCache<T>&, const Tensor3<T>&, const T*, T*, const TailRef&, Tensor3<T>*); \
    template Tensor3<T> forward(const Model<T>&, const Tensor3<T>&, ForwardCache<T>*, OpCounter*);                  \
    template Tensor3<T> jsanet_forward(const Model<T>&, const Tensor3<T>&, ForwardCache<T>*);                       \
    template void backward(const Model<T>&, const ForwardCache<T>&, const Tensor3<T>&, T*);                          \
    template double sample_loss(const Model<T>&, const Tensor3<T>&, const Tensor3<T>&, T*, T);

NEARFIELD_MODEL_INSTANTIATE(float)
NEARFIELD_MODEL_INSTANTIATE(double)

}  // namespace nearfield::jssanet
