#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nearfield/jssanet/model.hpp"

namespace nearfield::jssanet {

// Paired (Ĥ_LS, H) tensors, each (2, n_bs, K).
template <typename T>
struct SampleSet {
    std::vector<Tensor3<T>> inputs;
    std::vector<Tensor3<T>> targets;

    std::size_t size() const { return inputs.size(); }
};

struct TrainSettings {
    int epochs = 30;
    int batch_size = 16;
    double lr0 = 3e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;  // drives the per-epoch shuffles
    int threads = 0;         // 0 = library default
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double lr = 0.0;
    double train_loss = 0.0;  // mean per-sample loss over the epoch's mini-batches
    double test_loss = 0.0;   // mean per-sample loss on the held-out set after the epoch
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::vector<EpochRecord> history)
        : std::runtime_error(what), history_(std::move(history))
    {
    }
    const std::vector<EpochRecord>& history() const { return history_; }

private:
    std::vector<EpochRecord> history_;
};

// Five linear warm-up epochs γ0/(6-s), then γ0/2·(1 + cos((s-5)π/(S-4))) for s = 6..S.
// Throws std::invalid_argument for s < 1 or S < 1.
double learning_rate(int epoch, int total_epochs, double lr0);

// Adam with decoupled weight decay: θ ← θ - lr·(m̂/(√v̂ + ε) + λθ).
template <typename T>
class AdamW {
public:
    AdamW(std::size_t size, const TrainSettings& settings);
    void step(std::vector<T>& params, const std::vector<T>& grads, double lr);
    std::uint64_t steps() const { return step_; }

private:
    std::vector<T> m_, v_;
    double beta1_, beta2_, eps_, weight_decay_;
    std::uint64_t step_ = 0;
};

// Mean per-sample ‖f(X) - H‖²_F.
template <typename T>
double evaluate_loss(const Model<T>& model, const SampleSet<T>& data, int threads = 0);

// Mean per-sample loss and its gradient over indices [first, first+count) of order.
template <typename T>
double batch_gradient(const Model<T>& model, const SampleSet<T>& data, const std::vector<std::size_t>& order,
                      std::size_t first, std::size_t count, std::vector<T>& grads, int threads = 0);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training on mean per-sample loss. Throws std::invalid_argument for an
// empty training set and DivergenceError (with the history so far) on a non-finite loss.
template <typename T>
std::vector<EpochRecord> train(Model<T>& model, const SampleSet<T>& train_set, const SampleSet<T>& test_set,
                               const TrainSettings& settings, const EpochCallback& on_epoch = {});

}  // namespace nearfield::jssanet
