#include "nearfield/jssanet/train.hpp"

#include <cmath>
#include <numeric>

#include "nearfield/numerics.hpp"
#include "nearfield/parallel.hpp"
#include "nearfield/rng.hpp"

namespace nearfield::jssanet {

double learning_rate(int epoch, int total_epochs, double lr0)
{
    if (epoch < 1 || total_epochs < 1) {
        throw std::invalid_argument("learning_rate: epochs are 1-based");
    }
    if (epoch <= 5) {
        return lr0 / (6.0 - epoch);
    }
    return 0.5 * lr0 * (1.0 + std::cos(static_cast<double>(epoch - 5) * kPi / (total_epochs - 4)));
}

template <typename T>
AdamW<T>::AdamW(std::size_t size, const TrainSettings& s)
    : m_(size, T(0)), v_(size, T(0)), beta1_(s.beta1), beta2_(s.beta2), eps_(s.eps), weight_decay_(s.weight_decay)
{
}

template <typename T>
void AdamW<T>::step(std::vector<T>& params, const std::vector<T>& grads, double lr)
{
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw std::invalid_argument("AdamW: size mismatch");
    }
    ++step_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        const double m = beta1_ * m_[i] + (1.0 - beta1_) * g;
        const double v = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
        m_[i] = static_cast<T>(m);
        v_[i] = static_cast<T>(v);
        const double update = (m / c1) / (std::sqrt(v / c2) + eps_) + weight_decay_ * params[i];
        params[i] = static_cast<T>(params[i] - lr * update);
    }
}

template <typename T>
double evaluate_loss(const Model<T>& model, const SampleSet<T>& data, int threads)
{
    if (data.size() == 0) {
        return 0.0;
    }
    std::vector<double> losses(data.size());
    parallel_for(data.size(), threads,
                 [&](std::size_t i) { losses[i] = sample_loss(model, data.inputs[i], data.targets[i]); });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(data.size());
}

template <typename T>
double batch_gradient(const Model<T>& model, const SampleSet<T>& data, const std::vector<std::size_t>& order,
                      std::size_t first, std::size_t count, std::vector<T>& grads, int threads)
{
    const std::size_t n = model.values.size();
    grads.assign(n, T(0));
    if (count == 0) {
        return 0.0;
    }
    const T scale = T(1) / static_cast<T>(count);
    std::vector<double> losses(count);
    // Each sample's gradient lands in its own buffer and buffers are summed in index
    // order, so the result does not depend on the thread count.
    auto reduce = [&](const std::vector<T>& g) {
        for (std::size_t i = 0; i < n; ++i) {
            grads[i] += g[i];
        }
    };
    const int workers = threads > 0 ? threads : default_thread_count();
    if (workers <= 1 || count == 1) {
        std::vector<T> scratch(n);
        for (std::size_t j = 0; j < count; ++j) {
            std::fill(scratch.begin(), scratch.end(), T(0));
            const std::size_t idx = order[first + j];
            losses[j] = sample_loss(model, data.inputs[idx], data.targets[idx], scratch.data(), scale);
            reduce(scratch);
        }
    } else {
        std::vector<std::vector<T>> partial(count, std::vector<T>(n, T(0)));
        parallel_for(count, workers, [&](std::size_t j) {
            const std::size_t idx = order[first + j];
            losses[j] = sample_loss(model, data.inputs[idx], data.targets[idx], partial[j].data(), scale);
        });
        for (const auto& g : partial) {
            reduce(g);
        }
    }
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(count);
}

template <typename T>
std::vector<EpochRecord> train(Model<T>& model, const SampleSet<T>& train_set, const SampleSet<T>& test_set,
                               const TrainSettings& settings, const EpochCallback& on_epoch)
{
    if (train_set.size() == 0) {
        throw std::invalid_argument("train: empty training set");
    }
    if (settings.epochs < 1 || settings.batch_size < 1) {
        throw std::invalid_argument("train: epochs and batch size must be positive");
    }
    AdamW<T> optimizer(model.values.size(), settings);
    std::vector<EpochRecord> history;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng shuffle_rng(derive_seed(settings.seed, 0x7368756666ULL));
    std::vector<T> grads;
    const std::size_t batch = static_cast<std::size_t>(settings.batch_size);

    for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
        // Fisher–Yates with the project RNG so the permutation is platform independent.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }
        const double lr = learning_rate(epoch, settings.epochs, settings.lr0);
        double loss_sum = 0.0;
        for (std::size_t first = 0; first < order.size(); first += batch) {
            const std::size_t count = std::min(batch, order.size() - first);
            const double loss = batch_gradient(model, train_set, order, first, count, grads, settings.threads);
            if (!std::isfinite(loss)) {
                throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch), history);
            }
            loss_sum += loss * static_cast<double>(count);
            optimizer.step(model.values, grads, lr);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.test_loss = evaluate_loss(model, test_set, settings.threads);
        if (!std::isfinite(rec.test_loss)) {
            history.push_back(rec);
            throw DivergenceError("train: non-finite test loss in epoch " + std::to_string(epoch), history);
        }
        history.push_back(rec);
        if (on_epoch) {
            on_epoch(rec);
        }
    }
    return history;
}

template class AdamW<float>;
template class AdamW<double>;
template double evaluate_loss(const Model<float>&, const SampleSet<float>&, int);
template double evaluate_loss(const Model<double>&, const SampleSet<double>&, int);
template double batch_gradient(const Model<float>&, const SampleSet<float>&, const std::vector<std::size_t>&,
                               std::size_t, std::size_t, std::vector<float>&, int);
template double batch_gradient(const Model<double>&, const SampleSet<double>&, const std::vector<std::size_t>&,
                               std::size_t, std::size_t, std::vector<double>&, int);
template std::vector<EpochRecord> train(Model<float>&, const SampleSet<float>&, const SampleSet<float>&,
                                        const TrainSettings&, const EpochCallback&);
template std::vector<EpochRecord> train(Model<double>&, const SampleSet<double>&, const SampleSet<double>&,
                                        const TrainSettings&, const EpochCallback&);

}  // namespace nearfield::jssanet
