#include "loadcast/train.hpp"

#include <cmath>
#include <numeric>

#include "loadcast/errors.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

using namespace nn;

TrainResult train(DeepModel& model, const Dataset& train_set, const TrainConfig& config) {
    if (train_set.windows.empty()) throw SolveError("training set is empty");
    if (config.epochs < 1) throw SolveError("epochs must be at least 1");

    const std::size_t n = train_set.windows.size();
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);

    AdamState adam = AdamState::for_params(model.params());
    TrainResult result;
    result.loss_curve.reserve(static_cast<std::size_t>(config.epochs));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // four equal learning-rate stages over the epoch budget
        int stage = std::min(3, epoch * 4 / config.epochs);
        double lr = config.lr_stages[static_cast<std::size_t>(stage)];

        Rng rng = Rng::derived(config.seed, static_cast<std::uint64_t>(epoch));
        rng.shuffle(indices);

        double epoch_loss = 0.0;
        std::size_t epoch_samples = 0;
        for (std::size_t at = 0; at < n; at += config.batch_size) {
            std::size_t end = std::min(n, at + config.batch_size);
            std::vector<std::size_t> batch_idx(indices.begin() + static_cast<std::ptrdiff_t>(at),
                                               indices.begin() + static_cast<std::ptrdiff_t>(end));
            Batch batch = Batch::from_dataset(train_set, batch_idx);
            Tensor prediction = model.forward(batch);
            Tensor loss = mean_absolute_error(prediction, constant(batch.targets));
            double loss_value = loss.value()(0, 0);
            if (!std::isfinite(loss_value)) {
                throw SolveError("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch starting at " +
                                 std::to_string(at));
            }
            model.params().zero_grad();
            backward(loss);
            adam_step(model.params(), adam, lr);

            epoch_loss += loss_value * static_cast<double>(batch_idx.size());
            epoch_samples += batch_idx.size();
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(epoch_samples));
    }
    return result;
}

TrainResult pretrain_finetune(DeepModel& model, const Dataset& synth_set,
                              const Dataset& target_set, const TrainConfig& config) {
    if (synth_set.windows.empty() || target_set.windows.empty()) {
        throw SolveError("pretrain_finetune needs non-empty synthetic and target sets");
    }
    // The synthetic calendar must cover the target's day span, otherwise the
    // pretraining distribution misses target seasons entirely.
    auto day_index = [](const FeatureWindow& w) { return days_from_civil(w.day); };
    if (day_index(synth_set.windows.front()) > day_index(target_set.windows.front()) ||
        day_index(synth_set.windows.back()) < day_index(target_set.windows.back())) {
        throw DataError("synthetic pretraining calendar does not cover the target range (" +
                        format_date(synth_set.windows.front().day) + " .. " +
                        format_date(synth_set.windows.back().day) + " vs " +
                        format_date(target_set.windows.front().day) + " .. " +
                        format_date(target_set.windows.back().day) + ")");
    }
    TrainResult pretrain = train(model, synth_set, config);
    TrainConfig finetune_config = config;
    finetune_config.seed = config.seed + 1;  // distinct shuffles, still deterministic
    TrainResult finetune = train(model, target_set, finetune_config);
    pretrain.loss_curve.insert(pretrain.loss_curve.end(), finetune.loss_curve.begin(),
                               finetune.loss_curve.end());
    return pretrain;
}

std::array<double, kHoursPerDay> DeepForecaster::forecast(const ForecastDay& day) const {
    if (day.dataset == nullptr) throw SolveError("deep forecast needs a feature dataset");
    return model_->predict(*day.dataset, day.window_index);
}

const char* DeepForecaster::name() const {
    switch (model_->preset().family) {
        case ModelFamily::lstm: return "lstm";
        case ModelFamily::transformer: return "transformer";
        case ModelFamily::xlstm: return "xlstm";
        default: return "deep";
    }
}

}  // namespace loadcast
