#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "loadcast/deep.hpp"
#include "loadcast/forecaster.hpp"

namespace loadcast {

struct TrainConfig {
    int epochs = 100;
    std::size_t batch_size = 256;
    std::array<double, 4> lr_stages = {0.01, 0.005, 0.001, 0.0005};  // equal epoch spans
    std::uint64_t seed = 0;
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean training MAE per epoch, kW
};

// Seeded-shuffle minibatch training with the staged learning-rate schedule;
// the final partial batch is trained. Throws SolveError on NaN loss.
TrainResult train(DeepModel& model, const Dataset& train_set, const TrainConfig& config);

// Full training run on the synthetic set, then the same schedule again on the
// target set with all layers trainable.
TrainResult pretrain_finetune(DeepModel& model, const Dataset& synth_set,
                              const Dataset& target_set, const TrainConfig& config);

// Forecaster adapter over a trained model.
class DeepForecaster final : public Forecaster {
public:
    explicit DeepForecaster(std::shared_ptr<DeepModel> model) : model_(std::move(model)) {}

    std::array<double, kHoursPerDay> forecast(const ForecastDay& day) const override;
    const char* name() const override;
    DeepModel& model() { return *model_; }

private:
    std::shared_ptr<DeepModel> model_;
};

}  // namespace loadcast
