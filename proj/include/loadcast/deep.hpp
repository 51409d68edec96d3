#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "loadcast/adam.hpp"
#include "loadcast/features.hpp"
#include "loadcast/presets.hpp"
#include "loadcast/tensor.hpp"

namespace loadcast {

// One forward batch of feature windows in both layouts the model families
// consume: per-timestep (B x F) matrices for recurrent stacks, and a stacked
// (B*24 x F) matrix for attention stacks. Windows are already normalized.
struct Batch {
    std::size_t count = 0;
    std::vector<nn::Tensor> steps;  // 24 tensors, each (B x 20)
    nn::Tensor stacked;             // (B*24 x 20)
    nn::Matrix targets;             // (B x 24), kW

    static Batch from_dataset(const Dataset& dataset, const std::vector<std::size_t>& indices);
};

class DeepModel {
public:
    explicit DeepModel(const ModelPreset& preset) : preset_(preset) {}
    virtual ~DeepModel() = default;

    const ModelPreset& preset() const { return preset_; }
    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }
    std::size_t param_count() const { return params_.count(); }

    // (B x 24) prediction connected to the parameter graph.
    virtual nn::Tensor forward(const Batch& batch) const = 0;

    // Forward pass for one window without keeping any graph alive.
    std::array<double, kHoursPerDay> predict(const Dataset& dataset, std::size_t window_index) const;

protected:
    ModelPreset preset_;
    nn::ParamSet params_;
};

// Instantiates the preset with seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
// weight init; norm scales start at 1, shifts at 0.
std::unique_ptr<DeepModel> make_deep_model(const ModelPreset& preset, std::uint64_t seed);

}  // namespace loadcast
