#pragma once

#include <string>
#include <vector>

#include "loadcast/tensor.hpp"

namespace loadcast::nn {

struct NamedParam {
    std::string name;
    Tensor tensor;  // requires_grad
};

// Flat trainable-parameter collection of one model.
struct ParamSet {
    std::vector<NamedParam> params;

    std::size_t count() const {
        std::size_t n = 0;
        for (const auto& p : params) n += p.tensor.value().size();
        return n;
    }
    void zero_grad() {
        for (auto& p : params) p.tensor.zero_grad();
    }
};

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step_count = 0;
    std::vector<Matrix> m;  // first moments, one per parameter
    std::vector<Matrix> v;  // second moments

    static AdamState for_params(const ParamSet& params);
};

// One bias-corrected Adam update; reads each parameter's grad buffer and
// updates its value in place.
void adam_step(ParamSet& params, AdamState& state, double learning_rate);

}  // namespace loadcast::nn
