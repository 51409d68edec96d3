#include "loadcast/adam.hpp"

#include <cmath>

#include "loadcast/errors.hpp"

namespace loadcast::nn {

AdamState AdamState::for_params(const ParamSet& params) {
    AdamState state;
    state.m.reserve(params.params.size());
    state.v.reserve(params.params.size());
    for (const auto& p : params.params) {
        state.m.push_back(Matrix::zeros(p.tensor.value().rows, p.tensor.value().cols));
        state.v.push_back(Matrix::zeros(p.tensor.value().rows, p.tensor.value().cols));
    }
    return state;
}

void adam_step(ParamSet& params, AdamState& state, double learning_rate) {
    if (state.m.size() != params.params.size()) {
        throw SolveError("adam_step: state holds " + std::to_string(state.m.size()) +
                         " moment buffers for " + std::to_string(params.params.size()) +
                         " parameters");
    }
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.params.size(); ++i) {
        Tensor& t = params.params[i].tensor;
        Matrix& value = t.value();
        const Matrix& grad = t.grad();
        if (grad.size() == 0) continue;  // parameter not touched by this graph
        Matrix& m = state.m[i];
        Matrix& v = state.v[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
            double g = grad.data[j];
            m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g;
            v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g * g;
            double m_hat = m.data[j] / bc1;
            double v_hat = v.data[j] / bc2;
            value.data[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

}  // namespace loadcast::nn
