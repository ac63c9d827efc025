#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "vicomm/errors.hpp"
#include "vicomm/network.hpp"

namespace vicomm {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.99;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::uint64_t step = 0;
    ParamGrads m1;  // first moments, shapes mirror the model
    ParamGrads m2;  // second moments

    static AdamState for_model(const MLPModel& model, const AdamConfig& cfg) {
        AdamState s;
        s.cfg = cfg;
        s.m1 = ParamGrads::zeros_like(model);
        s.m2 = ParamGrads::zeros_like(model);
        return s;
    }
};

namespace detail {

inline void adam_update_block(const AdamConfig& cfg, double bc1, double bc2,
                              double* param, double* m1, double* m2, const double* grad,
                              std::size_t n, const std::string& block_name) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        if (!std::isfinite(g))
            throw numeric_error("adam_step: non-finite gradient in " + block_name);
        m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g;
        m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = m1[i] / bc1;
        const double vhat = m2[i] / bc2;
        param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

} // namespace detail

/// One Adam step with bias-corrected moments; mutates model parameters in place.
inline void adam_step(AdamState& state, MLPModel& model, const ParamGrads& grads) {
    if (grads.weights.size() != model.layers.size())
        throw contract_error("adam_step: gradient layer count does not match model");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        DenseLayer& layer = model.layers[k];
        if (!grads.weights[k].same_shape(layer.weights) ||
            grads.biases[k].size() != layer.bias.size())
            throw contract_error("adam_step: gradient shape mismatch at layer " + std::to_string(k));
        detail::adam_update_block(state.cfg, bc1, bc2, layer.weights.data.data(),
                                  state.m1.weights[k].data.data(), state.m2.weights[k].data.data(),
                                  grads.weights[k].data.data(), layer.weights.size(),
                                  "layer " + std::to_string(k) + " weights");
        detail::adam_update_block(state.cfg, bc1, bc2, layer.bias.data(),
                                  state.m1.biases[k].data(), state.m2.biases[k].data(),
                                  grads.biases[k].data(), layer.bias.size(),
                                  "layer " + std::to_string(k) + " biases");
    }
}

} // namespace vicomm
