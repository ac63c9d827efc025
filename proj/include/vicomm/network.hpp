#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vicomm/errors.hpp"
#include "vicomm/matrix.hpp"
#include "vicomm/rng.hpp"

namespace vicomm {

enum class Activation { relu, linear, softmax, sigmoid };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::linear: return "linear";
        case Activation::softmax: return "softmax";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    if (s == "softmax") return Activation::softmax;
    if (s == "sigmoid") return Activation::sigmoid;
    throw config_error("unknown activation '" + s + "'");
}

struct DenseLayer {
    Matrix weights;            // out x in
    std::vector<double> bias;  // out
    Activation activation = Activation::linear;

    std::size_t in_size() const { return weights.cols; }
    std::size_t out_size() const { return weights.rows; }
};

struct MLPModel {
    std::vector<DenseLayer> layers;

    std::size_t input_size() const { return layers.front().in_size(); }
    std::size_t output_size() const { return layers.back().out_size(); }
};

/// Per-layer pre/post activations recorded by forward(), consumed by backward().
struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

/// Gradients of a scalar loss w.r.t. every model parameter.
struct ParamGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    static ParamGrads zeros_like(const MLPModel& model) {
        ParamGrads g;
        g.weights.reserve(model.layers.size());
        g.biases.reserve(model.layers.size());
        for (const auto& layer : model.layers) {
            g.weights.emplace_back(layer.weights.rows, layer.weights.cols);
            g.biases.emplace_back(layer.bias.size(), 0.0);
        }
        return g;
    }

    void add_scaled(const ParamGrads& other, double scale) {
        for (std::size_t k = 0; k < weights.size(); ++k) {
            for (std::size_t i = 0; i < weights[k].size(); ++i)
                weights[k].data[i] += scale * other.weights[k].data[i];
            for (std::size_t i = 0; i < biases[k].size(); ++i)
                biases[k][i] += scale * other.biases[k][i];
        }
    }

    void scale(double s) {
        for (auto& w : weights)
            for (auto& v : w.data) v *= s;
        for (auto& b : biases)
            for (auto& v : b) v *= s;
    }
};

struct BackwardResult {
    ParamGrads params;
    std::vector<double> input_gradient;
};

namespace detail {

inline void apply_activation(Activation act, std::span<const double> pre, std::vector<double>& post) {
    post.assign(pre.begin(), pre.end());
    switch (act) {
        case Activation::linear:
            break;
        case Activation::relu:
            for (auto& v : post) v = std::max(0.0, v);
            break;
        case Activation::sigmoid:
            for (auto& v : post) v = 1.0 / (1.0 + std::exp(-v));
            break;
        case Activation::softmax: {
            // max-subtraction keeps exp() in range
            double mx = post[0];
            for (double v : post) mx = std::max(mx, v);
            double sum = 0.0;
            for (auto& v : post) {
                v = std::exp(v - mx);
                sum += v;
            }
            for (auto& v : post) v /= sum;
            break;
        }
    }
}

/// Gradient w.r.t. pre-activation given gradient w.r.t. post-activation.
inline std::vector<double> activation_backward(Activation act,
                                               std::span<const double> pre,
                                               std::span<const double> post,
                                               std::span<const double> grad_post) {
    std::vector<double> g(grad_post.begin(), grad_post.end());
    switch (act) {
        case Activation::linear:
            break;
        case Activation::relu:
            for (std::size_t i = 0; i < g.size(); ++i)
                if (pre[i] <= 0.0) g[i] = 0.0;
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= post[i] * (1.0 - post[i]);
            break;
        case Activation::softmax: {
            // full Jacobian: dpre = p .* (g - <g, p>)
            const double gp = dot(grad_post, post);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = post[i] * (grad_post[i] - gp);
            break;
        }
    }
    return g;
}

inline BackwardResult backprop(const MLPModel& model, const ForwardCache& cache,
                               std::span<const double> grad, bool grad_is_preactivation) {
    if (cache.pre.size() != model.layers.size() || cache.post.size() != model.layers.size())
        throw contract_error("backward: cache does not match model layer count");
    if (grad.size() != model.output_size())
        throw contract_error("backward: gradient length does not match model output");

    BackwardResult result;
    result.params = ParamGrads::zeros_like(model);

    std::vector<double> g(grad.begin(), grad.end());
    for (std::size_t k = model.layers.size(); k-- > 0;) {
        const DenseLayer& layer = model.layers[k];
        if (cache.pre[k].size() != layer.out_size())
            throw contract_error("backward: cache layer width does not match model");

        std::vector<double> gpre;
        if (grad_is_preactivation && k == model.layers.size() - 1)
            gpre = std::move(g);
        else
            gpre = activation_backward(layer.activation, cache.pre[k], cache.post[k], g);

        std::span<const double> layer_input =
            (k == 0) ? std::span<const double>(cache.input) : std::span<const double>(cache.post[k - 1]);
        add_outer(result.params.weights[k], gpre, layer_input);
        for (std::size_t i = 0; i < gpre.size(); ++i) result.params.biases[k][i] += gpre[i];

        g = matvec_transposed(layer.weights, gpre);
    }
    result.input_gradient = std::move(g);
    return result;
}

} // namespace detail

inline void validate_model(const MLPModel& model) {
    if (model.layers.empty()) throw contract_error("model has no layers");
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        const DenseLayer& layer = model.layers[k];
        if (layer.weights.rows == 0 || layer.weights.cols == 0)
            throw contract_error("layer " + std::to_string(k) + " has zero width");
        if (layer.bias.size() != layer.weights.rows)
            throw contract_error("layer " + std::to_string(k) + " bias length does not match output width");
        if (k + 1 < model.layers.size()) {
            if (layer.activation == Activation::softmax || layer.activation == Activation::sigmoid)
                throw contract_error("softmax/sigmoid only legal as the final layer");
            if (model.layers[k + 1].in_size() != layer.out_size())
                throw contract_error("layer dimensions do not chain at layer " + std::to_string(k));
        }
    }
}

inline std::vector<double> forward(const MLPModel& model, std::span<const double> input,
                                   ForwardCache* cache = nullptr) {
    if (model.layers.empty()) throw contract_error("forward: model has no layers");
    if (input.size() != model.input_size())
        throw contract_error("forward: input length " + std::to_string(input.size()) +
                             " does not match model input width " + std::to_string(model.input_size()));
    if (cache) {
        cache->input.assign(input.begin(), input.end());
        cache->pre.clear();
        cache->post.clear();
        cache->pre.reserve(model.layers.size());
        cache->post.reserve(model.layers.size());
    }

    std::vector<double> x(input.begin(), input.end());
    for (const DenseLayer& layer : model.layers) {
        std::vector<double> pre = matvec(layer.weights, x);
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += layer.bias[i];
        std::vector<double> post;
        detail::apply_activation(layer.activation, pre, post);
        if (cache) {
            cache->pre.push_back(std::move(pre));
            cache->post.push_back(post);
        }
        x = std::move(post);
    }
    return x;
}

/// Reverse-mode gradients; `output_gradient` is w.r.t. the model output
/// (post-activation). Returns parameter gradients plus the gradient w.r.t.
/// the input vector, which lets decoder gradients chain through the channel
/// into the encoder.
inline BackwardResult backward(const MLPModel& model, const ForwardCache& cache,
                               std::span<const double> output_gradient) {
    return detail::backprop(model, cache, output_gradient, false);
}

/// Same, but `preactivation_gradient` is w.r.t. the final layer's
/// pre-activation. Used for the fused softmax/sigmoid cross-entropy gradient
/// (yhat - y), which sidesteps log(0).
inline BackwardResult backward_from_preactivation(const MLPModel& model, const ForwardCache& cache,
                                                  std::span<const double> preactivation_gradient) {
    return detail::backprop(model, cache, preactivation_gradient, true);
}

/// He fan-in Gaussian weights (variance 2/fan_in), zero biases.
/// Deterministic for a given seed.
inline MLPModel init_model(std::span<const std::size_t> layer_sizes,
                           std::span<const Activation> activations, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw contract_error("init_model: need at least one layer");
    if (activations.size() != layer_sizes.size() - 1)
        throw contract_error("init_model: need one activation per layer");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw contract_error("init_model: zero-width layer");

    Rng rng(seed);
    MLPModel model;
    model.layers.resize(layer_sizes.size() - 1);
    for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
        DenseLayer& layer = model.layers[k];
        const std::size_t fan_in = layer_sizes[k];
        const std::size_t fan_out = layer_sizes[k + 1];
        layer.weights = Matrix(fan_out, fan_in);
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (auto& w : layer.weights.data) w = rng.normal(0.0, stddev);
        layer.bias.assign(fan_out, 0.0);
        layer.activation = activations[k];
    }
    validate_model(model);
    return model;
}

} // namespace vicomm
