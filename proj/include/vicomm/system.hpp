#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vicomm/adam.hpp"
#include "vicomm/channels.hpp"
#include "vicomm/constellation.hpp"
#include "vicomm/errors.hpp"
#include "vicomm/network.hpp"
#include "vicomm/objectives.hpp"
#include "vicomm/rng.hpp"

namespace vicomm {

// Training pilot is the constant complex symbol (1, 1); evaluation rescales
// pilot power to the constellation's average per-component power.
inline constexpr std::complex<double> training_pilot{1.0, 1.0};

struct SystemConfig {
    std::size_t M = 4;
    std::size_t m = 2;  // channel dimension, even: m/2 complex uses
    Representation representation = Representation::one_hot;
    std::vector<std::size_t> encoder_hidden = {64, 32, 16};
    std::vector<std::size_t> decoder_hidden = {16, 32, 64};
    ObjectiveSpec objective;
    ChannelSpec channel;
    std::size_t epochs = 3000;
    std::uint64_t seed = 1;
    AdamConfig adam;
    // fresh channel realizations per symbol per epoch, gradients averaged
    std::size_t noise_draws = 32;
    // Adam's step never anneals on its own, so the learning rate ramps
    // linearly from adam.lr down to lr_final over the last third of training;
    // lr_final >= adam.lr keeps it constant
    double lr_final = 1e-3;

    std::size_t message_width() const {
        return representation == Representation::one_hot ? M : bits_per_symbol(M);
    }

    void validate() const {
        if (M < 2) throw config_error("config: M must be >= 2");
        if (m < 2 || m % 2 != 0) throw config_error("config: m must be even and >= 2");
        if (noise_draws == 0) throw config_error("config: noise_draws must be >= 1");
        if (lr_final < 0.0) throw config_error("config: lr_final must be >= 0");
        if (encoder_hidden.empty() || decoder_hidden.empty())
            throw config_error("config: hidden layer lists must be nonempty");
        for (std::size_t s : encoder_hidden)
            if (s == 0) throw config_error("config: zero-width encoder layer");
        for (std::size_t s : decoder_hidden)
            if (s == 0) throw config_error("config: zero-width decoder layer");
        if (objective.representation != representation)
            throw config_error("config: objective representation does not match system representation");
        channel.validate();
        if (objective.kl_family != KlFamily::none) objective.validate();
    }
};

/// A system mid-training: both networks plus their optimizer states.
struct System {
    SystemConfig config;
    MLPModel encoder;
    MLPModel decoder;
    AdamState encoder_opt;
    AdamState decoder_opt;
};

struct TrainedSystem {
    SystemConfig config;
    MLPModel encoder;
    MLPModel decoder;
    std::vector<LossBreakdown> loss_history;
    Constellation constellation;
};

/// Message vector fed to the encoder: one-hot indicator or the bit pattern.
inline std::vector<double> message_input(const SystemConfig& config, std::size_t symbol) {
    if (symbol >= config.M) throw contract_error("message_input: symbol out of range");
    if (config.representation == Representation::one_hot) {
        std::vector<double> x(config.M, 0.0);
        x[symbol] = 1.0;
        return x;
    }
    const std::size_t d = bits_per_symbol(config.M);
    const auto bits = symbol_bits(symbol, d);
    std::vector<double> x(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) x[j] = bits[j];
    return x;
}

/// Runs the encoder over all M messages. Labels are the bit patterns of the
/// symbol indices.
inline Constellation encode_all(const MLPModel& encoder, const SystemConfig& config) {
    Constellation c;
    c.dim = config.m;
    c.points.reserve(config.M);
    c.labels.reserve(config.M);
    const std::size_t d = bits_per_symbol(config.M);
    for (std::size_t s = 0; s < config.M; ++s) {
        c.points.push_back(forward(encoder, message_input(config, s)));
        c.labels.push_back(symbol_bits(s, d));
    }
    return c;
}

/// Encoder M -> hidden -> m (linear transmit layer, no normalization);
/// decoder m -> hidden -> M softmax (one-hot) or d sigmoid (binary).
/// Deterministic from config.seed.
inline System build_system(const SystemConfig& config) {
    config.validate();
    const std::size_t in_width = config.message_width();
    const std::size_t out_width = in_width;

    std::vector<std::size_t> enc_sizes;
    enc_sizes.push_back(in_width);
    enc_sizes.insert(enc_sizes.end(), config.encoder_hidden.begin(), config.encoder_hidden.end());
    enc_sizes.push_back(config.m);
    std::vector<Activation> enc_acts(config.encoder_hidden.size(), Activation::relu);
    enc_acts.push_back(Activation::linear);

    std::vector<std::size_t> dec_sizes;
    dec_sizes.push_back(config.m);
    dec_sizes.insert(dec_sizes.end(), config.decoder_hidden.begin(), config.decoder_hidden.end());
    dec_sizes.push_back(out_width);
    std::vector<Activation> dec_acts(config.decoder_hidden.size(), Activation::relu);
    dec_acts.push_back(config.representation == Representation::one_hot ? Activation::softmax
                                                                        : Activation::sigmoid);

    System sys;
    sys.config = config;
    sys.encoder = init_model(enc_sizes, enc_acts, derive_seed(config.seed, 0));
    sys.decoder = init_model(dec_sizes, dec_acts, derive_seed(config.seed, 1));
    sys.encoder_opt = AdamState::for_model(sys.encoder, config.adam);
    sys.decoder_opt = AdamState::for_model(sys.decoder, config.adam);
    return sys;
}

namespace detail {

struct ChannelPass {
    std::vector<double> decoder_input;
    // gradient w.r.t. z of (loss as seen through the channel) given gradient
    // w.r.t. the decoder input; linear for every family here
    std::complex<double> gain_chain{1.0, 0.0};  // rbf: conj(h / hhat) applied blockwise
    bool is_rbf = false;
};

/// One stochastic channel realization plus what the encoder backprop needs.
inline ChannelPass pass_through_channel(const SystemConfig& config, std::span<const double> z, Rng& rng) {
    ChannelPass pass;
    switch (config.channel.family) {
        case ChannelFamily::awgn:
            pass.decoder_input = sample_awgn(z, config.channel.sigma_n2, rng);
            break;
        case ChannelFamily::laplace:
            pass.decoder_input = sample_laplace(z, config.channel.sigma_n, rng);
            break;
        case ChannelFamily::cauchy:
            pass.decoder_input = sample_cauchy(z, config.channel.gamma_n, rng);
            break;
        case ChannelFamily::rbf: {
            const FadedBlock block = sample_rbf(z, config.channel.sigma_n2, rng, training_pilot);
            const std::complex<double> h_hat = block.pilot_rx / training_pilot;
            pass.decoder_input = equalize(block, training_pilot);
            // decoder input = (h/hhat) z + noise/hhat; transpose of the complex
            // gain map is multiplication by its conjugate
            pass.gain_chain = std::conj(block.h_true / h_hat);
            pass.is_rbf = true;
            break;
        }
    }
    return pass;
}

inline std::vector<double> chain_to_encoder(const ChannelPass& pass, std::span<const double> grad) {
    if (!pass.is_rbf) return {grad.begin(), grad.end()};
    return apply_complex_gain(grad, pass.gain_chain);
}

} // namespace detail

/// One full-batch epoch: every message with config.noise_draws fresh channel
/// realizations, gradients averaged over all M x noise_draws samples, one
/// Adam step per network. Returns the mean LossBreakdown. Aborts with a
/// diagnostic on non-finite loss.
inline LossBreakdown train_epoch(System& sys, Rng& rng) {
    const SystemConfig& config = sys.config;
    const std::size_t M = config.M;
    const std::size_t draws = config.noise_draws;
    const double inv = 1.0 / static_cast<double>(M * draws);

    ParamGrads enc_grads = ParamGrads::zeros_like(sys.encoder);
    ParamGrads dec_grads = ParamGrads::zeros_like(sys.decoder);
    LossBreakdown mean;

    const std::size_t d = bits_per_symbol(M);
    for (std::size_t s = 0; s < M; ++s) {
        const std::vector<double> x = message_input(config, s);

        ForwardCache enc_cache;
        const std::vector<double> z = forward(sys.encoder, x, &enc_cache);

        std::vector<double> target;
        if (config.representation == Representation::binary) {
            const auto bits = symbol_bits(s, d);
            target.assign(bits.begin(), bits.end());
        }

        for (std::size_t k = 0; k < draws; ++k) {
            detail::ChannelPass pass = detail::pass_through_channel(config, z, rng);

            ForwardCache dec_cache;
            const std::vector<double> out = forward(sys.decoder, pass.decoder_input, &dec_cache);

            LossBreakdown loss;
            std::vector<double> fused(out.size());
            if (config.representation == Representation::one_hot) {
                loss = total_loss(config.objective, out, s, z);
                for (std::size_t i = 0; i < out.size(); ++i) fused[i] = out[i];
                fused[s] -= 1.0;  // softmax + cross-entropy: yhat - y
            } else {
                loss = total_loss(config.objective, out, target, z);
                for (std::size_t i = 0; i < out.size(); ++i) fused[i] = out[i] - target[i];
            }
            if (!std::isfinite(loss.total))
                throw numeric_error("train_epoch: non-finite loss at symbol " + std::to_string(s) +
                                    " (recon=" + std::to_string(loss.recon) +
                                    ", kl=" + std::to_string(loss.kl) + ")");

            BackwardResult dec_back = backward_from_preactivation(sys.decoder, dec_cache, fused);

            std::vector<double> z_grad = detail::chain_to_encoder(pass, dec_back.input_gradient);
            if (config.objective.kl_family != KlFamily::none) {
                const std::vector<double> kl_grad = kl_gradient(config.objective, z);
                for (std::size_t j = 0; j < z_grad.size(); ++j) z_grad[j] += kl_grad[j];
            }
            BackwardResult enc_back = backward(sys.encoder, enc_cache, z_grad);

            enc_grads.add_scaled(enc_back.params, inv);
            dec_grads.add_scaled(dec_back.params, inv);
            mean.recon += inv * loss.recon;
            mean.kl += inv * loss.kl;
            mean.total += inv * loss.total;
        }
    }

    adam_step(sys.encoder_opt, sys.encoder, enc_grads);
    adam_step(sys.decoder_opt, sys.decoder, dec_grads);
    return mean;
}

/// Learning rate at a given epoch: constant at adam.lr for the first two
/// thirds, then linear down to lr_final.
inline double scheduled_lr(const SystemConfig& config, std::size_t epoch) {
    const double lr0 = config.adam.lr;
    if (config.lr_final >= lr0 || config.epochs == 0) return lr0;
    const std::size_t hold = (config.epochs * 2) / 3;
    if (epoch < hold) return lr0;
    const double tail = static_cast<double>(config.epochs - hold);
    const double progress = static_cast<double>(epoch - hold + 1) / tail;
    return lr0 + (config.lr_final - lr0) * progress;
}

using EpochCallback = std::function<void(std::size_t epoch, const System&)>;

/// Builds and trains a system for config.epochs epochs. Single-threaded and
/// bit-reproducible from (config, seed). The optional callback observes the
/// system after each epoch (for probes such as BLER evolution).
inline TrainedSystem train(const SystemConfig& config, const EpochCallback& on_epoch = nullptr) {
    System sys = build_system(config);
    Rng rng(derive_seed(config.seed, 2));

    TrainedSystem result;
    result.config = config;
    result.loss_history.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = scheduled_lr(config, epoch);
        sys.encoder_opt.cfg.lr = lr;
        sys.decoder_opt.cfg.lr = lr;
        result.loss_history.push_back(train_epoch(sys, rng));
        if (on_epoch) on_epoch(epoch, sys);
    }
    result.encoder = std::move(sys.encoder);
    result.decoder = std::move(sys.decoder);
    result.constellation = encode_all(result.encoder, config);
    return result;
}

/// Decoder output -> decided symbol index. One-hot: argmax (ties to lowest
/// index); binary: per-bit threshold at 0.5.
inline std::size_t decide_symbol(const SystemConfig& config, std::span<const double> decoder_output) {
    if (config.representation == Representation::one_hot) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < decoder_output.size(); ++i)
            if (decoder_output[i] > decoder_output[best]) best = i;
        return best;
    }
    std::size_t v = 0;
    for (double p : decoder_output) v = (v << 1) | (p >= 0.5 ? 1u : 0u);
    return v;
}

} // namespace vicomm
