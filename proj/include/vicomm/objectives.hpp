#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vicomm/channels.hpp"
#include "vicomm/errors.hpp"
#include "vicomm/matrix.hpp"

namespace vicomm {

enum class Representation { one_hot, binary };

inline std::string to_string(Representation r) {
    return r == Representation::one_hot ? "one_hot" : "binary";
}

inline Representation representation_from_string(const std::string& s) {
    if (s == "one_hot") return Representation::one_hot;
    if (s == "binary") return Representation::binary;
    throw config_error("unknown representation '" + s + "'");
}

/// Which KL penalty to attach to the reconstruction likelihood. `none`
/// recovers the plain autoencoder objective (reconstruction only), the
/// constant-SNR setup of earlier end-to-end designs.
enum class KlFamily { awgn, rbf, laplace_ub, laplace_exact, cauchy, none };

inline std::string to_string(KlFamily f) {
    switch (f) {
        case KlFamily::awgn: return "awgn";
        case KlFamily::rbf: return "rbf";
        case KlFamily::laplace_ub: return "laplace_ub";
        case KlFamily::laplace_exact: return "laplace_exact";
        case KlFamily::cauchy: return "cauchy";
        case KlFamily::none: return "none";
    }
    return "?";
}

inline KlFamily kl_family_from_string(const std::string& s) {
    if (s == "awgn") return KlFamily::awgn;
    if (s == "rbf") return KlFamily::rbf;
    if (s == "laplace_ub") return KlFamily::laplace_ub;
    if (s == "laplace_exact") return KlFamily::laplace_exact;
    if (s == "cauchy") return KlFamily::cauchy;
    if (s == "none") return KlFamily::none;
    throw config_error("unknown kl family '" + s + "'");
}

/// Training objective: message representation, KL family, prior parameters,
/// and the channel parameters mirrored from the ChannelSpec in use.
struct ObjectiveSpec {
    Representation representation = Representation::one_hot;
    KlFamily kl_family = KlFamily::awgn;
    double sigma_0 = 1.0;   // Gaussian prior std (awgn/rbf), Laplace prior scale
    double gamma_0 = 0.0;   // Cauchy prior dispersion
    double sigma_n2 = 0.1;  // mirrored channel params
    double sigma_n = 0.0;
    double gamma_n = 0.0;

    void validate() const {
        switch (kl_family) {
            case KlFamily::awgn:
            case KlFamily::rbf:
                if (sigma_0 <= 0.0 || sigma_n2 <= 0.0)
                    throw contract_error("objective: sigma_0 and sigma_n2 must be > 0");
                break;
            case KlFamily::laplace_ub:
            case KlFamily::laplace_exact:
                if (sigma_0 <= 0.0 || sigma_n <= 0.0)
                    throw contract_error("objective: sigma_0 and sigma_n must be > 0");
                break;
            case KlFamily::cauchy:
                if (gamma_0 <= 0.0 || gamma_n <= 0.0)
                    throw contract_error("objective: gamma_0 and gamma_n must be > 0");
                break;
            case KlFamily::none:
                break;
        }
    }
};

/// recon = negative log-likelihood, kl = divergence penalty, total = recon + kl.
/// Losses are minimized; they are the negated ELBO terms.
struct LossBreakdown {
    double recon = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

namespace detail {
constexpr double prob_floor = 1e-300;
}

/// -log p_x for a softmax output; categorical cross-entropy of the true index.
inline double recon_one_hot(std::span<const double> probs, std::size_t true_index) {
    if (true_index >= probs.size()) throw contract_error("recon_one_hot: index out of range");
    return -std::log(std::max(probs[true_index], detail::prob_floor));
}

/// Multivariate Bernoulli negative log-likelihood:
/// -sum_i [ x_i log xhat_i + (1 - x_i) log(1 - xhat_i) ].
inline double recon_binary(std::span<const double> probs, std::span<const double> bits) {
    if (probs.size() != bits.size()) throw contract_error("recon_binary: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::max(probs[i], detail::prob_floor);
        const double q = std::max(1.0 - probs[i], detail::prob_floor);
        acc -= bits[i] * std::log(p) + (1.0 - bits[i]) * std::log(q);
    }
    return acc;
}

/// KL( N(z, sigma_n2 I) || N(0, sigma_0_2 I) ):
/// (1/(2 sigma_0^2)) sum z_j^2 - (m/2)(1 - sigma_n^2/sigma_0^2 + log(sigma_n^2/sigma_0^2)).
inline double kl_awgn(std::span<const double> z, double sigma_n2, double sigma_0_2) {
    if (sigma_n2 <= 0.0 || sigma_0_2 <= 0.0) throw contract_error("kl_awgn: variances must be > 0");
    const double m = static_cast<double>(z.size());
    const double ratio = sigma_n2 / sigma_0_2;
    return squared_norm(z) / (2.0 * sigma_0_2) - 0.5 * m * (1.0 - ratio + std::log(ratio));
}

/// KL of the Rayleigh-block-fading conditional against the Gaussian prior:
/// the AWGN expression minus log(1 + sum z_j^2 / (2 sigma_n^2)).
inline double kl_rbf(std::span<const double> z, double sigma_n2, double sigma_0_2) {
    if (z.size() % 2 != 0) throw contract_error("kl_rbf: dimension must be even");
    return kl_awgn(z, sigma_n2, sigma_0_2) - std::log1p(squared_norm(z) / (2.0 * sigma_n2));
}

/// Smooth upper bound on the Laplace KL:
/// z'z/(2 sigma_n sigma_0) + (m/7)(sigma_0^2/sigma_n^2 - 1)^2 sigma_n^2/sigma_0^2.
inline double kl_laplace_ub(std::span<const double> z, double sigma_n, double sigma_0) {
    if (sigma_n <= 0.0 || sigma_0 <= 0.0) throw contract_error("kl_laplace_ub: scales must be > 0");
    const double m = static_cast<double>(z.size());
    const double r2 = (sigma_0 * sigma_0) / (sigma_n * sigma_n);
    return squared_norm(z) / (2.0 * sigma_n * sigma_0) + (m / 7.0) * (r2 - 1.0) * (r2 - 1.0) / r2;
}

/// Exact per-component Laplace KL, KL( L(z_i, sigma_n) || L(0, sigma_0) ):
/// sum_i [ |z_i|/sigma_0 + (sigma_n/sigma_0) exp(-|z_i|/sigma_n) + log(sigma_0/sigma_n) - 1 ].
inline double kl_laplace_exact(std::span<const double> z, double sigma_n, double sigma_0) {
    if (sigma_n <= 0.0 || sigma_0 <= 0.0) throw contract_error("kl_laplace_exact: scales must be > 0");
    const double log_ratio = std::log(sigma_0 / sigma_n);
    double acc = 0.0;
    for (double zi : z) {
        const double a = std::abs(zi);
        acc += a / sigma_0 + (sigma_n / sigma_0) * std::exp(-a / sigma_n) + log_ratio - 1.0;
    }
    return acc;
}

/// Per-component Cauchy KL, KL( C(z_i, gamma_n) || C(0, gamma_0) ):
/// sum_i log( ((gamma_n + gamma_0)^2 + z_i^2) / (4 gamma_n gamma_0) ).
inline double kl_cauchy(std::span<const double> z, double gamma_n, double gamma_0) {
    if (gamma_n <= 0.0 || gamma_0 <= 0.0) throw contract_error("kl_cauchy: dispersions must be > 0");
    const double s = gamma_n + gamma_0;
    const double denom = 4.0 * gamma_n * gamma_0;
    double acc = 0.0;
    for (double zi : z) acc += std::log((s * s + zi * zi) / denom);
    return acc;
}

/// True divergence for the spec's family at transmit point z; 0 for `none`.
inline double kl_divergence(const ObjectiveSpec& spec, std::span<const double> z) {
    spec.validate();
    const double s02 = spec.sigma_0 * spec.sigma_0;
    switch (spec.kl_family) {
        case KlFamily::awgn: return kl_awgn(z, spec.sigma_n2, s02);
        case KlFamily::rbf: return kl_rbf(z, spec.sigma_n2, s02);
        case KlFamily::laplace_ub: return kl_laplace_ub(z, spec.sigma_n, spec.sigma_0);
        case KlFamily::laplace_exact: return kl_laplace_exact(z, spec.sigma_n, spec.sigma_0);
        case KlFamily::cauchy: return kl_cauchy(z, spec.gamma_n, spec.gamma_0);
        case KlFamily::none: return 0.0;
    }
    throw contract_error("kl_divergence: unknown family");
}

/// Analytic d KL / d z, chained into the encoder during backprop.
inline std::vector<double> kl_gradient(const ObjectiveSpec& spec, std::span<const double> z) {
    spec.validate();
    if (spec.kl_family == KlFamily::none)
        throw contract_error("kl_gradient: family must not be none");
    std::vector<double> grad(z.size(), 0.0);
    const double s02 = spec.sigma_0 * spec.sigma_0;
    switch (spec.kl_family) {
        case KlFamily::awgn:
            for (std::size_t j = 0; j < z.size(); ++j) grad[j] = z[j] / s02;
            break;
        case KlFamily::rbf: {
            const double s = squared_norm(z);
            for (std::size_t j = 0; j < z.size(); ++j)
                grad[j] = z[j] / s02 - 2.0 * z[j] / (2.0 * spec.sigma_n2 + s);
            break;
        }
        case KlFamily::laplace_ub:
            for (std::size_t j = 0; j < z.size(); ++j)
                grad[j] = z[j] / (spec.sigma_n * spec.sigma_0);
            break;
        case KlFamily::laplace_exact:
            for (std::size_t j = 0; j < z.size(); ++j) {
                const double a = std::abs(z[j]);
                grad[j] = (a == 0.0) ? 0.0
                                     : std::copysign((1.0 - std::exp(-a / spec.sigma_n)) / spec.sigma_0, z[j]);
            }
            break;
        case KlFamily::cauchy: {
            const double s = spec.gamma_n + spec.gamma_0;
            for (std::size_t j = 0; j < z.size(); ++j)
                grad[j] = 2.0 * z[j] / (s * s + z[j] * z[j]);
            break;
        }
        case KlFamily::none:
            break;
    }
    return grad;
}

/// One-hot training loss: categorical cross-entropy plus the family KL.
inline LossBreakdown total_loss(const ObjectiveSpec& spec, std::span<const double> decoder_output,
                                std::size_t true_index, std::span<const double> z) {
    if (spec.representation != Representation::one_hot)
        throw contract_error("total_loss: spec representation is not one_hot");
    LossBreakdown b;
    b.recon = recon_one_hot(decoder_output, true_index);
    b.kl = kl_divergence(spec, z);
    b.total = b.recon + b.kl;
    return b;
}

/// Binary training loss: Bernoulli cross-entropy plus the family KL.
inline LossBreakdown total_loss(const ObjectiveSpec& spec, std::span<const double> decoder_output,
                                std::span<const double> target_bits, std::span<const double> z) {
    if (spec.representation != Representation::binary)
        throw contract_error("total_loss: spec representation is not binary");
    LossBreakdown b;
    b.recon = recon_binary(decoder_output, target_bits);
    b.kl = kl_divergence(spec, z);
    b.total = b.recon + b.kl;
    return b;
}

} // namespace vicomm
