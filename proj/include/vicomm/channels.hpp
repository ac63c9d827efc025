#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "vicomm/errors.hpp"
#include "vicomm/rng.hpp"

namespace vicomm {

enum class ChannelFamily { awgn, rbf, laplace, cauchy };

inline std::string to_string(ChannelFamily f) {
    switch (f) {
        case ChannelFamily::awgn: return "awgn";
        case ChannelFamily::rbf: return "rbf";
        case ChannelFamily::laplace: return "laplace";
        case ChannelFamily::cauchy: return "cauchy";
    }
    return "?";
}

inline ChannelFamily channel_family_from_string(const std::string& s) {
    if (s == "awgn") return ChannelFamily::awgn;
    if (s == "rbf") return ChannelFamily::rbf;
    if (s == "laplace") return ChannelFamily::laplace;
    if (s == "cauchy") return ChannelFamily::cauchy;
    throw config_error("unknown channel family '" + s + "'");
}

/// Tagged channel family plus the one noise parameter that family uses:
/// sigma_n2 = Gaussian noise variance per component (awgn, rbf),
/// sigma_n  = Laplace scale (variance is 2 sigma_n^2),
/// gamma_n  = Cauchy dispersion.
struct ChannelSpec {
    ChannelFamily family = ChannelFamily::awgn;
    double sigma_n2 = 0.0;
    double sigma_n = 0.0;
    double gamma_n = 0.0;

    static ChannelSpec awgn(double sigma_n2) { return {ChannelFamily::awgn, sigma_n2, 0.0, 0.0}; }
    static ChannelSpec rbf(double sigma_n2) { return {ChannelFamily::rbf, sigma_n2, 0.0, 0.0}; }
    static ChannelSpec laplace(double sigma_n) { return {ChannelFamily::laplace, 0.0, sigma_n, 0.0}; }
    static ChannelSpec cauchy(double gamma_n) { return {ChannelFamily::cauchy, 0.0, 0.0, gamma_n}; }

    void validate() const {
        switch (family) {
            case ChannelFamily::awgn:
            case ChannelFamily::rbf:
                if (sigma_n2 < 0.0) throw contract_error("channel: sigma_n2 must be >= 0");
                break;
            case ChannelFamily::laplace:
                if (sigma_n < 0.0) throw contract_error("channel: sigma_n must be >= 0");
                break;
            case ChannelFamily::cauchy:
                if (gamma_n < 0.0) throw contract_error("channel: gamma_n must be >= 0");
                break;
        }
    }
};

// Complex length-(m/2) signals are stacked as m real components [Re..., Im...].

/// One Rayleigh-block-fading observation: the faded+noisy data block, the
/// true complex gain (kept for training-time gradient chaining and test
/// hooks), and the pilot observed through the same gain with fresh noise.
struct FadedBlock {
    std::vector<double> received;
    std::complex<double> h_true;
    std::complex<double> pilot_rx;
};

/// Multiplies the stacked representation blockwise by a complex gain:
/// (re_k, im_k) -> c * (re_k + i im_k).
inline std::vector<double> apply_complex_gain(std::span<const double> v, std::complex<double> c) {
    if (v.size() % 2 != 0) throw contract_error("apply_complex_gain: dimension must be even");
    const std::size_t half = v.size() / 2;
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < half; ++k) {
        out[k] = c.real() * v[k] - c.imag() * v[k + half];
        out[k + half] = c.real() * v[k + half] + c.imag() * v[k];
    }
    return out;
}

/// z + n with n i.i.d. N(0, sigma_n2) per component.
inline std::vector<double> sample_awgn(std::span<const double> z, double sigma_n2, Rng& rng) {
    if (sigma_n2 < 0.0) throw contract_error("sample_awgn: sigma_n2 must be >= 0");
    const double sigma = std::sqrt(sigma_n2);
    std::vector<double> out(z.begin(), z.end());
    for (auto& v : out) v += sigma * rng.normal();
    return out;
}

/// Fading with a caller-supplied gain; sample_rbf draws h and delegates here,
/// tests can force h directly. The pilot goes through the same h with
/// independent noise of the same per-component variance.
inline FadedBlock sample_rbf_with_gain(std::span<const double> z, std::complex<double> h,
                                       double sigma_n2, Rng& rng,
                                       std::complex<double> pilot_tx = {1.0, 1.0}) {
    if (z.size() % 2 != 0) throw contract_error("sample_rbf: dimension must be even");
    if (sigma_n2 < 0.0) throw contract_error("sample_rbf: sigma_n2 must be >= 0");
    const double sigma = std::sqrt(sigma_n2);
    FadedBlock block;
    block.h_true = h;
    block.received = apply_complex_gain(z, h);
    for (auto& v : block.received) v += sigma * rng.normal();
    block.pilot_rx = h * pilot_tx + std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
    return block;
}

/// h ~ CN(0,1): Re, Im each N(0, 1/2), so E|h|^2 = 1.
inline FadedBlock sample_rbf(std::span<const double> z, double sigma_n2, Rng& rng,
                             std::complex<double> pilot_tx = {1.0, 1.0}) {
    const double half = std::sqrt(0.5);
    const std::complex<double> h(half * rng.normal(), half * rng.normal());
    return sample_rbf_with_gain(z, h, sigma_n2, rng, pilot_tx);
}

/// Pilot-based zero-forcing equalizer: hhat = pilot_rx / pilot_tx, output =
/// received / hhat applied blockwise. Throws degenerate_estimate_error when
/// |hhat| < 1e-12 (caller counts the block as an erasure).
inline std::vector<double> equalize(const FadedBlock& block, std::complex<double> pilot_tx) {
    if (std::abs(pilot_tx) == 0.0) throw contract_error("equalize: pilot_tx must be nonzero");
    const std::complex<double> h_hat = block.pilot_rx / pilot_tx;
    if (std::abs(h_hat) < 1e-12)
        throw degenerate_estimate_error("equalize: channel estimate magnitude below 1e-12");
    return apply_complex_gain(block.received, 1.0 / h_hat);
}

/// z + n with n i.i.d. Laplace(0, sigma_n) per component via inverse CDF.
inline std::vector<double> sample_laplace(std::span<const double> z, double sigma_n, Rng& rng) {
    if (sigma_n < 0.0) throw contract_error("sample_laplace: sigma_n must be >= 0");
    std::vector<double> out(z.begin(), z.end());
    for (auto& v : out) {
        const double u = rng.uniform() - 0.5;
        // 1 - 2|u| in (0, 1]; floor keeps the log finite so sigma_n = 0 is exact identity
        const double t = std::max(1.0 - 2.0 * std::abs(u), 1e-300);
        v += -sigma_n * std::copysign(std::log(t), u);
    }
    return out;
}

/// z + n with n i.i.d. Cauchy(0, gamma_n) per component via gamma * tan(pi (u - 1/2)).
inline std::vector<double> sample_cauchy(std::span<const double> z, double gamma_n, Rng& rng) {
    if (gamma_n < 0.0) throw contract_error("sample_cauchy: gamma_n must be >= 0");
    constexpr double pi = 3.14159265358979323846;
    std::vector<double> out(z.begin(), z.end());
    for (auto& v : out) {
        double u = rng.uniform();
        // keep tan() finite so gamma_n = 0 degenerates to the identity
        u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
        v += gamma_n * std::tan(pi * (u - 0.5));
    }
    return out;
}

/// Samples whichever family the spec names, for callers generic over channels.
/// RBF callers needing the pilot should use sample_rbf directly.
inline std::vector<double> sample_channel(const ChannelSpec& spec, std::span<const double> z, Rng& rng) {
    spec.validate();
    switch (spec.family) {
        case ChannelFamily::awgn: return sample_awgn(z, spec.sigma_n2, rng);
        case ChannelFamily::laplace: return sample_laplace(z, spec.sigma_n, rng);
        case ChannelFamily::cauchy: return sample_cauchy(z, spec.gamma_n, rng);
        case ChannelFamily::rbf: throw contract_error("sample_channel: use sample_rbf for fading blocks");
    }
    throw contract_error("sample_channel: unknown family");
}

} // namespace vicomm
