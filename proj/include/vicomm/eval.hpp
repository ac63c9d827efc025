#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vicomm/baselines.hpp"
#include "vicomm/channels.hpp"
#include "vicomm/constellation.hpp"
#include "vicomm/errors.hpp"
#include "vicomm/system.hpp"

namespace vicomm {

/// exp(Euler-Mascheroni), the Cg ~ 1.78 constant in the geometric SNR.
inline constexpr double cauchy_cg = 1.7810724179901979;

/// SNR is signal power over noise power per component: SNR = sum z_j^2 / (m * N_c)
/// with N_c the per-component noise power. N_c is sigma_n^2 for Gaussian noise,
/// 2 sigma_n^2 for Laplace (its variance), and 2 Cg gamma_n^2 for Cauchy, where
/// the variance is undefined and the geometric power takes its place (G-SNR).
/// Given a target SNR in dB and the constellation's measured per-component
/// power, this returns the family's noise parameter.
inline ChannelSpec channel_for_snr(ChannelFamily family, double snr_db, double power_per_component) {
    if (power_per_component <= 0.0) throw contract_error("channel_for_snr: power must be > 0");
    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    const double noise_power = power_per_component / snr_lin;
    switch (family) {
        case ChannelFamily::awgn: return ChannelSpec::awgn(noise_power);
        case ChannelFamily::rbf: return ChannelSpec::rbf(noise_power);
        case ChannelFamily::laplace: return ChannelSpec::laplace(std::sqrt(noise_power / 2.0));
        case ChannelFamily::cauchy: return ChannelSpec::cauchy(std::sqrt(noise_power / (2.0 * cauchy_cg)));
    }
    throw contract_error("channel_for_snr: unknown family");
}

struct StopRule {
    std::uint64_t target_errors = 500;
    std::uint64_t max_blocks = 20'000'000;
};

struct SnrRecord {
    double snr_db = 0.0;
    std::uint64_t blocks = 0;
    std::uint64_t errors = 0;
    double bler = 0.0;
    double ber = 0.0;
    double std_err = 0.0;  // MC standard error of the bler estimate
};

namespace detail {

using Decider = std::function<std::size_t(std::span<const double>)>;

/// Simulates blocks until the stop rule fires. The decider sees the channel
/// output (equalized for RBF); a degenerate channel estimate counts the block
/// as an erasure: full block and bit errors.
inline SnrRecord run_bler(const Constellation& c, ChannelFamily family, double snr_db,
                          const StopRule& stop, Rng& rng, const Decider& decide) {
    if (stop.max_blocks == 0) throw contract_error("bler: max_blocks must be > 0");
    const ChannelSpec channel = channel_for_snr(family, snr_db, c.average_power_per_component());
    const std::size_t d = c.label_bits();
    const double pilot_amp = std::sqrt(c.average_power_per_component());
    const std::complex<double> pilot_tx{pilot_amp, pilot_amp};

    SnrRecord rec;
    rec.snr_db = snr_db;
    std::uint64_t bit_errors = 0;
    while (rec.blocks < stop.max_blocks && rec.errors < stop.target_errors) {
        const std::size_t s = static_cast<std::size_t>(rng.below(c.size()));
        std::size_t decided;
        bool erasure = false;
        if (family == ChannelFamily::rbf) {
            const FadedBlock block = sample_rbf(c.points[s], channel.sigma_n2, rng, pilot_tx);
            try {
                decided = decide(equalize(block, pilot_tx));
            } catch (const degenerate_estimate_error&) {
                erasure = true;
                decided = c.size();
            }
        } else {
            decided = decide(sample_channel(channel, c.points[s], rng));
        }
        ++rec.blocks;
        if (erasure) {
            ++rec.errors;
            bit_errors += d;
        } else if (decided != s) {
            ++rec.errors;
            bit_errors += hamming_distance(c.labels[s], symbol_bits(decided, d));
        }
    }
    rec.bler = static_cast<double>(rec.errors) / static_cast<double>(rec.blocks);
    rec.ber = static_cast<double>(bit_errors) / static_cast<double>(rec.blocks * d);
    rec.std_err = std::sqrt(rec.bler * (1.0 - rec.bler) / static_cast<double>(rec.blocks));
    return rec;
}

} // namespace detail

/// BLER/BER of a classical constellation under minimum-distance detection.
inline SnrRecord bler_baseline(const Constellation& c, ChannelFamily family, double snr_db,
                               const StopRule& stop, Rng& rng) {
    return detail::run_bler(c, family, snr_db, stop, rng,
                            [&c](std::span<const double> y) { return ml_detect(c, y); });
}

/// BLER/BER of a trained system decoded by its own decoder network.
inline SnrRecord bler_system(const TrainedSystem& sys, ChannelFamily family, double snr_db,
                             const StopRule& stop, Rng& rng) {
    return detail::run_bler(sys.constellation, family, snr_db, stop, rng,
                            [&sys](std::span<const double> y) {
                                return decide_symbol(sys.config, forward(sys.decoder, y));
                            });
}

/// Mid-training BLER probe used for learning-curve exports.
inline SnrRecord bler_system_snapshot(const System& sys, ChannelFamily family, double snr_db,
                                      const StopRule& stop, Rng& rng) {
    const Constellation c = encode_all(sys.encoder, sys.config);
    return detail::run_bler(c, family, snr_db, stop, rng,
                            [&sys](std::span<const double> y) {
                                return decide_symbol(sys.config, forward(sys.decoder, y));
                            });
}

/// Normalized second moment E_n = (1/M) (1/d_min^2) sum_i ||z_i||^2.
/// Scale-insensitive; lower is denser.
inline double packing_density(const Constellation& c) {
    if (c.size() < 2) throw contract_error("packing_density: need M >= 2");
    double dmin2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < c.dim; ++k) {
                const double diff = c.points[i][k] - c.points[j][k];
                d2 += diff * diff;
            }
            dmin2 = std::min(dmin2, d2);
        }
    }
    if (dmin2 == 0.0) throw numeric_error("packing_density: duplicate points, d_min = 0");
    double sum = 0.0;
    for (const auto& p : c.points) sum += squared_norm(p);
    return sum / (static_cast<double>(c.size()) * dmin2);
}

/// Fraction of (point, nearest-neighbor) pairs whose labels differ in exactly
/// one bit. Coincident points count as Hamming-0 neighbors, so a constellation
/// that stacks two symbols on top of each other is penalized rather than
/// credited.
inline double gray_fraction(const Constellation& c) {
    if (c.size() < 2) throw contract_error("gray_fraction: need M >= 2");
    std::size_t gray_pairs = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        std::size_t nn = c.size();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t k = 0; k < c.dim; ++k) {
                const double diff = c.points[i][k] - c.points[j][k];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                nn = j;
            }
        }
        if (best > 0.0 && hamming_distance(c.labels[i], c.labels[nn]) == 1) ++gray_pairs;
    }
    return static_cast<double>(gray_pairs) / static_cast<double>(c.size());
}

struct MiBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Mutual-information bracket for Gaussian-prior systems: the lower bound is
/// the Monte Carlo average of log p(x | zhat) plus log M (uniform messages);
/// the upper bound is the exact symbol average of the closed-form KL. Both
/// bounds bracket I(X; Zhat) of the bare channel, so the RBF case feeds the
/// decoder the unequalized output; a pilot would add side information the
/// upper bound does not account for.
inline MiBounds mi_bounds(const TrainedSystem& sys, const ChannelSpec& channel, std::size_t samples,
                          Rng& rng) {
    if (channel.family != ChannelFamily::awgn && channel.family != ChannelFamily::rbf)
        throw contract_error("mi_bounds: needs a Gaussian-prior channel family (awgn or rbf)");
    if (samples == 0) throw contract_error("mi_bounds: samples must be > 0");
    const Constellation& c = sys.constellation;
    const std::size_t M = c.size();
    const std::size_t d = bits_per_symbol(M);

    double loglik = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
        const std::size_t s = static_cast<std::size_t>(rng.below(M));
        std::vector<double> y;
        if (channel.family == ChannelFamily::rbf) {
            y = sample_rbf(c.points[s], channel.sigma_n2, rng).received;
        } else {
            y = sample_awgn(c.points[s], channel.sigma_n2, rng);
        }
        const std::vector<double> out = forward(sys.decoder, y);
        if (sys.config.representation == Representation::one_hot) {
            loglik += -recon_one_hot(out, s);
        } else {
            const auto bits = symbol_bits(s, d);
            std::vector<double> target(d);
            for (std::size_t j = 0; j < d; ++j) target[j] = bits[j];
            loglik += -recon_binary(out, target);
        }
    }

    const double sigma_0_2 = sys.config.objective.sigma_0 * sys.config.objective.sigma_0;
    double kl_sum = 0.0;
    for (const auto& z : c.points)
        kl_sum += (channel.family == ChannelFamily::rbf) ? kl_rbf(z, channel.sigma_n2, sigma_0_2)
                                                         : kl_awgn(z, channel.sigma_n2, sigma_0_2);

    MiBounds b;
    b.lower = std::log(static_cast<double>(M)) + loglik / static_cast<double>(samples);
    b.upper = kl_sum / static_cast<double>(M);
    return b;
}

/// Everything one evaluation produces, with provenance for reproduction.
struct EvalReport {
    std::vector<SnrRecord> records;
    double e_n = std::numeric_limits<double>::quiet_NaN();
    double hamming_nn_fraction = std::numeric_limits<double>::quiet_NaN();
    double mi_lower = std::numeric_limits<double>::quiet_NaN();
    double mi_upper = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    std::string config_hash;
};

inline void write_bler_csv(std::ostream& os, const std::vector<SnrRecord>& records,
                           const std::string& provenance = "") {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "snr_db,blocks,errors,bler,ber,stderr\n";
    os.precision(12);
    for (const auto& r : records)
        os << r.snr_db << "," << r.blocks << "," << r.errors << "," << r.bler << "," << r.ber << ","
           << r.std_err << "\n";
}

} // namespace vicomm
