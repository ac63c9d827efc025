#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vicomm/constellation.hpp"
#include "vicomm/errors.hpp"

namespace vicomm {

namespace detail {

inline std::uint32_t gray_code(std::uint32_t v) { return v ^ (v >> 1); }

/// Gray-labeled PAM: level index g in [0, L) maps to amplitude 2g - (L-1),
/// label gray(g), so adjacent levels differ in exactly one bit.
struct PamAxis {
    std::vector<double> amplitude;       // by label value
    std::vector<std::uint32_t> label_of; // by level position
};

inline PamAxis gray_pam(std::size_t levels) {
    PamAxis axis;
    axis.amplitude.resize(levels);
    axis.label_of.resize(levels);
    for (std::size_t g = 0; g < levels; ++g) {
        const std::uint32_t label = gray_code(static_cast<std::uint32_t>(g));
        axis.label_of[g] = label;
        axis.amplitude[label] = 2.0 * static_cast<double>(g) - static_cast<double>(levels - 1);
    }
    return axis;
}

} // namespace detail

/// Gray-labeled square QAM per channel use (or BPSK for bits_per_use = 1),
/// extended over `uses` independent uses as a product constellation with
/// concatenated labels. Normalized to unit average symbol energy per use,
/// e.g. QPSK lands on (+-1/sqrt(2), +-1/sqrt(2)).
inline Constellation qam_constellation(std::size_t bits_per_use, std::size_t uses) {
    if (uses < 1) throw contract_error("qam_constellation: uses must be >= 1");
    if (bits_per_use != 1 && bits_per_use % 2 != 0)
        throw contract_error("qam_constellation: bits_per_use must be 1 (BPSK) or even (square QAM)");
    if (bits_per_use == 0 || bits_per_use > 16)
        throw contract_error("qam_constellation: unsupported bits_per_use");

    const std::size_t points_per_use = std::size_t{1} << bits_per_use;

    // single-use constellation in 2 real components [I, Q]
    std::vector<std::vector<double>> use_points(points_per_use, std::vector<double>(2, 0.0));
    if (bits_per_use == 1) {
        use_points[0] = {1.0, 0.0};
        use_points[1] = {-1.0, 0.0};
    } else {
        const std::size_t half_bits = bits_per_use / 2;
        const std::size_t levels = std::size_t{1} << half_bits;
        const detail::PamAxis axis = detail::gray_pam(levels);
        for (std::size_t label = 0; label < points_per_use; ++label) {
            const std::size_t label_i = label >> half_bits;
            const std::size_t label_q = label & (levels - 1);
            use_points[label] = {axis.amplitude[label_i], axis.amplitude[label_q]};
        }
        double power = 0.0;
        for (const auto& p : use_points) power += p[0] * p[0] + p[1] * p[1];
        power /= static_cast<double>(points_per_use);
        const double scale = 1.0 / std::sqrt(power);
        for (auto& p : use_points) {
            p[0] *= scale;
            p[1] *= scale;
        }
    }

    // product over uses; label = concatenation, use 0 in the most significant bits
    std::size_t M = 1;
    for (std::size_t u = 0; u < uses; ++u) M *= points_per_use;
    const std::size_t m = 2 * uses;
    const std::size_t d = bits_per_use * uses;

    Constellation c;
    c.dim = m;
    c.points.resize(M, std::vector<double>(m, 0.0));
    c.labels.resize(M);
    for (std::size_t idx = 0; idx < M; ++idx) {
        std::size_t rest = idx;
        for (std::size_t u = uses; u-- > 0;) {
            const std::size_t use_label = rest % points_per_use;
            rest /= points_per_use;
            // stacked layout [Re..., Im...]: use u occupies components (u, u + uses)
            c.points[idx][u] = use_points[use_label][0];
            c.points[idx][u + uses] = use_points[use_label][1];
        }
        c.labels[idx] = symbol_bits(idx, d);
    }
    c.validate();
    return c;
}

/// Externally optimized packings (e.g. sphere-packing databases) enter only
/// through this file import; nothing is generated in-repo.
inline Constellation import_constellation(const std::string& path) {
    return read_constellation_csv_file(path);
}

/// Minimum-Euclidean-distance detection; ties break to the lowest index.
inline std::size_t ml_detect(const Constellation& c, std::span<const double> received) {
    if (received.size() != c.dim) throw contract_error("ml_detect: received length does not match constellation");
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < c.dim; ++j) {
            const double diff = received[j] - c.points[i][j];
            d2 += diff * diff;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

} // namespace vicomm
