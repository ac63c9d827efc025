#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "vicomm/channels.hpp"
#include "vicomm/rng.hpp"

using namespace vicomm;

TEST_CASE("awgn with zero variance is the identity") {
    Rng rng(1);
    const std::vector<double> z{0.3, -1.2, 4.5};
    const auto out = sample_awgn(z, 0.0, rng);
    CHECK(out == z);
}

TEST_CASE("awgn sample mean and variance match the law") {
    Rng rng(2);
    const std::size_t n = 200'000;
    const double sigma_n2 = 0.1;
    std::vector<double> samples(n);
    const std::vector<double> z{0.0};
    for (std::size_t i = 0; i < n; ++i) samples[i] = sample_awgn(z, sigma_n2, rng)[0];
    const auto st = oracles::moments(samples);
    CHECK(std::abs(st.mean - 0.0) <= 4.0 * st.se_mean);
    CHECK(std::abs(st.variance - sigma_n2) <= 4.0 * st.se_variance);
}

TEST_CASE("awgn output mean tracks z") {
    Rng rng(3);
    const std::vector<double> z{1.7};
    const std::size_t n = 100'000;
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = sample_awgn(z, 0.25, rng)[0];
    const auto st = oracles::moments(samples);
    CHECK(std::abs(st.mean - 1.7) <= 4.0 * st.se_mean);
}

TEST_CASE("rbf with forced unit gain and no noise returns z") {
    Rng rng(4);
    const std::vector<double> z{1.0, -2.0, 0.5, 3.0};
    const auto block = sample_rbf_with_gain(z, {1.0, 0.0}, 0.0, rng);
    CHECK(block.received == z);
}

TEST_CASE("rbf rejects odd dimension") {
    Rng rng(5);
    CHECK_THROWS_AS(sample_rbf(std::vector<double>{1.0, 2.0, 3.0}, 0.1, rng), contract_error);
}

TEST_CASE("fading gain has unit mean square magnitude") {
    Rng rng(6);
    const std::vector<double> z{0.0, 0.0};
    const std::size_t n = 300'000;
    std::vector<double> h2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto block = sample_rbf(z, 0.0, rng);
        h2[i] = std::norm(block.h_true);
    }
    const auto st = oracles::moments(h2);
    CHECK(std::abs(st.mean - 1.0) <= 4.0 * st.se_mean);
}

TEST_CASE("rbf sample covariance matches the stacked-complex law") {
    // covariance of h z + n is (1/2)(z z^T - J z z^T J) + sigma_n2 I
    const std::vector<std::vector<double>> zs = {
        {1.0, 0.5}, {-0.7, 1.3}, {1.0, -1.0, 0.5, 2.0}};
    const double sigma_n2 = 0.2;
    Rng rng(7);
    for (const auto& z : zs) {
        CAPTURE(z.size());
        const std::size_t m = z.size();
        const oracles::Mat expected = oracles::rbf_covariance(z, sigma_n2);

        const std::size_t n = 200'000;
        std::vector<double> sum2(m * m, 0.0);   // sum of x_i x_j
        std::vector<double> sum4(m * m, 0.0);   // sum of (x_i x_j)^2
        for (std::size_t t = 0; t < n; ++t) {
            const auto block = sample_rbf(z, sigma_n2, rng);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    const double prod = block.received[i] * block.received[j];
                    sum2[i * m + j] += prod;
                    sum4[i * m + j] += prod * prod;
                }
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double mean = sum2[i * m + j] / static_cast<double>(n);
                const double second = sum4[i * m + j] / static_cast<double>(n);
                const double se = std::sqrt(std::max(second - mean * mean, 0.0) / static_cast<double>(n));
                CHECK(std::abs(mean - expected(i, j)) <= 4.0 * std::max(se, 1e-6));
            }
    }
}

TEST_CASE("equalizer inverts a noiseless channel") {
    Rng rng(8);
    const std::vector<double> z{0.9, -0.4, 1.2, 0.1};
    SUBCASE("random gain") {
        const auto block = sample_rbf(z, 0.0, rng);
        const auto out = equalize(block, {1.0, 1.0});
        for (std::size_t i = 0; i < z.size(); ++i) CHECK(out[i] == doctest::Approx(z[i]).epsilon(1e-12));
    }
    SUBCASE("pure rotation h = i") {
        const auto block = sample_rbf_with_gain(z, {0.0, 1.0}, 0.0, rng);
        const auto out = equalize(block, {1.0, 1.0});
        for (std::size_t i = 0; i < z.size(); ++i) CHECK(out[i] == doctest::Approx(z[i]).epsilon(1e-12));
    }
}

TEST_CASE("equalizer throws on a degenerate estimate") {
    FadedBlock block;
    block.received = {1.0, 1.0};
    block.h_true = {1.0, 0.0};
    block.pilot_rx = {1e-13, 0.0};
    CHECK_THROWS_AS(equalize(block, {1.0, 0.0}), degenerate_estimate_error);
    CHECK_THROWS_AS(equalize(block, {0.0, 0.0}), contract_error);
}

TEST_CASE("equalized error improves with pilot power") {
    // 3-point pilot power sweep at fixed noise; stronger pilots estimate h
    // better, so the equalized output gets closer to z. Deep fades make the
    // per-block squared error heavy-tailed (1/|h|^2 has no mean under
    // Rayleigh), so compare medians, which converge.
    const std::vector<double> z{1.0, 0.0};
    const double sigma_n2 = 0.1;
    std::vector<double> median_se;
    for (const double amp : {0.3, 1.0, 3.0}) {
        Rng rng(9);  // same fade/noise stream for each sweep point
        const std::complex<double> pilot{amp, amp};
        const std::size_t n = 60'000;
        std::vector<double> se(n);
        for (std::size_t t = 0; t < n; ++t) {
            const auto block = sample_rbf(z, sigma_n2, rng, pilot);
            const auto out = equalize(block, pilot);
            double acc = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) acc += (out[i] - z[i]) * (out[i] - z[i]);
            se[t] = acc;
        }
        std::sort(se.begin(), se.end());
        median_se.push_back(oracles::quantile_sorted(se, 0.5));
    }
    CHECK(median_se[1] < median_se[0]);
    CHECK(median_se[2] < median_se[1]);
}

TEST_CASE("laplace with zero scale is the identity") {
    Rng rng(10);
    const std::vector<double> z{0.2, -0.8};
    CHECK(sample_laplace(z, 0.0, rng) == z);
}

TEST_CASE("laplace sample variance and median match the law") {
    Rng rng(11);
    const double scale = 0.5;
    const std::size_t n = 400'000;
    std::vector<double> samples(n);
    const std::vector<double> z{0.7};
    for (std::size_t i = 0; i < n; ++i) samples[i] = sample_laplace(z, scale, rng)[0] - 0.7;
    auto st = oracles::moments(samples);
    CHECK(std::abs(st.variance - 2.0 * scale * scale) <= 4.0 * st.se_variance);

    std::sort(samples.begin(), samples.end());
    const double median = oracles::quantile_sorted(samples, 0.5);
    // SE of the sample median: 1 / (2 f(0) sqrt(n)) with f(0) = 1/(2 scale)
    const double se_median = scale / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(median) <= 4.0 * se_median);
}

TEST_CASE("cauchy with zero dispersion is the identity") {
    Rng rng(12);
    const std::vector<double> z{5.0, -3.0};
    CHECK(sample_cauchy(z, 0.0, rng) == z);
}

TEST_CASE("cauchy median and quartiles match the law") {
    Rng rng(13);
    const double gamma = 0.8;
    const double center = -1.1;
    const std::size_t n = 400'000;
    std::vector<double> samples(n);
    const std::vector<double> z{center};
    for (std::size_t i = 0; i < n; ++i) samples[i] = sample_cauchy(z, gamma, rng)[0];

    std::size_t below = 0;
    for (double s : samples)
        if (s <= center) ++below;
    const double cdf_at_center = static_cast<double>(below) / static_cast<double>(n);
    CHECK(std::abs(cdf_at_center - 0.5) <= 4.0 * std::sqrt(0.25 / static_cast<double>(n)));

    std::sort(samples.begin(), samples.end());
    const double q25 = oracles::quantile_sorted(samples, 0.25);
    const double q75 = oracles::quantile_sorted(samples, 0.75);
    // quartiles of Cauchy sit at center +- gamma; SE via the density at them
    const double se_quartile = std::sqrt(0.1875 / static_cast<double>(n)) * 2.0 * oracles::kPi * gamma;
    CHECK(std::abs((q75 - q25) / 2.0 - gamma) <= 4.0 * se_quartile);
}

TEST_CASE("samplers are deterministic given the stream position") {
    const std::vector<double> z{0.1, 0.2};
    Rng a(77), b(77);
    CHECK(sample_awgn(z, 0.3, a) == sample_awgn(z, 0.3, b));
    CHECK(sample_laplace(z, 0.3, a) == sample_laplace(z, 0.3, b));
    CHECK(sample_cauchy(z, 0.3, a) == sample_cauchy(z, 0.3, b));
    const auto ba = sample_rbf(z, 0.3, a);
    const auto bb = sample_rbf(z, 0.3, b);
    CHECK(ba.received == bb.received);
    CHECK(ba.h_true == bb.h_true);
    CHECK(ba.pilot_rx == bb.pilot_rx);
}
