#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "vicomm/baselines.hpp"
#include "vicomm/eval.hpp"

using namespace vicomm;

TEST_CASE("QPSK is the four points (+-1/sqrt2, +-1/sqrt2) with E_n = 0.5") {
    const Constellation c = qam_constellation(2, 1);
    REQUIRE(c.size() == 4);
    REQUIRE(c.dim == 2);
    const double a = 1.0 / std::sqrt(2.0);
    for (const auto& p : c.points) {
        CHECK(std::abs(std::abs(p[0]) - a) <= 1e-12);
        CHECK(std::abs(std::abs(p[1]) - a) <= 1e-12);
    }
    CHECK(packing_density(c) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("QAM output has unit average power per channel use") {
    for (const auto& [bits, uses] : std::vector<std::pair<std::size_t, std::size_t>>{
             {2, 1}, {4, 1}, {2, 2}, {6, 1}, {2, 3}}) {
        CAPTURE(bits);
        CAPTURE(uses);
        const Constellation c = qam_constellation(bits, uses);
        // per complex use: components (u, u + uses)
        for (std::size_t u = 0; u < uses; ++u) {
            double power = 0.0;
            for (const auto& p : c.points) power += p[u] * p[u] + p[u + uses] * p[u + uses];
            power /= static_cast<double>(c.size());
            CHECK(std::abs(power - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("16-QAM neighbors differ in exactly one bit") {
    const Constellation c = qam_constellation(4, 1);
    REQUIRE(c.size() == 16);
    // nearest-neighbor pairs are the grid-adjacent ones; gray_fraction must be 1
    CHECK(gray_fraction(c) == 1.0);

    // spot-check horizontal/vertical adjacency explicitly
    const double step = 2.0 / std::sqrt(10.0);  // 4-level PAM spacing after unit-power scaling
    std::size_t adjacent_pairs = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            const double dx = c.points[i][0] - c.points[j][0];
            const double dy = c.points[i][1] - c.points[j][1];
            const double d2 = dx * dx + dy * dy;
            if (std::abs(d2 - step * step) <= 1e-9) {
                ++adjacent_pairs;
                CHECK(hamming_distance(c.labels[i], c.labels[j]) == 1);
            }
        }
    CHECK(adjacent_pairs == 24);  // 4x4 grid: 2 * 4 * 3
}

TEST_CASE("two uses of QPSK form the M=16, m=4 product constellation") {
    const Constellation c = qam_constellation(2, 2);
    REQUIRE(c.size() == 16);
    REQUIRE(c.dim == 4);
    REQUIRE(c.label_bits() == 4);
    const Constellation qpsk = qam_constellation(2, 1);
    // every point is a pair of QPSK points in the stacked layout
    for (std::size_t idx = 0; idx < 16; ++idx) {
        const std::size_t first = idx >> 2, second = idx & 3;
        CHECK(c.points[idx][0] == doctest::Approx(qpsk.points[first][0]));
        CHECK(c.points[idx][2] == doctest::Approx(qpsk.points[first][1]));
        CHECK(c.points[idx][1] == doctest::Approx(qpsk.points[second][0]));
        CHECK(c.points[idx][3] == doctest::Approx(qpsk.points[second][1]));
    }
}

TEST_CASE("unsupported QAM sizes are rejected") {
    CHECK_THROWS_AS(qam_constellation(3, 1), contract_error);
    CHECK_THROWS_AS(qam_constellation(2, 0), contract_error);
    CHECK_THROWS_AS(qam_constellation(0, 1), contract_error);
}

TEST_CASE("ml_detect basics") {
    const Constellation c = qam_constellation(2, 1);

    SUBCASE("a received point on a constellation point decodes to it") {
        for (std::size_t k = 0; k < c.size(); ++k) CHECK(ml_detect(c, c.points[k]) == k);
    }

    SUBCASE("far point in the first quadrant decodes to the first-quadrant symbol") {
        // distance table: (10, 0.1) is closest to the (+,+) point
        std::size_t pp = c.size();
        for (std::size_t k = 0; k < c.size(); ++k)
            if (c.points[k][0] > 0 && c.points[k][1] > 0) pp = k;
        REQUIRE(pp < c.size());
        CHECK(ml_detect(c, std::vector<double>{10.0, 0.1}) == pp);
    }

    SUBCASE("argmin is invariant to positive scaling") {
        Rng rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> y{rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
            const std::size_t base = ml_detect(c, y);
            for (double alpha : {0.5, 3.0, 17.0}) {
                Constellation scaled = c;
                std::vector<double> ys = y;
                for (auto& p : scaled.points)
                    for (auto& v : p) v *= alpha;
                for (auto& v : ys) v *= alpha;
                CHECK(ml_detect(scaled, ys) == base);
            }
        }
    }

    SUBCASE("ties break to the lowest index") {
        Constellation c2;
        c2.dim = 2;
        c2.points = {{1.0, 0.0}, {-1.0, 0.0}};
        c2.labels = {{0}, {1}};
        CHECK(ml_detect(c2, std::vector<double>{0.0, 5.0}) == 0);
    }
}

TEST_CASE("constellation CSV round-trips through export and import") {
    const Constellation c = qam_constellation(2, 2);
    std::ostringstream os;
    write_constellation_csv(os, c, "config_hash=test seed=0");
    std::istringstream is(os.str());
    const Constellation back = read_constellation_csv(is, "roundtrip");
    REQUIRE(back.size() == c.size());
    REQUIRE(back.dim == c.dim);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.labels[i] == c.labels[i]);
        for (std::size_t j = 0; j < c.dim; ++j) CHECK(back.points[i][j] == c.points[i][j]);
    }
}

TEST_CASE("malformed constellation rows report the line number") {
    const std::string text =
        "index,label_bits,c1,c2\n"
        "0,00,0.7,0.7\n"
        "1,01,not_a_number,0.7\n";
    std::istringstream is(text);
    try {
        read_constellation_csv(is, "fixture");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("fixture:3") != std::string::npos);
    }
}

TEST_CASE("an imported QPSK file reproduces the generator output") {
    const Constellation qpsk = qam_constellation(2, 1);
    std::ostringstream os;
    write_constellation_csv(os, qpsk);
    std::istringstream is(os.str());
    const Constellation imported = read_constellation_csv(is, "qpsk_fixture");
    for (std::size_t i = 0; i < qpsk.size(); ++i)
        for (std::size_t j = 0; j < qpsk.dim; ++j)
            CHECK(imported.points[i][j] == qpsk.points[i][j]);
    CHECK(packing_density(imported) == doctest::Approx(0.5).epsilon(1e-14));
}
