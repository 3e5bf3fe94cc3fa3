#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "zdjscc/core.hpp"
#include "zdjscc/quadrature.hpp"

using namespace zdjscc;

TEST_CASE("source model validation and derived quantities") {
    CHECK_THROWS_AS(SourceModel(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(SourceModel(1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(SourceModel(1.0, 1.1), std::invalid_argument);

    const SourceModel m(2.0, 0.3);
    CHECK(m.sigma_v2() + m.sigma_w2() == Catch::Approx(m.variance()).epsilon(1e-15));
    CHECK(m.lambda1() * m.lambda2() ==
          Catch::Approx(std::pow(m.variance(), 2) * (1.0 - 0.3 * 0.3)).epsilon(1e-14));
}

TEST_CASE("fully correlated sources coincide exactly") {
    const SourceModel m(1.0, 1.0);
    RandomStream s(42);
    for (int i = 0; i < 1000; ++i) {
        const auto [x1, x2] = sample_source_pair(m, s);
        REQUIRE(x1 == x2);
    }
}

TEST_CASE("sample statistics match the model") {
    const int n = 1'000'000;

    SECTION("uncorrelated pair") {
        const SourceModel m(1.0, 0.0);
        RandomStream s(7);
        double sxy = 0, sx = 0, sy = 0;
        for (int i = 0; i < n; ++i) {
            const auto [x1, x2] = sample_source_pair(m, s);
            sxy += x1 * x2;
            sx += x1;
            sy += x2;
        }
        const double corr = (sxy / n - (sx / n) * (sy / n));
        CHECK(std::abs(corr) < 0.005);
    }

    SECTION("strongly correlated pair") {
        const SourceModel m(1.0, 0.95);
        RandomStream s(8);
        double sxy = 0;
        for (int i = 0; i < n; ++i) {
            const auto [x1, x2] = sample_source_pair(m, s);
            sxy += x1 * x2;
        }
        CHECK(sxy / n == Catch::Approx(0.95).margin(0.01));
    }

    SECTION("empirical covariance matrix, mean band") {
        const SourceModel m(1.3, 0.6);
        RandomStream s(9);
        double m1 = 0, m2 = 0, v1 = 0, v2 = 0, cv = 0;
        for (int i = 0; i < n; ++i) {
            const auto [x1, x2] = sample_source_pair(m, s);
            m1 += x1;
            m2 += x2;
            v1 += x1 * x1;
            v2 += x2 * x2;
            cv += x1 * x2;
        }
        m1 /= n;
        m2 /= n;
        const double tol = 0.01 * m.variance();
        CHECK(std::abs(v1 / n - m.variance()) < tol);
        CHECK(std::abs(v2 / n - m.variance()) < tol);
        CHECK(std::abs(cv / n - 0.6 * m.variance()) < tol);
        // mean converges at sigma_x/sqrt(n); allow a 3 sigma band
        const double band = 3.0 * m.sigma_x() / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(m1) < band);
        CHECK(std::abs(m2) < band);
    }
}

TEST_CASE("joint density closed-form values") {
    const SourceModel iso(1.0, 0.0);
    CHECK(joint_density(0.0, 0.0, iso) ==
          Catch::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));

    // independence: density factors into the marginals
    for (double x1 : {-1.3, 0.2, 2.5})
        for (double x2 : {-0.7, 0.0, 1.9}) {
            const double prod = normal_pdf(x1, 0.0, 1.0) * normal_pdf(x2, 0.0, 1.0);
            CHECK(joint_density(x1, x2, iso) == Catch::Approx(prod).epsilon(1e-13));
        }

    CHECK_THROWS_AS(joint_density(0.0, 0.0, SourceModel(1.0, 1.0)), std::domain_error);
}

TEST_CASE("joint density integrates to one") {
    // tensor Gauss-Legendre over patches as an independent quadrature oracle
    const SourceModel m(1.0, 0.8);
    const int patches = 32;
    const double lim = 8.0;
    double total = 0.0;
    double x1n[16], w1n[16], x2n[16], w2n[16];
    for (int i = 0; i < patches; ++i) {
        const double a1 = -lim + 2.0 * lim * i / patches;
        const double b1 = -lim + 2.0 * lim * (i + 1) / patches;
        GaussLegendre16::nodes(a1, b1, x1n, w1n);
        for (int j = 0; j < patches; ++j) {
            const double a2 = -lim + 2.0 * lim * j / patches;
            const double b2 = -lim + 2.0 * lim * (j + 1) / patches;
            GaussLegendre16::nodes(a2, b2, x2n, w2n);
            for (int u = 0; u < 16; ++u)
                for (int v = 0; v < 16; ++v)
                    total += w1n[u] * w2n[v] * joint_density(x1n[u], x2n[v], m);
        }
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("channel transmit") {
    SECTION("vanishing noise recovers the sum") {
        const ChannelModel ch(1e-12, 1.0);
        RandomStream s(3);
        CHECK(gmac_transmit(1.25, -0.5, ch, s) == Catch::Approx(0.75).margin(1e-10));
    }

    SECTION("noise variance") {
        const ChannelModel ch(0.7, 1.0);
        RandomStream s(4);
        double v = 0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            const double z = gmac_transmit(0.0, 0.0, ch, s);
            v += z * z;
        }
        CHECK(v / n == Catch::Approx(0.49).epsilon(0.01));
    }

    SECTION("replay determinism") {
        const ChannelModel ch(0.5, 1.0);
        RandomStream a(99, 2, 5), b(99, 2, 5);
        for (int i = 0; i < 100; ++i)
            REQUIRE(gmac_transmit(1.0, 2.0, ch, a) == gmac_transmit(1.0, 2.0, ch, b));
    }
}

TEST_CASE("sdr in dB") {
    CHECK(sdr_db(1.0, 1.0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(sdr_db(1.0, 0.1) == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(sdr_db(1.0, 0.01) == Catch::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(sdr_db(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(sdr_db(1.0, -1.0), std::domain_error);
}

TEST_CASE("random streams") {
    SECTION("same identifiers replay bit-identically") {
        RandomStream a(123, 4, 56), b(123, 4, 56);
        for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
        RandomStream c(123, 4, 56), d(123, 4, 56);
        for (int i = 0; i < 1000; ++i) REQUIRE(c.next_gaussian() == d.next_gaussian());
    }

    SECTION("substreams differ") {
        RandomStream a(123, 0, 0), b(123, 0, 1), c(124, 0, 0);
        int same_ab = 0, same_ac = 0;
        for (int i = 0; i < 64; ++i) {
            const auto va = a.next_u64();
            same_ab += va == b.next_u64();
            same_ac += va == c.next_u64();
        }
        CHECK(same_ab == 0);
        CHECK(same_ac == 0);
    }

    SECTION("uniform moments") {
        RandomStream s(5);
        double m = 0, v = 0;
        const int n = 200'000;
        for (int i = 0; i < n; ++i) {
            const double u = s.next_uniform();
            m += u;
            v += u * u;
        }
        m /= n;
        CHECK(m == Catch::Approx(0.5).margin(0.002));
        CHECK(v / n - m * m == Catch::Approx(1.0 / 12).margin(0.002));
    }
}

TEST_CASE("distortion report average") {
    DistortionReport r;
    r.d1 = 0.25;
    r.d2 = 0.05;
    CHECK(r.d() == Catch::Approx(0.15).epsilon(1e-15));
}
