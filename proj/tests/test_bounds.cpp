#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zdjscc/bounds.hpp"
#include "zdjscc/montecarlo.hpp"

using namespace zdjscc;

TEST_CASE("crossover snr") {
    CHECK(crossover_snr(0.0) == 0.0);
    CHECK(crossover_snr(0.5) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(crossover_snr(0.95) == Catch::Approx(0.95 / (1.0 - 0.9025)).epsilon(1e-12));
    CHECK(std::isinf(crossover_snr(1.0)));
}

TEST_CASE("bound closed forms") {
    SECTION("independent sources: sqrt(1 + 2 snr)") {
        for (int i = 0; i <= 100; ++i) {
            const double snr_db = -10.0 + 0.6 * i;
            const double snr = linear_from_db(snr_db);
            const auto b = opta_sdr(snr, 1.0, 0.0);
            REQUIRE(b.sdr_linear ==
                    Catch::Approx(std::sqrt(1.0 + 2.0 * snr)).epsilon(1e-12));
        }
    }

    SECTION("fully correlated sources: 1 + 4 snr") {
        for (int i = 0; i <= 100; ++i) {
            const double snr = linear_from_db(-10.0 + 0.6 * i);
            const auto b = opta_sdr(snr, 1.0, 1.0);
            REQUIRE(b.branch == BoundBranch::low_snr);
            REQUIRE(b.sdr_linear == Catch::Approx(1.0 + 4.0 * snr).epsilon(1e-12));
        }
    }

    SECTION("branches agree at the crossover") {
        for (double rho : {0.3, 0.5, 0.8, 0.95}) {
            const double snr = crossover_snr(rho);
            const double lo = detail::opta_low_branch(snr, 1.0, rho);
            const double hi = detail::opta_high_branch(snr, 1.0, rho);
            REQUIRE(lo == Catch::Approx(hi).epsilon(1e-12));
        }
    }
}

TEST_CASE("bound monotonicity") {
    for (double rho : {0.0, 0.4, 0.9, 0.99}) {
        double prev = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double snr = linear_from_db(-15.0 + 0.3 * i);
            const double s = opta_sdr(snr, 1.0, rho).sdr_linear;
            REQUIRE(s > prev);
            prev = s;
        }
    }
    // nondecreasing in correlation at fixed snr
    for (double snr_db : {0.0, 15.0, 30.0}) {
        const double snr = linear_from_db(snr_db);
        double prev = 0.0;
        for (int i = 0; i <= 50; ++i) {
            const double s = opta_sdr(snr, 1.0, i / 50.0).sdr_linear;
            REQUIRE(s >= prev);
            prev = s;
        }
    }
}

TEST_CASE("uncoded transmission meets the bound up to the crossover") {
    const double rho = 0.5;
    const double cross = crossover_snr(rho);
    for (double f : {0.1, 0.4, 0.7, 1.0}) {
        const double snr = cross * f;
        CHECK(uncoded_sdr(snr, 1.0, rho) ==
              Catch::Approx(opta_sdr(snr, 1.0, rho).sdr_linear).epsilon(1e-9));
    }
    for (double f : {1.5, 4.0, 100.0}) {
        const double snr = cross * f;
        CHECK(uncoded_sdr(snr, 1.0, rho) < opta_sdr(snr, 1.0, rho).sdr_linear);
    }
    // coherent combining of identical sources
    for (double snr : {0.5, 3.0, 1000.0})
        CHECK(uncoded_sdr(snr, 1.0, 1.0) == Catch::Approx(1.0 + 4.0 * snr).epsilon(1e-12));
}

TEST_CASE("uncoded closed form matches Monte Carlo") {
    SimulationConfig cfg;
    cfg.scheme = Scheme::uncoded;
    cfg.model = SourceModel(1.0, 0.0);
    cfg.channel = ChannelModel(0.1, 1.0);  // snr = 100
    cfg.n_samples = 1'000'000;
    cfg.master_seed = 11;
    const SweepRecord rec = simulate(cfg);
    const double closed = db_from_linear(uncoded_sdr(100.0, 1.0, 0.0));
    CHECK(rec.sdr_db == Catch::Approx(closed).margin(0.05));
}

TEST_CASE("high-snr approximation") {
    CHECK(high_snr_bound_sdr(2.0, 0.0) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(high_snr_bound_sdr(10.0, 1.0), std::invalid_argument);

    SECTION("approaches the bound") {
        const double r = high_snr_bound_sdr(1e4, 0.0) / opta_sdr(1e4, 1.0, 0.0).sdr_linear;
        CHECK(r == Catch::Approx(1.0).margin(0.01));
        for (double rho : {0.0, 0.5, 0.9}) {
            const double ratio =
                high_snr_bound_sdr(1e9, rho) / opta_sdr(1e9, 1.0, rho).sdr_linear;
            CHECK(ratio == Catch::Approx(1.0).margin(1e-3));
        }
    }

    SECTION("scales as the inverse square root of 1 - rho") {
        const double snr = 50.0;
        for (double rho : {0.0, 0.3, 0.75}) {
            const double expected = high_snr_bound_sdr(snr, 0.0) / std::sqrt(1.0 - rho);
            CHECK(high_snr_bound_sdr(snr, rho) == Catch::Approx(expected).epsilon(1e-13));
        }
    }
}
