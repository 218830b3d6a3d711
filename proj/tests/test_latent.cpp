#include <catch2/catch_amalgamated.hpp>

#include "lsi/latent.hpp"

using lsi::LatentDistribution;

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(LatentDistribution::atoms({{0.0, 0.4}, {1.0, 0.4}}), std::invalid_argument);
    CHECK_THROWS_AS(LatentDistribution::atoms({{0.5, 0.5}, {0.5, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(LatentDistribution::piecewise({{0.0, 0.6, 0.5}, {0.5, 1.0, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(LatentDistribution::piecewise({{0.0, 1.2, 1.0}}), std::invalid_argument);
    CHECK_NOTHROW(LatentDistribution::piecewise({{0.0, 0.4, 0.5}, {0.6, 1.0, 0.5}}));
}

TEST_CASE("sampling is deterministic and order-independent") {
    auto dist = LatentDistribution::uniform();
    auto a = lsi::sample_latents(dist, 100, 42);
    auto b = lsi::sample_latents(dist, 100, 42);
    CHECK(a.positions == b.positions);

    auto c = lsi::sample_latents(dist, 17, 42);  // prefix of a larger sample
    for (std::size_t i = 0; i < 17; ++i) CHECK(a[i] == c[i]);

    auto d = lsi::sample_latents(dist, 100, 43);
    CHECK(a.positions != d.positions);
}

TEST_CASE("atom sampling concentrates at the atom weights") {
    auto dist = LatentDistribution::atoms({{0.0, 0.5}, {1.0, 0.5}});
    auto s = lsi::sample_latents(dist, 10000, 7);
    std::size_t at_zero = 0;
    for (double x : s.positions) {
        CHECK((x == 0.0 || x == 1.0));
        at_zero += x == 0.0;
    }
    // binomial: sd of the fraction is 0.005, so 0.02 is a 4-sigma margin
    CHECK(std::abs(static_cast<double>(at_zero) / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("uniform sampling mean") {
    auto s = lsi::sample_latents(LatentDistribution::uniform(), 10000, 11);
    double mean = 0.0;
    for (double x : s.positions) mean += x;
    mean /= 10000.0;
    CHECK(std::abs(mean - 0.5) < 0.02);  // CLT: sd(mean) ~ 0.0029
}

TEST_CASE("piecewise sampling stays in support") {
    auto dist = LatentDistribution::piecewise({{0.0, 0.2, 0.3}, {0.7, 1.0, 0.7}});
    auto s = lsi::sample_latents(dist, 5000, 3);
    std::size_t low = 0;
    for (double x : s.positions) {
        const int iv = dist.interval_index(x);
        REQUIRE(iv >= 0);
        low += iv == 0;
    }
    // piece weights 0.3 / 0.7; 4 sigma ~ 0.026
    CHECK(std::abs(static_cast<double>(low) / 5000.0 - 0.3) < 0.03);
    CHECK(dist.interval_index(0.5) == -1);
}
