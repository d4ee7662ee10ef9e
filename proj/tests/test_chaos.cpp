#include <cmath>

#include <doctest.h>

#include "lorenz/chaos.hpp"

using namespace lorenz;

TEST_SUITE("chaos") {

TEST_CASE("lyapunov spectrum at the stable origin is its eigenvalues") {
    const LorenzParams p{10.0, 8.0 / 3.0, 0.5};
    const LyapunovSpectrum s = lyapunov_spectrum(p, State(1.0, 1.0, 1.0), 10.0, 500.0, 0.5);
    const double root = std::sqrt(101.0);
    CHECK(std::abs(s.exponents[0] - (-11.0 + root) / 2.0) < 0.02);
    CHECK(std::abs(s.exponents[1] - (-8.0 / 3.0)) < 0.02);
    CHECK(std::abs(s.exponents[2] - (-11.0 - root) / 2.0) < 0.02);
}

TEST_CASE("lyapunov spectrum at r = 28") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    const LyapunovSpectrum s = lyapunov_spectrum(p, State(1.0, 1.0, 1.0), 50.0, 500.0, 0.5);
    CHECK(s.exponents[0] > 0.7);
    CHECK(s.exponents[0] < 1.1);
    CHECK(std::abs(s.exponents[1]) < 0.05);
    CHECK(std::abs(s.sum() - p.divergence()) < 1e-3);
    CHECK(s.exponents[0] >= s.exponents[1]);
    CHECK(s.exponents[1] >= s.exponents[2]);
}

TEST_CASE("renorm interval bounds") {
    const LorenzParams p;
    CHECK_THROWS_AS(lyapunov_spectrum(p, State(1.0, 1.0, 1.0), 1.0, 10.0, 0.01), ValidationError);
    CHECK_THROWS_AS(lyapunov_spectrum(p, State(1.0, 1.0, 1.0), 1.0, 10.0, 2.0), ValidationError);
}

TEST_CASE("clusters") {
    CHECK(cluster_count({1.0, 1.0 + 1e-5, 2.0, 2.0}).value() == 2);
    CHECK(cluster_count({}).value() == 0);
    CHECK(!cluster_count({1.0, 1.0005, 1.001, 1.0015}).has_value());
}

TEST_CASE("grid") {
    const auto g = make_grid(300.0, 301.0, 0.25);
    REQUIRE(g.size() == 5);
    CHECK(g.back() == doctest::Approx(301.0));
    CHECK_THROWS_AS(make_grid(1.0, 2.0, 0.0), ValidationError);
}

TEST_CASE("sweep verdicts") {
    SweepSettings s;
    s.transient = 100.0;
    s.total = 300.0;
    const auto recs = sweep({}, {10.0, 28.0, 350.0}, s);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].verdict == SweepVerdict::FixedPoint);
    CHECK(recs[1].verdict == SweepVerdict::Chaotic);
    CHECK(recs[2].verdict == SweepVerdict::Periodic);
    CHECK(recs[2].n_clusters == 1);
    CHECK(recs[1].leading_exponent == recs[1].exponents[0]);
    CHECK_THROWS_AS(sweep({}, {2.0, 1.0}, s), ValidationError);
}

}
