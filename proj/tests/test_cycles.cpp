#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "lorenz/cycles.hpp"

using namespace lorenz;

namespace {

Mat3 rotation(double a, double b) {
    Mat3 rz, rx;
    rz << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    rx << 1, 0, 0, 0, std::cos(b), -std::sin(b), 0, std::sin(b), std::cos(b);
    return rz * rx;
}

std::vector<double> sorted_moduli(const std::array<Complex, 3>& m) {
    std::vector<double> v{std::abs(m[0]), std::abs(m[1]), std::abs(m[2])};
    std::sort(v.begin(), v.end());
    return v;
}

int count_outside(const PeriodicOrbit& o) {
    int n = 0;
    for (const auto& m : o.nontrivial_multipliers()) n += std::abs(m) > 1.0;
    return n;
}

const BatteryResult& battery_245() {
    static const BatteryResult res = [] {
        BatteryOptions opts;
        opts.budget = 60;
        return cycle_search_battery({10.0, 8.0 / 3.0, 24.5}, opts);
    }();
    return res;
}

}  // namespace

TEST_SUITE("cycles") {

TEST_CASE("floquet multipliers of a generic product") {
    std::vector<Mat3> segs;
    for (int k = 0; k < 6; ++k) {
        Mat3 m;
        m << 1.0 + 0.1 * k, 0.3, -0.2, 0.1, 0.9, 0.4 - 0.05 * k, -0.3, 0.2, 0.7;
        segs.push_back(m);
    }
    Mat3 prod = Mat3::Identity();
    for (const auto& s : segs) prod = s * prod;
    const Eigen::Vector3cd ref = Eigen::EigenSolver<Mat3>(prod).eigenvalues();
    const FloquetSpectrum f = floquet_spectrum(segs, State(1.0, 0.0, 0.0));
    for (int i = 0; i < 3; ++i) {
        double best = 1e300;
        for (const auto& m : f.multipliers) best = std::min(best, std::abs(m - ref[i]));
        CHECK(best < 1e-10 * (1.0 + std::abs(ref[i])));
    }
}

TEST_CASE("floquet multipliers keep relative accuracy across scales") {
    // Product Q D^k Q^T with D = diag(10, 1, 1e-4) over k = 3 segments.
    const Mat3 q0 = rotation(0.3, 1.1), q1 = rotation(-0.7, 0.2), q2 = rotation(2.0, -0.5);
    const Eigen::Vector3d d(10.0, 1.0, 1e-4);
    const Mat3 dm = d.asDiagonal();
    const std::vector<Mat3> segs{q1 * dm * q0.transpose(), q2 * dm * q1.transpose(), q0 * dm * q2.transpose()};
    const FloquetSpectrum f = floquet_spectrum(segs, q0.col(1));
    const auto mod = sorted_moduli(f.multipliers);
    CHECK(mod[0] == doctest::Approx(1e-12).epsilon(1e-8));
    CHECK(mod[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mod[2] == doctest::Approx(1e3).epsilon(1e-12));
    CHECK(std::abs(f.multipliers[f.trivial_index] - 1.0) < 1e-12);
}

TEST_CASE("section crossings lie on the plane") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    const Section s = default_section(p);
    const SectionCrossings c = poincare_crossings(p, State(1.0, 1.0, 1.0), s, 20, {1e-10, 1e-10, 0.1, 100.0});
    CHECK(c.complete);
    REQUIRE(c.points.size() == 20);
    for (const auto& x : c.points) {
        CHECK(std::abs(x.z() - 27.0) < 1e-9);
        CHECK(vector_field(p, x).z() < 0.0);
    }
    CHECK(std::is_sorted(c.times.begin(), c.times.end()));
    const SectionCrossings partial = poincare_crossings(p, State(1.0, 1.0, 1.0), s, 1000, {1e-10, 1e-10, 0.1, 5.0});
    CHECK(!partial.complete);
}

TEST_CASE("thinness of synthetic maps") {
    std::vector<ReturnMapSample> smooth, thick;
    for (int i = 0; i <= 4000; ++i) {
        const double x = i / 4000.0;
        const double y = 4.0 * x * (1.0 - x);
        smooth.push_back({x, y});
        thick.push_back({x, y + (i % 2 ? 0.01 : -0.01)});
    }
    CHECK(return_map_thinness(smooth).relative_spread < 1e-4);
    const ReturnMapThinness t = return_map_thinness(thick);
    CHECK(t.relative_spread == doctest::Approx(0.02).epsilon(0.05));
    CHECK(t.range == doctest::Approx(1.0));
    CHECK(t.occupied_bins == 200);
    CHECK_THROWS_AS(return_map_thinness({}), InsufficientDataError);
}

TEST_CASE("return map at r = 28 has one expanding fixed point") {
    const auto samples = lorenz_return_map({10.0, 8.0 / 3.0, 28.0}, State(1.0, 1.0, 1.0), 1000);
    REQUIRE(samples.size() == 999);
    for (std::size_t i = 1; i < samples.size(); ++i) CHECK(samples[i].z_max_current == samples[i - 1].z_max_next);
    const auto fixed = return_map_fixed_points(samples);
    REQUIRE(fixed.size() == 1);
    CHECK(fixed[0].slope < -1.0);
}

TEST_CASE("symmetry image is an involution") {
    const State s(1.5, -2.0, 7.0);
    CHECK(symmetry_image(symmetry_image(s)) == s);
    CHECK(symmetry_image(s) == State(-1.5, 2.0, 7.0));
}

TEST_CASE("saddle cycles L1 and L2 at r = 24.5") {
    const BatteryResult& res = battery_245();
    const PeriodicOrbit& l1 = pick_orbit(res, "o1");
    CHECK(!l1.symmetric);
    CHECK(l1.signature.k == 1);
    CHECK(l1.signature.m == 0);
    CHECK(count_outside(l1) == 1);
    CHECK(std::abs(l1.trivial_multiplier() - 1.0) < 1e-4);
    CHECK(l1.multiplier_product() == doctest::Approx(std::exp(l1.params.divergence() * l1.period)).epsilon(1e-5));
    const PeriodicOrbit l2 = symmetry_image(l1);
    const bool found = std::any_of(res.orbits.begin(), res.orbits.end(),
                                   [&](const PeriodicOrbit& o) { return same_orbit(o, l2); });
    CHECK(found);
    CHECK(!same_orbit(l1, l2));
    CHECK(res.stats.newton_starts <= 60);
}

TEST_CASE("newton recovers L1 from a perturbed anchor") {
    const PeriodicOrbit& l1 = pick_orbit(battery_245(), "o1");
    const PeriodicOrbit again = find_periodic_orbit(l1.params, l1.anchor + State(0.05, -0.03, 0.0));
    CHECK(same_orbit(again, l1));
    CHECK(again.period == doctest::Approx(l1.period).epsilon(1e-7));
    CHECK(again.closure_error < 1e-6);
}

TEST_CASE("pick_orbit selectors") {
    const BatteryResult& res = battery_245();
    CHECK(&pick_orbit(res, "0") == &res.orbits[0]);
    CHECK_THROWS_AS(pick_orbit(res, "stable"), GeometryError);
    CHECK_THROWS_AS(pick_orbit(res, "wobbly"), ValidationError);
    CHECK_THROWS_AS(pick_orbit(res, "100000"), GeometryError);
}

TEST_CASE("orbits are sorted and distinct") {
    const BatteryResult& res = battery_245();
    for (std::size_t i = 1; i < res.orbits.size(); ++i) {
        CHECK(res.orbits[i - 1].period <= res.orbits[i].period);
        CHECK(!same_orbit(res.orbits[i - 1], res.orbits[i]));
    }
}

TEST_CASE("battery is deterministic for a fixed seed") {
    BatteryOptions opts;
    opts.budget = 20;
    opts.jitter = 1e-3;
    opts.seed = 7;
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    const BatteryResult a = cycle_search_battery(p, opts);
    const BatteryResult b = cycle_search_battery(p, opts);
    REQUIRE(a.orbits.size() == b.orbits.size());
    for (std::size_t i = 0; i < a.orbits.size(); ++i) {
        CHECK(a.orbits[i].period == b.orbits[i].period);
        CHECK(a.orbits[i].anchor == b.orbits[i].anchor);
    }
}

TEST_CASE("stable symmetric cycle at r = 350 and short continuation") {
    BatteryOptions opts;
    opts.budget = 30;
    const BatteryResult res = cycle_search_battery({10.0, 8.0 / 3.0, 350.0}, opts);
    const PeriodicOrbit& c0 = pick_orbit(res, "stable");
    CHECK(c0.symmetric);
    CHECK(c0.stability == OrbitStability::Stable);
    const Branch br = continue_orbit(c0, 345.0, 0.5);
    REQUIRE(br.points.size() >= 11);
    CHECK(br.points.back().orbit.params.r == doctest::Approx(345.0));
    CHECK(br.events.empty());
    for (std::size_t i = 1; i < br.points.size(); ++i)
        CHECK(br.points[i].orbit.params.r < br.points[i - 1].orbit.params.r);
    CHECK_THROWS_AS(continue_orbit(c0, 345.0, 2.0), ValidationError);
}

}
