#include <cmath>

#include <doctest.h>

#include "lorenz/cycles.hpp"
#include "lorenz/equilibria.hpp"

using namespace lorenz;

namespace {

const double kGrid[] = {0.5, 10.0, 20.0, 24.5, 28.0, 350.0};

double self_convergence_order(const LorenzParams& p, const State& y0, double T, int n) {
    const LorenzField f{p};
    auto run = [&](int steps) {
        Vec<3> y = y0;
        for (int i = 0; i < steps; ++i) y = dopri_exact_step<3>(f, y, T / steps);
        return y;
    };
    const Vec<3> ref = run(32 * n);
    return std::log2((run(n) - ref).norm() / (run(2 * n) - ref).norm());
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("liouville determinant identity") {
    for (double r : kGrid) {
        CAPTURE(r);
        const LorenzParams p{10.0, 8.0 / 3.0, r};
        for (double T : {1.0, 5.0, 10.0}) {
            const VariationalResult v = integrate_variational(p, State(1.0, 1.0, 1.0), T);
            const double expected = std::exp(p.divergence() * T);
            CHECK(std::abs(v.determinant() / expected - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("multiplier product identity") {
    for (double r : kGrid) {
        CAPTURE(r);
        const LorenzParams p{10.0, 8.0 / 3.0, r};
        const VariationalResult v = integrate_variational(p, State(1.0, 1.0, 1.0), 3.0);
        const FloquetSpectrum f = floquet_spectrum(v.segments, vector_field(p, v.state));
        const Complex prod = f.multipliers[0] * f.multipliers[1] * f.multipliers[2];
        const double expected = std::exp(p.divergence() * 3.0);
        CHECK(std::abs(prod / expected - 1.0) < 1e-5);

        BatteryOptions opts;
        opts.budget = 20;
        const BatteryResult res = cycle_search_battery(p, opts);
        if (r > 14.0) CHECK(!res.orbits.empty());
        for (const auto& o : res.orbits)
            CHECK(std::abs(o.multiplier_product() / std::exp(p.divergence() * o.period) - 1.0) < 1e-5);
    }
}

TEST_CASE("trajectories are equivariant under the reflection") {
    for (double r : kGrid) {
        CAPTURE(r);
        const LorenzParams p{10.0, 8.0 / 3.0, r};
        const ToleranceSpec tol{1e-10, 1e-10, 0.1, 10.0};
        const State s0(1.0, 3.0, 5.0);
        const Trajectory a = integrate(p, s0, tol);
        const Trajectory b = integrate(p, reflect(s0), tol);
        for (double t = 0.0; t <= 10.0; t += 0.05) CHECK((reflect(a.at(t)) - b.at(t)).norm() < 1e-8);
        const Trajectory img = symmetry_image(a);
        CHECK((img.final_state() - b.final_state()).norm() < 1e-8);
    }
}

TEST_CASE("eigenvalue sum identity") {
    for (double r : kGrid) {
        const LorenzParams p{10.0, 8.0 / 3.0, r};
        for (const auto& e : equilibria(p)) {
            const Complex s = e.eigenvalues[0] + e.eigenvalues[1] + e.eigenvalues[2];
            CHECK(std::abs(s - p.divergence()) < 1e-9);
        }
    }
}

TEST_CASE("integrator self-convergence is fifth order") {
    for (double r : kGrid) {
        CAPTURE(r);
        const LorenzParams p{10.0, 8.0 / 3.0, r};
        // Steps per unit time inside the asymptotic range and above rounding.
        const int n = r < 1.0 ? 64 : (r > 100.0 ? 1024 : 256);
        const double order = self_convergence_order(p, State(1.0, 1.0, 1.0), 1.0, n);
        CHECK(order > 4.5);
        CHECK(order < 5.5);
    }
}

}
