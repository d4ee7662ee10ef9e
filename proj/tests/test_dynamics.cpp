#include <cmath>

#include <doctest.h>

#include "lorenz/dynamics.hpp"

using namespace lorenz;

namespace {

// Central-difference Jacobian of the field.
Mat3 numeric_jacobian(const LorenzParams& p, const State& s) {
    Mat3 m;
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
        State e = State::Zero();
        e[c] = h;
        m.col(c) = (vector_field(p, s + e) - vector_field(p, s - e)) / (2.0 * h);
    }
    return m;
}

Vec<3> fixed_step(const LorenzParams& p, Vec<3> y, double T, int n) {
    const LorenzField f{p};
    for (int i = 0; i < n; ++i) y = dopri_exact_step<3>(f, y, T / n);
    return y;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("field at a hand-computed point") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    const State f = vector_field(p, State(1.0, 2.0, 3.0));
    CHECK(f.x() == doctest::Approx(10.0));
    CHECK(f.y() == doctest::Approx(23.0));
    CHECK(f.z() == doctest::Approx(-6.0));
}

TEST_CASE("jacobian matches finite differences") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    for (const State s : {State(1.0, 2.0, 3.0), State(-7.5, 4.0, 30.0), State(0.0, 0.0, 0.0)}) {
        const Mat3 diff = jacobian(p, s) - numeric_jacobian(p, s);
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("non-finite input is a domain error") {
    const LorenzParams p;
    CHECK_THROWS_AS(vector_field(p, State(NAN, 0.0, 0.0)), DomainError);
    CHECK_THROWS_AS(jacobian(p, State(0.0, INFINITY, 0.0)), DomainError);
    CHECK_THROWS_AS(integrate(p, State(0.0, 0.0, NAN)), DomainError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((LorenzParams{-1.0, 8.0 / 3.0, 28.0}.validate()), ValidationError);
    CHECK_THROWS_AS((LorenzParams{10.0, 0.0, 28.0}.validate()), ValidationError);
    CHECK_THROWS_AS((LorenzParams{10.0, 8.0 / 3.0, NAN}.validate()), ValidationError);
    ToleranceSpec tol;
    tol.rel = -1.0;
    CHECK_THROWS_AS(tol.validate(), ValidationError);
}

TEST_CASE("decay along the z-axis matches the exact solution") {
    // x = y = 0 is invariant, leaving z' = -b z.
    const LorenzParams p{10.0, 8.0 / 3.0, 0.5};
    const Trajectory t = integrate(p, State(0.0, 0.0, 2.0), {1e-12, 1e-12, 0.1, 3.0});
    CHECK(t.final_state().z() == doctest::Approx(2.0 * std::exp(-8.0)).epsilon(1e-9));
    CHECK(t.final_state().x() == 0.0);
}

TEST_CASE("dense output agrees with the step ends and interior exact steps") {
    const LorenzParams p;
    const Trajectory t = integrate(p, State(1.0, 1.0, 1.0), {1e-10, 1e-10, 0.1, 5.0});
    REQUIRE(t.samples.size() > 10);
    for (std::size_t i = 0; i + 1 < t.samples.size(); i += 7)
        CHECK((t.at(t.samples[i].t) - t.samples[i].state).norm() < 1e-12);
    const auto& step = t.dense[t.dense.size() / 2];
    const double mid = step.t0 + 0.5 * step.h;
    const Vec<3> exact = dopri_exact_step<3>(LorenzField{p}, step.start(), 0.5 * step.h);
    CHECK((step.eval(mid) - exact).norm() < 1e-6 * (1.0 + exact.norm()));
}

TEST_CASE("plane crossings lie on the plane and respect direction") {
    const LorenzParams p;
    const Plane plane = Plane::z_equals(27.0);
    const Trajectory up = integrate_with_events(p, State(1.0, 1.0, 1.0), {1e-10, 1e-10, 0.1, 30.0}, plane,
                                                Direction::Upward);
    REQUIRE(up.events.size() > 5);
    for (const auto& e : up.events) {
        CHECK(std::abs(e.state.z() - 27.0) < 1e-9);
        CHECK(vector_field(p, e.state).z() > 0.0);
    }
    const Trajectory both = integrate_with_events(p, State(1.0, 1.0, 1.0), {1e-10, 1e-10, 0.1, 30.0}, plane);
    const std::size_t n_up = up.events.size();
    CHECK(both.events.size() >= 2 * n_up - 1);
    CHECK(both.events.size() <= 2 * n_up + 1);
}

TEST_CASE("fifth-order self-convergence on a fixed step") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    const Vec<3> y0(1.0, 1.0, 20.0);
    const Vec<3> ref = fixed_step(p, y0, 0.5, 4096);
    const double e1 = (fixed_step(p, y0, 0.5, 64) - ref).norm();
    const double e2 = (fixed_step(p, y0, 0.5, 128) - ref).norm();
    CHECK(std::log2(e1 / e2) == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("tangent map matches finite differences of the flow") {
    const LorenzParams p;
    const State s0(1.0, 2.0, 20.0);
    const ToleranceSpec tol{1e-12, 1e-12, 0.05, 1.0};
    const VariationalResult v = integrate_variational(p, s0, 1.0, tol);
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
        State e = State::Zero();
        e[c] = h;
        const State fd = (integrate(p, s0 + e, tol).final_state() - integrate(p, s0 - e, tol).final_state()) / (2 * h);
        CHECK((fd - v.monodromy.col(c)).norm() < 1e-4 * (1.0 + fd.norm()));
    }
    CHECK((v.state - integrate(p, s0, tol).final_state()).norm() < 1e-8);
}

TEST_CASE("segments are short and their product is the monodromy") {
    const LorenzParams p;
    const VariationalResult v = integrate_variational(p, State(1.0, 1.0, 1.0), 2.0);
    CHECK(v.segments.size() >= 8);
    Mat3 prod = Mat3::Identity();
    for (const auto& s : v.segments) prod = s * prod;
    CHECK((prod - v.monodromy).norm() < 1e-9 * v.monodromy.norm());
}

}
