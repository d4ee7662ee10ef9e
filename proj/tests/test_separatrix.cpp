#include <cmath>

#include <doctest.h>

#include "lorenz/equilibria.hpp"
#include "lorenz/separatrix.hpp"

using namespace lorenz;

TEST_SUITE("separatrix") {

TEST_CASE("launch directions are unit unstable eigenvectors") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    const auto [plus, minus] = unstable_directions(p);
    const double lambda = (-11.0 + std::sqrt(1201.0)) / 2.0;
    const Mat3 j = jacobian(p, State::Zero());
    CHECK((j * plus - lambda * plus).norm() < 1e-10);
    CHECK(plus.norm() == doctest::Approx(1.0));
    CHECK(plus.x() > 0.0);
    CHECK(minus == reflect(plus));
    CHECK_THROWS_AS(unstable_directions({10.0, 8.0 / 3.0, 0.5}), DomainError);
}

TEST_CASE("launch offset bounds") {
    const LorenzParams p{10.0, 8.0 / 3.0, 28.0};
    CHECK_THROWS_AS(launch_separatrix(p, Side::Plus, 1e-2), ValidationError);
    const Trajectory t = launch_separatrix(p, Side::Minus, 1e-6, {1e-10, 1e-10, 0.1, 5.0});
    CHECK(t.tag == "gamma2");
    CHECK(t.samples.front().state.norm() == doctest::Approx(1e-6));
}

TEST_CASE("below the homoclinic value each separatrix settles on its own side") {
    const LorenzParams p{10.0, 8.0 / 3.0, 10.0};
    const SeparatrixFate f1 = classify_separatrix_fate(p, Side::Plus);
    const SeparatrixFate f2 = classify_separatrix_fate(p, Side::Minus);
    CHECK(f1.verdict == FateVerdict::ConvergesToO1);
    CHECK(f2.verdict == FateVerdict::ConvergesToO2);
    CHECK(f1.decision_time < f1.t_max);
    CHECK(f1.decision_time == doctest::Approx(f2.decision_time).epsilon(1e-9));
    CHECK(f1.min_distance_to_origin > kHomoclinicThreshold);
}

TEST_CASE("between the homoclinic and fate values the separatrices cross over") {
    const SeparatrixFate f = classify_separatrix_fate({10.0, 8.0 / 3.0, 20.0}, Side::Plus);
    CHECK(f.verdict == FateVerdict::ConvergesToO2);
}

TEST_CASE("chaotic regime stays undecided") {
    const SeparatrixFate f = classify_separatrix_fate({10.0, 8.0 / 3.0, 28.0}, Side::Plus, {}, 200.0);
    CHECK(f.verdict == FateVerdict::UndecidedWandering);
    CHECK(f.decision_time == 200.0);
    CHECK_THROWS_AS(classify_separatrix_fate({10.0, 8.0 / 3.0, 28.0}, Side::Plus, {}, -1.0), ValidationError);
}

TEST_CASE("homoclinic bisection") {
    const BisectionResult res = find_homoclinic_r({}, {13.0, 15.0}, {}, 1e-3);
    CHECK(res.estimate > 13.85);
    CHECK(res.estimate < 14.0);
    REQUIRE(!res.history.empty());
    const auto [lo, hi] = res.history.back();
    CHECK(hi - lo <= 1e-3);
    CHECK(res.estimate >= lo);
    CHECK(res.estimate <= hi);
    for (std::size_t i = 1; i < res.history.size(); ++i) {
        CHECK(res.history[i].first >= res.history[i - 1].first);
        CHECK(res.history[i].second <= res.history[i - 1].second);
    }
    // Both ends on the same side of the sign change.
    CHECK_THROWS_AS(find_homoclinic_r({}, {20.0, 22.0}), BracketError);
    CHECK_THROWS_AS(find_homoclinic_r({}, {0.5, 15.0}), BracketError);
}

TEST_CASE("fate profile keeps grid order") {
    const auto prof = fate_profile({}, {10.0, 20.0, 12.0}, 200.0);
    REQUIRE(prof.size() == 3);
    CHECK(prof[0].r == 10.0);
    CHECK(prof[1].r == 20.0);
    CHECK(prof[2].r == 12.0);
    CHECK(prof[0].fate.verdict == FateVerdict::ConvergesToO1);
    CHECK(prof[1].fate.verdict == FateVerdict::ConvergesToO2);
}

TEST_CASE("fate transition needs a verdict change") {
    CHECK_THROWS_AS(find_fate_transition_r({}, {15.0, 16.0}, 300.0), BracketError);
}

}
