#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lorenz/chaos.hpp"
#include "lorenz/cycles.hpp"
#include "lorenz/equilibria.hpp"
#include "lorenz/report.hpp"
#include "lorenz/separatrix.hpp"

using namespace lorenz;

namespace {

constexpr double kSigma = 10.0;
constexpr double kB = 8.0 / 3.0;
constexpr double kHopf = 470.0 / 19.0;

LorenzParams at(double r) { return {kSigma, kB, r}; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

int count_outside(const PeriodicOrbit& o) {
    int n = 0;
    for (const auto& m : o.nontrivial_multipliers()) n += std::abs(m) > 1.0;
    return n;
}

Outcome hopf() {
    const double r = find_hopf_numeric(kSigma, kB, {20.0, 30.0});
    return {std::abs(r - kHopf) < 1e-6, fmt("r_a = %.10f", r) + fmt(" (closed form %.10f)", kHopf)};
}

Outcome homoclinic() {
    const BisectionResult res = find_homoclinic_r(at(13.0), {13.0, 15.0}, {}, 1e-3);
    const double width = res.history.back().second - res.history.back().first;
    return {res.estimate >= 13.85 && res.estimate <= 14.0 && width <= 1e-3,
            fmt("r1 = %.6f", res.estimate) + fmt(", final width %.2e", width)};
}

Outcome fate_transition() {
    const FateTransitionResult res = find_fate_transition_r(at(23.0), {23.0, 25.0}, 1000.0);
    if (!res.estimate) return {false, "fate profile not monotone, no estimate"};
    return {*res.estimate >= 23.9 && *res.estimate <= 24.3, fmt("r2 = %.6f at t_max = 1000", *res.estimate)};
}

Outcome saddle_cycles() {
    const BatteryResult res = cycle_search_battery(at(24.5));
    const PeriodicOrbit& l1 = pick_orbit(res, "o1");
    const PeriodicOrbit l2_expected = symmetry_image(l1);
    const PeriodicOrbit* l2 = nullptr;
    for (const auto& o : res.orbits)
        if (same_orbit(o, l2_expected)) l2 = &o;
    if (!l2) return {false, "mirror image of L1 not found"};
    const bool one_unstable = count_outside(l1) == 1 && count_outside(*l2) == 1;

    ContinuationOptions co;
    co.amplitude_center = "O1";
    const Branch br = continue_orbit(l1, kHopf - 1e-6, 0.05, {}, co);
    bool monotone = true;
    for (std::size_t i = 1; i < br.points.size(); ++i)
        monotone = monotone && br.points[i].amplitude < br.points[i - 1].amplitude;
    const auto& last = br.points.back();
    const bool reached = std::abs(last.orbit.params.r - (kHopf - 1e-6)) < 1e-9;
    return {one_unstable && monotone && reached && last.amplitude < 1e-2,
            fmt("L1 T = %.6f", l1.period) + fmt(", |mu_u| = %.5f", std::abs(l1.nontrivial_multipliers()[0])) +
                fmt(", amplitude %.3e", last.amplitude) + fmt(" at r = %.8f", last.orbit.params.r) +
                (monotone ? ", monotone" : ", not monotone")};
}

Outcome chaotic_regime() {
    const LyapunovSpectrum s = lyapunov_spectrum(at(28.0), State(1.0, 1.0, 1.0));
    bool ok = s.exponents[0] >= 0.7 && s.exponents[0] <= 1.1 && std::abs(s.sum() + 41.0 / 3.0) < 0.05;
    std::string detail = fmt("lambda1 = %.4f", s.exponents[0]) + fmt(", sum = %.5f", s.sum()) + ", return-map spread";
    const auto all = lorenz_return_map(at(28.0), State(1.0, 1.0, 1.0), 10000);
    for (std::size_t n : {1000, 2000, 5000, 10000}) {
        const std::vector<ReturnMapSample> head(all.begin(), all.begin() + static_cast<long>(n - 1));
        const double spread = return_map_thinness(head).relative_spread;
        ok = ok && spread < 0.01;
        detail += fmt(" %.3f%%", 100.0 * spread) + " (" + std::to_string(n) + ")";
    }
    return {ok, detail};
}

Outcome large_r() {
    const BatteryResult res = cycle_search_battery(at(350.0));
    std::vector<const PeriodicOrbit*> stable;
    for (const auto& o : res.orbits)
        if (o.stability == OrbitStability::Stable) stable.push_back(&o);
    // Count up to symmetry: an orbit and its mirror image are one class.
    int classes = 0;
    for (std::size_t i = 0; i < stable.size(); ++i) {
        const PeriodicOrbit mirror = symmetry_image(*stable[i]);
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || same_orbit(*stable[j], mirror);
        classes += !seen;
    }
    if (classes != 1) return {false, std::to_string(classes) + " stable cycle classes"};
    const PeriodicOrbit& c0 = *stable.front();
    const auto nt = c0.nontrivial_multipliers();
    const bool ok = c0.symmetric && std::abs(nt[0]) < 1.0 && std::abs(nt[1]) < 1.0 &&
                    std::abs(c0.trivial_multiplier() - 1.0) < 1e-4;
    return {ok, fmt("C0 T = %.6f", c0.period) + fmt(", |mu| = %.5f", std::abs(nt[0])) +
                    fmt(", %.3e", std::abs(nt[1])) + fmt(", |mu_trivial - 1| = %.2e", std::abs(c0.trivial_multiplier() - 1.0))};
}

Outcome symmetry_breaking() {
    const BatteryResult res = cycle_search_battery(at(350.0));
    const PeriodicOrbit& c0 = pick_orbit(res, "symmetric");
    std::vector<double> found;
    for (double step : {0.5, 0.25}) {
        const Branch br = continue_orbit(c0, 300.0, step);
        std::optional<double> r;
        for (const auto& e : br.events)
            if (e.kind == BranchEventKind::SymmetryBreaking && !r) r = e.r;
        if (!r) return {false, fmt("no +1 crossing at step %.2f", step)};
        found.push_back(*r);
    }
    const bool ok = std::all_of(found.begin(), found.end(), [](double r) { return r >= 300.0 && r <= 330.0; }) &&
                    std::abs(found[0] - found[1]) <= 5.0;
    return {ok, fmt("+1 crossing at r = %.5f (step 0.5)", found[0]) + fmt(", %.5f (step 0.25)", found[1])};
}

Outcome properties() {
    const double grid[] = {0.5, 10.0, 20.0, 24.5, 28.0, 350.0};
    double liouville = 0.0, product = 0.0, equivariance = 0.0, eigsum = 0.0;
    double order_lo = 1e9, order_hi = -1e9;
    for (double r : grid) {
        const LorenzParams p = at(r);
        const VariationalResult v = integrate_variational(p, State(1.0, 1.0, 1.0), 10.0);
        liouville = std::max(liouville, std::abs(v.determinant() / std::exp(p.divergence() * 10.0) - 1.0));

        BatteryOptions opts;
        opts.budget = 20;
        for (const auto& o : cycle_search_battery(p, opts).orbits)
            product = std::max(product, std::abs(o.multiplier_product() / std::exp(p.divergence() * o.period) - 1.0));
        const VariationalResult w = integrate_variational(p, State(1.0, 1.0, 1.0), 3.0);
        const auto f = floquet_spectrum(w.segments, vector_field(p, w.state)).multipliers;
        product = std::max(product, std::abs(f[0] * f[1] * f[2] / std::exp(p.divergence() * 3.0) - 1.0));

        const ToleranceSpec tol{1e-10, 1e-10, 0.1, 10.0};
        const Trajectory a = integrate(p, State(1.0, 3.0, 5.0), tol);
        const Trajectory b = integrate(p, reflect(State(1.0, 3.0, 5.0)), tol);
        for (double t = 0.0; t <= 10.0; t += 0.05)
            equivariance = std::max(equivariance, (reflect(a.at(t)) - b.at(t)).norm());

        for (const auto& e : equilibria(p))
            eigsum = std::max(eigsum, std::abs(e.eigenvalues[0] + e.eigenvalues[1] + e.eigenvalues[2] - p.divergence()));

        const int n = r < 1.0 ? 64 : (r > 100.0 ? 1024 : 256);
        const LorenzField field{p};
        auto run = [&](int steps) {
            Vec<3> y(1.0, 1.0, 1.0);
            for (int i = 0; i < steps; ++i) y = dopri_exact_step<3>(field, y, 1.0 / steps);
            return y;
        };
        const Vec<3> ref = run(32 * n);
        const double order = std::log2((run(n) - ref).norm() / (run(2 * n) - ref).norm());
        order_lo = std::min(order_lo, order);
        order_hi = std::max(order_hi, order);
    }
    const bool ok = liouville < 1e-6 && product < 1e-5 && equivariance < 1e-8 && eigsum < 1e-9 && order_lo > 4.5 &&
                    order_hi < 5.5;
    return {ok, fmt("liouville %.1e", liouville) + fmt(", product %.1e", product) +
                    fmt(", equivariance %.1e", equivariance) + fmt(", eigenvalue sum %.1e", eigsum) +
                    fmt(", order %.2f", order_lo) + fmt("..%.2f", order_hi)};
}

Outcome scenario() {
    const Report rep = scenario_report();
    const Claim* g = nullptr;
    for (const auto& c : rep.claims)
        if (c.scenario == "G" && c.location == "G-scenario item 3") g = &c;
    if (!g) return {false, "stable-cycle claim missing"};
    const bool has_stats = g->details.contains("per_r") && !g->details["per_r"].empty() &&
                           g->details["per_r"][0].contains("stats");
    return {rep.claims.size() >= 10 && g->error.empty() && has_stats,
            std::to_string(rep.claims.size()) + " claims; stable-cycle claim " + to_string(g->verdict) + ": " +
                g->finding};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Hopf threshold", 5.0, hopf},
        {2, "homoclinic butterfly", 60.0, homoclinic},
        {3, "fate transition", 180.0, fate_transition},
        {4, "saddle cycles", 180.0, saddle_cycles},
        {5, "chaotic regime", 120.0, chaotic_regime},
        {6, "large-r order", 60.0, large_r},
        {7, "symmetry breaking", 300.0, symmetry_breaking},
        {8, "property suite", 600.0, properties},
        {9, "scenario report", 600.0, scenario},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = dt <= c.limit_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s %d %s: %s [%.1f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), dt, c.limit_s, in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
