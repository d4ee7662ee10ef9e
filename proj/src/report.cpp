#include "lorenz/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lorenz/chaos.hpp"
#include "lorenz/cycles.hpp"
#include "lorenz/equilibria.hpp"
#include "lorenz/separatrix.hpp"

namespace lorenz {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Supported: return "supported";
        case Verdict::Contradicted: return "contradicted";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

Verdict verdict_of(bool ok) { return ok ? Verdict::Supported : Verdict::Contradicted; }

class Probes {
public:
    explicit Probes(const ReportOptions& o) : opts_(o) {}

    LorenzParams params(double r) const { return {opts_.sigma, opts_.b, r}; }

    const BatteryResult& battery(double r) const {
        const auto it = batteries_.find(r);
        if (it != batteries_.end()) return it->second;
        BatteryOptions bo;
        bo.budget = opts_.budget;
        bo.seed = opts_.seed;
        bo.jitter = opts_.jitter;
        return batteries_.emplace(r, cycle_search_battery(params(r), bo, opts_.tol)).first->second;
    }

    LyapunovSpectrum lyapunov(double r) const {
        return lyapunov_spectrum(params(r), State(1.0, 1.0, 1.0), opts_.lyap_transient, opts_.lyap_total,
                                 opts_.lyap_renorm, opts_.tol);
    }

    SweepRecord sweep(double r) const {
        SweepSettings s;
        s.transient = opts_.lyap_transient;
        s.total = opts_.lyap_total;
        s.renorm = opts_.lyap_renorm;
        s.tol = opts_.tol;
        return sweep_point(params(r), s);
    }

    const ReportOptions& opts() const { return opts_; }

private:
    ReportOptions opts_;
    mutable std::map<double, BatteryResult> batteries_;
};

Json orbit_summary(const PeriodicOrbit& o) {
    const auto mu = o.nontrivial_multipliers();
    return Json{{"period", o.period},
                {"stability", to_string(o.stability)},
                {"symmetric", o.symmetric},
                {"signature", Json::array({o.signature.k, o.signature.m})},
                {"section_returns", o.section_returns},
                {"mu_abs", Json::array({std::abs(mu[0]), std::abs(mu[1])})}};
}

using ProbeFn = void (*)(const Probes&, Claim&);

struct ProbeSpec {
    const char* scenario;
    const char* claim;
    const char* location;
    ProbeFn run;
};

// --- C scenario ------------------------------------------------------------

void probe_origin_node(const Probes& pr, Claim& c) {
    const auto eq = equilibria(pr.params(0.5));
    const bool ok = eq.size() == 1 && eq[0].type == EquilibriumType::StableNode;
    c.finding = "r=0.5: " + std::to_string(eq.size()) + " equilibrium, origin " + to_string(eq[0].type);
    c.verdict = verdict_of(ok);
    Json list = Json::array();
    for (const auto& e : eq) list.push_back(to_json(e));
    c.details["equilibria"] = list;
}

void probe_new_equilibria(const Probes& pr, Claim& c) {
    Json rows = Json::array();
    bool ok = true;
    std::string text;
    for (double r : {2.0, 10.0, 20.0, 24.0}) {
        const auto eq = equilibria(pr.params(r));
        const bool three = eq.size() == 3;
        const bool o_saddle = eq[0].type == EquilibriumType::SaddleIndex1;
        const bool stable = three && eq[1].stable() && eq[2].stable();
        ok = ok && three && o_saddle && stable;
        rows.push_back(Json{{"r", r},
                            {"count", eq.size()},
                            {"origin", to_string(eq[0].type)},
                            {"o1", three ? to_string(eq[1].type) : "absent"}});
        text += "r=" + fmt(r) + ": " + std::to_string(eq.size()) + " equilibria, O " + to_string(eq[0].type) +
                (three ? ", O1/O2 " + to_string(eq[1].type) : "") + "; ";
    }
    c.finding = text;
    c.verdict = verdict_of(ok);
    c.details["grid"] = rows;
}

void probe_hopf(const Probes& pr, Claim& c) {
    const double closed = hopf_threshold(pr.opts().sigma, pr.opts().b);
    const double numeric = find_hopf_numeric(pr.opts().sigma, pr.opts().b, {20.0, 30.0});
    c.finding = "closed form " + fmt(closed, 10) + ", numeric " + fmt(numeric, 10);
    c.verdict = verdict_of(std::abs(numeric - 24.74) < 0.01 && std::abs(numeric - closed) < 1e-6);
    c.details = Json{{"closed_form", closed}, {"numeric", numeric}, {"stated", 24.74}};
}

void probe_homoclinic(const Probes& pr, Claim& c) {
    const auto res = find_homoclinic_r(pr.params(14.0), {13.0, 15.0}, pr.opts().tol, 1e-4);
    c.finding = "r1 = " + fmt(res.estimate, 8) + " (bracket width 1e-4)";
    c.verdict = verdict_of(std::abs(res.estimate - 13.9) <= 0.05);
    c.details = Json{{"estimate", res.estimate}, {"stated", 13.9}, {"halvings", res.history.size()}};
}

void probe_fate_low(const Probes& pr, Claim& c) {
    const auto f = classify_separatrix_fate(pr.params(10.0), Side::Plus, pr.opts().tol, pr.opts().fate_t_max);
    c.finding = "r=10: gamma1 " + to_string(f.verdict) + " at t=" + fmt(f.decision_time, 4);
    c.verdict = verdict_of(f.verdict == FateVerdict::ConvergesToO1);
    c.details = to_json(f);
}

void probe_fate_mid(const Probes& pr, Claim& c) {
    const auto f = classify_separatrix_fate(pr.params(20.0), Side::Plus, pr.opts().tol, pr.opts().fate_t_max);
    c.finding = "r=20: gamma1 " + to_string(f.verdict) + " at t=" + fmt(f.decision_time, 4);
    c.verdict = verdict_of(f.verdict == FateVerdict::ConvergesToO2);
    c.details = to_json(f);
}

void probe_fate_transition(const Probes& pr, Claim& c) {
    const auto res = find_fate_transition_r(pr.params(24.0), {23.0, 25.0}, pr.opts().fate_t_max, pr.opts().tol);
    c.details = Json{{"t_max", res.t_max}, {"monotone", res.monotone}, {"stated", 24.06}};
    if (!res.estimate) {
        c.finding = "fate profile over [23, 25] is not monotone at t_max=" + fmt(res.t_max);
        c.verdict = Verdict::Inconclusive;
        return;
    }
    c.details["estimate"] = *res.estimate;
    c.finding = "r2 = " + fmt(*res.estimate, 6) + " at t_max=" + fmt(res.t_max) +
                " (gamma1 still wandering above, converging to O2 below)";
    c.verdict = verdict_of(std::abs(*res.estimate - 24.06) <= 0.05);
}

void probe_saddle_cycles(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(24.5);
    const PeriodicOrbit& l1 = pick_orbit(res, "o1");
    const PeriodicOrbit l2 = symmetry_image(l1);
    const bool image_found = std::any_of(res.orbits.begin(), res.orbits.end(),
                                         [&](const PeriodicOrbit& o) { return same_orbit(o, l2); });
    const bool saddle = l1.stability == OrbitStability::Saddle;
    c.finding = "r=24.5: L1 period " + fmt(l1.period, 8) + ", " + to_string(l1.stability) +
                ", mirror image " + (image_found ? "found" : "not found");
    c.verdict = verdict_of(saddle && image_found);
    c.details = Json{{"l1", orbit_summary(l1)}, {"l2_found", image_found}, {"stats", to_json(res.stats)}};
}

void probe_hopf_shrink(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(24.5);
    const PeriodicOrbit& l1 = pick_orbit(res, "o1");
    const double ra = hopf_threshold(pr.opts().sigma, pr.opts().b);
    ContinuationOptions co;
    co.amplitude_center = "O1";
    const Branch br = continue_orbit(l1, ra - 1e-6, 0.05, pr.opts().tol, co);
    bool monotone = true;
    for (std::size_t i = 1; i < br.points.size(); ++i)
        monotone = monotone && br.points[i].amplitude < br.points[i - 1].amplitude;
    const auto& last = br.points.back();
    const bool reached = std::abs(last.orbit.params.r - (ra - 1e-6)) < 1e-9;
    c.finding = "L1 amplitude " + fmt(br.points.front().amplitude, 4) + " at r=24.5 -> " +
                fmt(last.amplitude, 4) + " at r=" + fmt(last.orbit.params.r, 10) +
                (monotone ? ", decreasing monotonically" : ", not monotone");
    c.verdict = verdict_of(reached && monotone && last.amplitude < 1e-2);
    Json pts = Json::array();
    for (const auto& p : br.points) pts.push_back(Json::array({p.orbit.params.r, p.amplitude}));
    c.details = Json{{"amplitude_by_r", pts}, {"r_a", ra}};
}

void probe_chaos_28(const Probes& pr, Claim& c) {
    const auto s = pr.lyapunov(28.0);
    c.finding = "r=28: exponents " + fmt(s.exponents[0], 4) + ", " + fmt(s.exponents[1], 4) + ", " +
                fmt(s.exponents[2], 4) + " (sum " + fmt(s.sum(), 6) + ")";
    c.verdict = verdict_of(s.exponents[0] > kChaosThreshold);
    c.details = to_json(s);
    c.details["criterion"] = "leading Lyapunov exponent above 0.01 (this toolkit's operational choice)";
}

void probe_modes_alternate(const Probes& pr, Claim& c) {
    Json rows = Json::array();
    int periodic = 0, chaotic = 0;
    for (double r : {40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0, 250.0}) {
        const SweepRecord rec = pr.sweep(r);
        if (rec.verdict == SweepVerdict::Periodic) ++periodic;
        if (rec.verdict == SweepVerdict::Chaotic) ++chaotic;
        rows.push_back(Json{{"r", r}, {"lam1", rec.leading_exponent}, {"verdict", to_string(rec.verdict)},
                            {"n_clusters", rec.n_clusters}});
    }
    c.finding = std::to_string(periodic) + " periodic and " + std::to_string(chaotic) +
                " chaotic verdicts on a 10-point grid in [40, 250]";
    c.verdict = verdict_of(periodic > 0 && chaotic > 0);
    c.details["grid"] = rows;
}

void probe_unique_cycle(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(350.0);
    std::vector<const PeriodicOrbit*> stable;
    for (const auto& o : res.orbits)
        if (o.stability == OrbitStability::Stable) stable.push_back(&o);
    // Count up to symmetry: an orbit and its mirror image are one.
    int classes = 0;
    for (std::size_t i = 0; i < stable.size(); ++i) {
        const PeriodicOrbit img = symmetry_image(*stable[i]);
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || same_orbit(*stable[j], img);
        if (!seen) ++classes;
    }
    const bool symmetric = stable.size() == 1 && stable[0]->symmetric;
    c.finding = "r=350: " + std::to_string(res.orbits.size()) + " orbits found, " +
                std::to_string(stable.size()) + " stable (" + std::to_string(classes) +
                " up to symmetry)" + (symmetric ? ", symmetric" : "");
    c.verdict = verdict_of(classes == 1 && symmetric);
    Json list = Json::array();
    for (const auto& o : res.orbits) list.push_back(orbit_summary(o));
    c.details = Json{{"orbits", list}, {"stats", to_json(res.stats)}};
}

void probe_fractal(const Probes&, Claim& c) {
    c.finding = "not evaluated: fractal-dimension estimation is outside this toolkit's scope";
    c.verdict = Verdict::Inconclusive;
}

void probe_lyapunov_grid(const Probes& pr, Claim& c) {
    const std::vector<std::pair<double, SweepVerdict>> expect = {
        {0.5, SweepVerdict::FixedPoint}, {10.0, SweepVerdict::FixedPoint}, {28.0, SweepVerdict::Chaotic},
        {350.0, SweepVerdict::Periodic}};
    Json rows = Json::array();
    bool ok = true;
    std::string text;
    for (const auto& [r, v] : expect) {
        const SweepRecord rec = pr.sweep(r);
        ok = ok && rec.verdict == v;
        rows.push_back(Json{{"r", r}, {"exponents", Json::array({rec.exponents[0], rec.exponents[1], rec.exponents[2]})},
                            {"verdict", to_string(rec.verdict)}, {"expected", to_string(v)}});
        text += "r=" + fmt(r) + " " + to_string(rec.verdict) + " (lam1 " + fmt(rec.leading_exponent, 3) + "); ";
    }
    c.finding = text;
    c.verdict = verdict_of(ok);
    c.details["grid"] = rows;
}

// --- MS scenario -----------------------------------------------------------

void probe_symmetry_breaking(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(350.0);
    const PeriodicOrbit& c0 = pick_orbit(res, "symmetric");
    const Branch br = continue_orbit(c0, 300.0, 0.5, pr.opts().tol);
    std::optional<double> at;
    for (const auto& e : br.events)
        if (e.kind == BranchEventKind::SymmetryBreaking && !at) at = e.r;
    const BatteryResult& below = pr.battery(300.0);
    int stable_asym = 0;
    for (const auto& o : below.orbits)
        if (!o.symmetric && o.stability == OrbitStability::Stable) ++stable_asym;
    c.details = Json{{"stable_asymmetric_at_300", stable_asym}};
    if (!at) {
        c.finding = "no +1 multiplier crossing on C0 between r=350 and r=300";
        c.verdict = Verdict::Contradicted;
        return;
    }
    c.details["r"] = *at;
    c.finding = "C0 loses stability through a +1 multiplier at r=" + fmt(*at, 8) + "; " +
                std::to_string(stable_asym) + " stable asymmetric cycles at r=300";
    c.verdict = verdict_of(std::abs(*at - 313.0) <= 2.0 && stable_asym == 2);
}

void probe_return_map(const Probes& pr, Claim& c) {
    const auto all = lorenz_return_map(pr.params(28.0), State(1.0, 1.0, 1.0), 10000, 100);
    int thin = 0, counted = 0;
    Json rows = Json::array();
    c.finding = "r=28, worst detrended bin spread as % of range:";
    for (std::size_t n : {1000, 2000, 5000, 10000}) {
        const std::vector<ReturnMapSample> head(all.begin(), all.begin() + static_cast<long>(n - 1));
        const auto t = return_map_thinness(head, 200);
        ++counted;
        thin += t.relative_spread < 0.01;
        c.finding += " " + fmt(100.0 * t.relative_spread, 3) + " (" + std::to_string(n) + " maxima)";
        rows.push_back(Json{{"maxima", n}, {"range", t.range}, {"max_bin_spread", t.max_bin_spread},
                            {"relative_spread", t.relative_spread}, {"occupied_bins", t.occupied_bins}});
    }
    // Sample sizes that disagree leave the claim open.
    c.verdict = thin == counted ? Verdict::Supported : (thin == 0 ? Verdict::Contradicted : Verdict::Inconclusive);
    c.details = Json{{"by_sample_size", rows},
                     {"map", "successive z maxima stand in for the map on the unstable manifold"}};
}

void probe_return_map_unstable(const Probes& pr, Claim& c) {
    const auto samples = lorenz_return_map(pr.params(28.0), State(1.0, 1.0, 1.0), 5000, 100);
    const auto fixed = return_map_fixed_points(samples, 200);
    if (fixed.empty()) {
        c.finding = "the binned map never meets the diagonal";
        c.verdict = Verdict::Inconclusive;
        return;
    }
    bool all_unstable = true;
    Json list = Json::array();
    std::string text = "fixed points of the z-maxima map:";
    for (const auto& f : fixed) {
        all_unstable = all_unstable && std::abs(f.slope) > 1.0;
        list.push_back(Json{{"z", f.z}, {"slope", f.slope}});
        text += " z=" + fmt(f.z, 6) + " slope " + fmt(f.slope, 4) + ";";
    }
    c.finding = text;
    c.verdict = verdict_of(all_unstable);
    c.details["fixed_points"] = list;
}

void probe_r4(const Probes& pr, Claim& c) {
    // Closest approach of gamma1 to O2 on its first pass, minimized over r.
    auto first_pass = [&](double r) {
        const LorenzParams p = pr.params(r);
        const Trajectory t = launch_separatrix(p, Side::Plus, kDefaultLaunchOffset, pr.opts().tol.with_t_max(4.0));
        const State o2 = equilibria(p)[2].location;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& d : t.dense)
            for (int k = 0; k < 16; ++k) best = std::min(best, (d.eval(d.t0 + d.h * k / 16.0) - o2).norm());
        return best;
    };
    double lo = 29.0, hi = 32.0;
    double best_r = lo, best_d = std::numeric_limits<double>::infinity();
    Json scan = Json::array();
    for (double r = lo; r <= hi + 1e-9; r += 0.1) {
        const double d = first_pass(r);
        scan.push_back(Json::array({r, d}));
        if (d < best_d) {
            best_d = d;
            best_r = r;
        }
    }
    // Golden-section refinement inside the best cell.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_r - 0.1, b = best_r + 0.1;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = first_pass(x1), f2 = first_pass(x2);
    while (b - a > 1e-4) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = first_pass(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = first_pass(x2);
        }
    }
    best_r = 0.5 * (a + b);
    best_d = first_pass(best_r);
    c.finding = "gamma1 passes closest to O2 at r=" + fmt(best_r, 6) + " (distance " + fmt(best_d, 4) +
                "); stated value 30.485";
    const double off = std::abs(best_r - 30.485);
    c.verdict = off <= 0.1 ? Verdict::Supported : off > 0.25 ? Verdict::Contradicted : Verdict::Inconclusive;
    c.details = Json{{"r_min", best_r}, {"distance", best_d}, {"scan", scan},
                     {"observable", "minimum over the first 4 time units of |gamma1(t) - O2|"}};
}

void probe_period_doubling(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(300.0);
    const PeriodicOrbit& start = pick_orbit(res, "asymmetric");
    const Branch br = continue_orbit(start, 220.0, 0.5, pr.opts().tol);
    std::optional<double> at;
    for (const auto& e : br.events)
        if (e.kind == BranchEventKind::PeriodDoubling && !at) at = e.r;
    if (!at) {
        c.finding = "no -1 multiplier crossing on the asymmetric branch between r=300 and r=220";
        c.verdict = Verdict::Contradicted;
        return;
    }
    c.finding = "asymmetric cycle from r=300 period-doubles at r=" + fmt(*at, 8);
    c.verdict = Verdict::Supported;
    Json ev = Json::array();
    for (const auto& e : br.events) ev.push_back(to_json(e));
    c.details = Json{{"r", *at}, {"events", ev}};
}

void probe_unstable_cycles_28(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(28.0);
    int unstable = 0;
    std::vector<RotationSignature> sigs;
    for (const auto& o : res.orbits) {
        if (o.stability != OrbitStability::Stable) ++unstable;
        if (std::find(sigs.begin(), sigs.end(), o.signature) == sigs.end()) sigs.push_back(o.signature);
    }
    c.finding = "r=28: " + std::to_string(res.orbits.size()) + " periodic orbits, " + std::to_string(unstable) +
                " unstable, " + std::to_string(sigs.size()) + " distinct rotation signatures";
    c.verdict = verdict_of(res.orbits.size() >= 3 && unstable == static_cast<int>(res.orbits.size()) &&
                           sigs.size() >= 3);
    Json list = Json::array();
    for (const auto& o : res.orbits) list.push_back(orbit_summary(o));
    c.details = Json{{"orbits", list}, {"stats", to_json(res.stats)}};
}

// --- G scenario ------------------------------------------------------------

void probe_g_stable_cycles(const Probes& pr, Claim& c) {
    Json per_r = Json::array();
    int total_stable = 0, total_orbits = 0, starts = 0;
    for (double r : {15.0, 18.0, 20.0, 22.0, 24.0}) {
        const BatteryResult& res = pr.battery(r);
        int stable = 0;
        Json periods = Json::array();
        for (const auto& o : res.orbits) {
            if (o.stability == OrbitStability::Stable) {
                ++stable;
                periods.push_back(o.section_returns);
            }
        }
        total_stable += stable;
        total_orbits += static_cast<int>(res.orbits.size());
        starts += res.stats.newton_starts;
        per_r.push_back(Json{{"r", r}, {"orbits", res.orbits.size()}, {"stable", stable},
                             {"stable_section_periods", periods}, {"stats", to_json(res.stats)}});
    }
    c.finding = std::to_string(total_orbits) + " periodic orbits from " + std::to_string(starts) +
                " Newton starts at r in {15, 18, 20, 22, 24}; " + std::to_string(total_stable) + " stable";
    // A finite search cannot rule stable cycles out.
    c.verdict = total_stable > 0 ? Verdict::Supported : Verdict::Inconclusive;
    c.details["per_r"] = per_r;
}

void probe_g_saddle_foci(const Probes& pr, Claim& c) {
    const auto eq = equilibria(pr.params(28.0));
    c.finding = "r=28: O1 and O2 are " + to_string(eq[1].type);
    c.verdict = verdict_of(eq[1].type == EquilibriumType::UnstableSaddleFocus &&
                           eq[2].type == EquilibriumType::UnstableSaddleFocus);
    c.details["o1"] = to_json(eq[1]);
}

void probe_g_two_cycles(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(350.0);
    int stable_asym = 0, stable_sym = 0;
    for (const auto& o : res.orbits) {
        if (o.stability != OrbitStability::Stable) continue;
        (o.symmetric ? stable_sym : stable_asym)++;
    }
    c.finding = "r=350: " + std::to_string(stable_sym) + " stable symmetric and " + std::to_string(stable_asym) +
                " stable asymmetric cycles";
    c.verdict = stable_asym == 2 ? Verdict::Supported
                : (stable_sym == 1 && stable_asym == 0) ? Verdict::Contradicted
                                                         : Verdict::Inconclusive;
    c.details["stats"] = to_json(res.stats);
}

void probe_g_attractor_cycles(const Probes& pr, Claim& c) {
    const BatteryResult& res = pr.battery(28.0);
    int stable = 0;
    for (const auto& o : res.orbits)
        if (o.stability == OrbitStability::Stable) ++stable;
    const auto s = pr.lyapunov(28.0);
    c.finding = "r=28: " + std::to_string(stable) + " stable cycles among " + std::to_string(res.orbits.size()) +
                " found; typical orbit has leading exponent " + fmt(s.exponents[0], 4);
    if (stable > 0)
        c.verdict = Verdict::Supported;
    else
        c.verdict = s.exponents[0] > kChaosThreshold ? Verdict::Contradicted : Verdict::Inconclusive;
    c.details = Json{{"stats", to_json(res.stats)}, {"lyapunov", to_json(s)}};
}

const std::vector<ProbeSpec>& probe_table() {
    static const std::vector<ProbeSpec> table = {
        {"C", "for r < 1 the origin is the only equilibrium and a stable node", "C-scenario item 1", probe_origin_node},
        {"C", "for r > 1 two more equilibria O1, O2 appear, stable up to r_a; the origin is a saddle",
         "C-scenario item 1", probe_new_equilibria},
        {"C", "r_a = 24.74", "C-scenario item 1", probe_hopf},
        {"C", "r1 = 13.9 (homoclinic butterfly)", "C-scenario item 1", probe_homoclinic},
        {"C", "for 1 < r < r1 each separatrix is attracted by its nearest stable point", "C-scenario item 1",
         probe_fate_low},
        {"C", "for r1 < r < r2 gamma1 tends to O2", "C-scenario item 3", probe_fate_mid},
        {"C", "r2 = 24.06 (separatrices stop converging)", "C-scenario item 3", probe_fate_transition},
        {"C", "saddle cycles L1 and L2 exist for r1 < r < r_a", "C-scenario item 3", probe_saddle_cycles},
        {"C", "L1, L2 shrink onto O1, O2 as r -> r_a (subcritical Hopf)", "C-scenario item 4", probe_hopf_shrink},
        {"C", "motion on the attractor for r_a < r < r4 is chaotic", "C-scenario item 5", probe_chaos_28},
        {"C", "the attractor has a fractal structure", "C-scenario item 5", probe_fractal},
        {"C", "for r4 < r < 313 chaotic and periodic modes alternate", "C-scenario item 5", probe_modes_alternate},
        {"C", "for r > 313 a unique stable limit cycle is the attractor", "C-scenario item 6", probe_unique_cycle},
        {"C", "fixed point, chaos and cycle on the canonical grid", "C-scenario items 1, 5, 6", probe_lyapunov_grid},
        {"MS", "at r = 313 C0 becomes unstable and generates two stable cycles", "MS-scenario item 5",
         probe_symmetry_breaking},
        {"MS", "the dynamics reduces to a one-dimensional first-return map", "MS-scenario item 3", probe_return_map},
        {"MS", "the return map's cycles are unstable at r = 28", "MS-scenario item 3", probe_return_map_unstable},
        {"MS", "the attractor is made of many unstable cycles with various rotation counts", "MS-scenario item 3",
         probe_unstable_cycles_28},
        {"MS", "r4 = 30.485: separatrices pass closest to O1, O2", "MS-scenario item 5", probe_r4},
        {"MS", "stable cycles below 313 undergo a subharmonic (period-doubling) cascade", "MS-scenario item 5",
         probe_period_doubling},
        {"G", "stable cycles of periods 1, 3, 4, 6, 7 exist for r_l < r < r_a", "G-scenario item 3",
         probe_g_stable_cycles},
        {"G", "for r > r_a O1, O2 are unstable saddle-foci", "G-scenario item 4", probe_g_saddle_foci},
        {"G", "the attractor for r > r_a consists of stable limit cycles", "G-scenario item 5",
         probe_g_attractor_cycles},
        {"G", "for r >= 313 there are two stable cycles in the two half-spaces", "G-scenario item 6",
         probe_g_two_cycles},
    };
    return table;
}

}  // namespace

Report scenario_report(const ReportOptions& opts) {
    LorenzParams{opts.sigma, opts.b, 28.0}.validate();
    opts.tol.validate();
    const Probes probes(opts);
    Report report;
    for (const auto& spec : probe_table()) {
        Claim c;
        c.scenario = spec.scenario;
        c.claim = spec.claim;
        c.location = spec.location;
        try {
            spec.run(probes, c);
        } catch (const std::exception& e) {
            c.verdict = Verdict::Inconclusive;
            c.error = e.what();
            if (c.finding.empty()) c.finding = "probe failed";
        }
        if (opts.progress) opts.progress(c);
        report.claims.push_back(std::move(c));
    }
    report.notes = {
        "Return-map claims use the map between successive maxima of z(t) in place of the map on the "
        "unstable manifold.",
        "Chaos is judged by the leading Lyapunov exponent exceeding 0.01; this criterion is the toolkit's "
        "choice.",
        "r2 is located operationally as the r where gamma1 stops converging to an equilibrium within t_max.",
        "A cycle search that finds no stable orbit leaves a stable-cycle claim inconclusive, not contradicted.",
    };
    return report;
}

Json to_json(const Claim& c) {
    Json j{{"scenario", c.scenario},
           {"claim", c.claim},
           {"location", c.location},
           {"numeric_finding", c.finding},
           {"verdict", to_string(c.verdict)}};
    if (!c.error.empty()) j["error"] = c.error;
    if (!c.details.empty()) j["details"] = c.details;
    return j;
}

Json to_json(const Report& r) {
    Json claims = Json::array();
    for (const auto& c : r.claims) claims.push_back(to_json(c));
    Json counts{{"supported", 0}, {"contradicted", 0}, {"inconclusive", 0}};
    for (const auto& c : r.claims) counts[to_string(c.verdict)] = counts[to_string(c.verdict)].get<int>() + 1;
    return Json{{"claims", claims}, {"verdict_counts", counts}, {"notes", r.notes}};
}

}  // namespace lorenz
