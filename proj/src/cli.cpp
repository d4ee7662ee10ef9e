#include "lorenz/cli.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorenz/chaos.hpp"
#include "lorenz/config.hpp"
#include "lorenz/cycles.hpp"
#include "lorenz/equilibria.hpp"
#include "lorenz/io.hpp"
#include "lorenz/report.hpp"
#include "lorenz/separatrix.hpp"

namespace fs = std::filesystem;

namespace lorenz::cli {

namespace {

struct Globals {
    double sigma = 10.0;
    double b = 8.0 / 3.0;
    std::string config;
    std::string out;
    double tol_rel = 0.0;
    double tol_abs = 0.0;
    double tmax = 0.0;
    std::uint64_t seed = 0;
};

constexpr int kUnset = std::numeric_limits<int>::min();

// Options of every subcommand. Unused fields keep their defaults.
struct Args {
    double r = 28.0;
    std::string side = "both";
    double offset = kDefaultLaunchOffset;
    std::string bracket;
    double width = 0.0;
    int checks = 11;
    std::string seed_mode = "all";
    std::vector<double> point;
    int budget = kUnset;
    double jitter = NAN;
    double r_from = 0.0;
    double r_to = 0.0;
    double step = 0.0;
    double min_step = 1e-4;
    std::string pick = "stable";
    std::string center;
    int n = 2000;
    int discard = 100;
    int bins = 200;
    double transient = NAN;
    double total = NAN;
    double renorm = NAN;
    double fate_tmax = kDefaultFateHorizon;
};

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    const fs::path& dir() const { return dir_; }
    fs::path path(const std::string& name) const { return dir_ / name; }

    void csv(const std::string& name, std::size_t rows) {
        files_.push_back(Json{{"path", name}, {"rows", rows}});
    }
    void json(const std::string& name, const Json& j) {
        write_json(path(name), j);
        files_.push_back(Json{{"path", name}, {"rows", nullptr}});
    }
    void text(const std::string& name, const std::string& body) {
        std::ofstream f(path(name), std::ios::binary);
        f << body;
        if (!f) throw Error("cannot write " + path(name).string());
        files_.push_back(Json{{"path", name}, {"rows", nullptr}});
    }
    const Json& files() const { return files_; }

private:
    fs::path dir_;
    Json files_ = Json::array();
};

std::pair<double, double> parse_bracket(const std::string& text, std::pair<double, double> fallback) {
    if (text.empty()) return fallback;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ValidationError("bracket must be 'a,b', got '" + text + "'");
    RunConfig scratch;
    try {
        set_config_value(scratch, "sigma", text.substr(0, comma));
        const double a = scratch.sigma;
        set_config_value(scratch, "sigma", text.substr(comma + 1));
        return {a, scratch.sigma};
    } catch (const ValidationError&) {
        throw ValidationError("bracket must be 'a,b', got '" + text + "'");
    }
}

std::vector<SeedMode> parse_modes(const std::string& mode) {
    if (mode == "all") return BatteryOptions{}.modes;
    if (mode == "close-return") return {SeedMode::CloseReturn};
    if (mode == "separatrix") return {SeedMode::Separatrix};
    if (mode == "basin-boundary") return {SeedMode::BasinBoundary};
    if (mode == "point") return {SeedMode::Point};
    throw ValidationError("unknown seed mode '" + mode + "'");
}

std::optional<State> parse_point(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    if (v.size() != 3) throw ValidationError("--point takes three values x y z");
    return State(v[0], v[1], v[2]);
}

BatteryOptions battery_options(const RunConfig& cfg, const Args& a) {
    BatteryOptions o;
    o.modes = parse_modes(a.seed_mode);
    o.point = parse_point(a.point);
    if (a.seed_mode == "point" && !o.point) throw ValidationError("seed mode 'point' needs --point x y z");
    o.budget = cfg.budget;
    o.seed = cfg.seed;
    o.jitter = cfg.jitter;
    return o;
}

Json run_equilibria(const RunConfig& cfg, const Args& a, Outputs& o) {
    const LorenzParams p = cfg.params(a.r);
    p.validate();
    Json list = Json::array();
    for (const auto& e : equilibria(p)) list.push_back(to_json(e));
    Json j{{"params", to_json(p)}, {"hopf_threshold", nullptr}, {"equilibria", list}};
    if (p.sigma > p.b + 1.0) j["hopf_threshold"] = hopf_threshold(p.sigma, p.b);
    o.json("equilibria.json", j);
    return j;
}

Json run_separatrix(const RunConfig& cfg, const Args& a, Outputs& o) {
    const LorenzParams p = cfg.params(a.r);
    p.validate();
    const double horizon = cfg.t_max.value_or(kDefaultFateHorizon);
    const ToleranceSpec tol = cfg.tolerance(horizon);
    std::vector<Side> sides;
    if (a.side == "+" || a.side == "plus" || a.side == "both") sides.push_back(Side::Plus);
    if (a.side == "-" || a.side == "minus" || a.side == "both") sides.push_back(Side::Minus);
    if (sides.empty()) throw ValidationError("side must be +, - or both");
    if (!(p.r > 1.0)) throw DomainError("separatrices of the origin need r > 1");

    const auto [plus, minus] = unstable_directions(p);
    Json fates = Json::object();
    for (Side s : sides) {
        const State start = (s == Side::Plus ? plus : minus) * a.offset;
        Trajectory t = integrate_with_events(p, start, tol, Plane::z_equals(p.r - 1.0));
        t.tag = s == Side::Plus ? "gamma1" : "gamma2";
        o.csv(t.tag + ".csv", write_trajectory_csv(o.path(t.tag + ".csv"), t));
        o.csv(t.tag + "_events.csv", write_events_csv(o.path(t.tag + "_events.csv"), t));
        fates[t.tag] = to_json(classify_separatrix_fate(p, s, tol, horizon, a.offset));
    }
    Json j{{"params", to_json(p)}, {"t_max", horizon}, {"offset", a.offset}, {"fates", fates}};
    o.json("separatrix.json", j);
    return j;
}

Json history_json(const std::vector<std::pair<double, double>>& h) {
    Json out = Json::array();
    for (const auto& [lo, hi] : h) out.push_back(Json::array({lo, hi}));
    return out;
}

Json run_homoclinic(const RunConfig& cfg, const Args& a, Outputs& o) {
    const auto bracket = parse_bracket(a.bracket, {13.0, 15.0});
    const double width = a.width > 0.0 ? a.width : 1e-4;
    const BisectionResult res = find_homoclinic_r(cfg.params(bracket.first), bracket, cfg.tolerance(100.0), width);
    Json j{{"estimate", res.estimate},
           {"bracket", Json::array({bracket.first, bracket.second})},
           {"width", width},
           {"history", history_json(res.history)}};
    o.json("homoclinic.json", j);
    return j;
}

Json run_fate_transition(const RunConfig& cfg, const Args& a, Outputs& o) {
    const auto bracket = parse_bracket(a.bracket, {23.0, 25.0});
    const double width = a.width > 0.0 ? a.width : 1e-3;
    const double horizon = cfg.t_max.value_or(kDefaultFateHorizon);
    const FateTransitionResult res = find_fate_transition_r(
        cfg.params(bracket.first), bracket, horizon, cfg.tolerance(horizon), width, a.checks);
    o.csv("fate_profile.csv", write_fate_profile_csv(o.path("fate_profile.csv"), res.profile));
    Json j{{"estimate", res.estimate ? Json(*res.estimate) : Json(nullptr)},
           {"bracket", Json::array({bracket.first, bracket.second})},
           {"t_max", horizon},
           {"width", width},
           {"monotone", res.monotone},
           {"last_interval", Json::array({res.last_interval.first, res.last_interval.second})},
           {"history", history_json(res.history)}};
    o.json("fate_transition.json", j);
    return j;
}

Json run_cycle(const RunConfig& cfg, const Args& a, Outputs& o) {
    const LorenzParams p = cfg.params(a.r);
    p.validate();
    const ToleranceSpec tol = cfg.tolerance(100.0);
    const BatteryResult res = cycle_search_battery(p, battery_options(cfg, a), tol);
    Json orbits = Json::array();
    for (std::size_t i = 0; i < res.orbits.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "orbit_%03zu.csv", i);
        o.csv(name, write_trajectory_csv(o.path(name), orbit_trajectory(res.orbits[i], tol)));
        Json oj = to_json(res.orbits[i]);
        oj["trajectory"] = name;
        orbits.push_back(oj);
    }
    Json j{{"params", to_json(p)}, {"seed_mode", a.seed_mode}, {"stats", to_json(res.stats)}, {"orbits", orbits}};
    o.json("cycles.json", j);
    return j;
}

Json run_continue(const RunConfig& cfg, const Args& a, Outputs& o) {
    if (!(a.step > 0.0)) throw ValidationError("--step must be positive");
    if (a.r_from == a.r_to) throw ValidationError("--r-from and --r-to must differ");
    const LorenzParams p = cfg.params(a.r_from);
    p.validate();
    const ToleranceSpec tol = cfg.tolerance(100.0);
    const BatteryResult found = cycle_search_battery(p, battery_options(cfg, a), tol);
    const PeriodicOrbit& start = pick_orbit(found, a.pick);
    ContinuationOptions copts;
    copts.min_step = a.min_step;
    if (!a.center.empty()) copts.amplitude_center = a.center;
    const Branch branch = continue_orbit(start, a.r_to, a.step, tol, copts);
    o.csv("branch.csv", write_branch_csv(o.path("branch.csv"), branch));
    Json events = Json::array();
    for (const auto& e : branch.events) events.push_back(to_json(e));
    Json j{{"params", to_json(p)},
           {"r_to", a.r_to},
           {"step", a.step},
           {"pick", a.pick},
           {"start", to_json(start)},
           {"points", branch.points.size()},
           {"events", events}};
    o.json("branch.json", j);
    return j;
}

Json run_return_map(const RunConfig& cfg, const Args& a, Outputs& o) {
    const LorenzParams p = cfg.params(a.r);
    p.validate();
    const State s0 = parse_point(a.point).value_or(State(1.0, 1.0, 1.0));
    const auto samples = lorenz_return_map(p, s0, a.n, a.discard, cfg.tolerance(1e5));
    o.csv("return_map.csv", write_return_map_csv(o.path("return_map.csv"), samples));
    const ReturnMapThinness th = return_map_thinness(samples, a.bins);
    Json fixed = Json::array();
    for (const auto& c : return_map_fixed_points(samples, a.bins))
        fixed.push_back(Json{{"z", c.z}, {"slope", c.slope}});
    Json j{{"params", to_json(p)},
           {"pairs", samples.size()},
           {"thinness",
            {{"range", th.range},
             {"max_bin_spread", th.max_bin_spread},
             {"relative_spread", th.relative_spread},
             {"bins", th.bins},
             {"occupied_bins", th.occupied_bins}}},
           {"fixed_points", fixed}};
    o.json("return_map.json", j);
    return j;
}

Json run_lyapunov(const RunConfig& cfg, const Args& a, Outputs& o) {
    const LorenzParams p = cfg.params(a.r);
    p.validate();
    const State s0 = parse_point(a.point).value_or(State(1.0, 1.0, 1.0));
    const LyapunovSpectrum s =
        lyapunov_spectrum(p, s0, cfg.lyap_transient, cfg.lyap_total, cfg.lyap_renorm, cfg.tolerance(100.0));
    Json j = to_json(s);
    j["params"] = to_json(p);
    j["divergence"] = p.divergence();
    o.json("lyapunov.json", j);
    return j;
}

Json run_sweep(const RunConfig& cfg, const Args& a, Outputs& o) {
    const auto grid = make_grid(a.r_from, a.r_to, a.step);
    SweepSettings s;
    s.s0 = parse_point(a.point).value_or(s.s0);
    s.transient = cfg.lyap_transient;
    s.total = cfg.lyap_total;
    s.renorm = cfg.lyap_renorm;
    s.tol = cfg.tolerance(100.0);
    const auto records = sweep(cfg.params(a.r_from), grid, s);
    o.csv("sweep.csv", write_sweep_csv(o.path("sweep.csv"), records));
    o.csv("sweep_maxima.csv", write_sweep_maxima_csv(o.path("sweep_maxima.csv"), records));
    std::map<std::string, int> counts;
    int failed = 0;
    for (const auto& rec : records) {
        ++counts[to_string(rec.verdict)];
        if (!rec.error.empty()) ++failed;
    }
    Json j{{"points", records.size()}, {"failed", failed}, {"verdict_counts", counts}};
    return j;
}

Json run_report(const RunConfig& cfg, const Args& a, Outputs& o, const std::string& file, std::ostream& log) {
    ReportOptions opts;
    opts.sigma = cfg.sigma;
    opts.b = cfg.b;
    opts.tol = cfg.tolerance(100.0);
    opts.budget = cfg.report_budget;
    opts.fate_t_max = cfg.t_max.value_or(a.fate_tmax);
    opts.lyap_transient = cfg.lyap_transient;
    opts.lyap_total = cfg.lyap_total;
    opts.lyap_renorm = cfg.lyap_renorm;
    opts.seed = cfg.seed;
    opts.jitter = cfg.jitter;
    opts.progress = [&log](const Claim& c) {
        log << c.scenario << " | " << c.claim << " | " << to_string(c.verdict) << "\n" << std::flush;
    };
    const Report rep = scenario_report(opts);
    const Json j = to_json(rep);
    o.json(file, j);
    return Json{{"claims", rep.claims.size()}, {"verdict_counts", j["verdict_counts"]}};
}

void add_point(CLI::App* sub, Args& a) {
    sub->add_option("--point", a.point, "Start point x y z")->expected(3);
}

void add_battery(CLI::App* sub, Args& a) {
    sub->add_option("--seed-mode", a.seed_mode, "close-return, separatrix, basin-boundary, point or all")
        ->capture_default_str();
    add_point(sub, a);
    sub->add_option("--budget", a.budget, "Newton starts (config 'budget' by default)");
    sub->add_option("--jitter", a.jitter, "Uniform seed perturbation drawn from --seed");
}

void add_lyapunov(CLI::App* sub, Args& a) {
    sub->add_option("--transient", a.transient, "Discarded time");
    sub->add_option("--total", a.total, "Averaging time");
    sub->add_option("--renorm", a.renorm, "QR interval in [0.1, 1]");
}

int usage(std::ostream& err, const std::string& what, const CLI::App& app) {
    err << "error: " << what << "\n\n" << app.help();
    return 2;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical bifurcation analysis of the Lorenz system", "lorenzkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Globals g;
    auto* o_sigma = app.add_option("--sigma", g.sigma, "Prandtl number");
    auto* o_b = app.add_option("--b", g.b, "Geometric factor");
    app.add_option("--config", g.config, "key = value file applied under the flags");
    auto* o_out = app.add_option("--out", g.out, "Output directory (scenario-report: report path)");
    auto* o_rel = app.add_option("--tol-rel", g.tol_rel, "Relative integration tolerance");
    auto* o_abs = app.add_option("--tol-abs", g.tol_abs, "Absolute integration tolerance");
    auto* o_tmax = app.add_option("--tmax", g.tmax, "Integration horizon");
    auto* o_seed = app.add_option("--seed", g.seed, "Seed for Newton seed jitter");

    Args a;
    std::map<std::string, CLI::App*> subs;
    auto sub = [&](const std::string& name, const std::string& help) {
        CLI::App* s = app.add_subcommand(name, help);
        s->fallthrough();
        subs[name] = s;
        return s;
    };

    auto* s = sub("equilibria", "Equilibria with spectra and classification");
    s->add_option("--r", a.r, "Rayleigh parameter")->required();

    s = sub("separatrix", "Separatrix trajectories, section events and fates");
    s->add_option("--r", a.r, "Rayleigh parameter")->required();
    s->add_option("--side", a.side, "+, - or both")->capture_default_str();
    s->add_option("--offset", a.offset, "Launch distance from the origin")->capture_default_str();

    s = sub("homoclinic-search", "Bisection for the homoclinic butterfly value");
    s->add_option("--bracket", a.bracket, "a,b (default 13,15)");
    s->add_option("--width", a.width, "Final bracket width (default 1e-4)");

    s = sub("fate-transition", "Bisection for the separatrix fate transition");
    s->add_option("--bracket", a.bracket, "a,b (default 23,25)");
    s->add_option("--width", a.width, "Final bracket width (default 1e-3)");
    s->add_option("--checks", a.checks, "Fate profile grid size")->capture_default_str();

    s = sub("cycle", "Periodic orbit search");
    s->add_option("--r", a.r, "Rayleigh parameter")->required();
    add_battery(s, a);

    s = sub("continue", "Continuation of a periodic orbit in r");
    s->add_option("--r-from", a.r_from, "Start value")->required();
    s->add_option("--r-to", a.r_to, "Target value")->required();
    s->add_option("--step", a.step, "Initial step")->required();
    s->add_option("--pick", a.pick, "stable, o1, symmetric, asymmetric or an index")->capture_default_str();
    s->add_option("--min-step", a.min_step, "Smallest step before the branch ends")->capture_default_str();
    s->add_option("--amplitude-center", a.center, "O, O1 or O2");
    add_battery(s, a);

    s = sub("return-map", "Successive z maxima");
    s->add_option("--r", a.r, "Rayleigh parameter")->required();
    s->add_option("--n", a.n, "Maxima kept")->capture_default_str();
    s->add_option("--discard", a.discard, "Leading maxima dropped")->capture_default_str();
    s->add_option("--bins", a.bins, "Bins for the thinness measure")->capture_default_str();
    add_point(s, a);

    s = sub("lyapunov", "Lyapunov spectrum");
    s->add_option("--r", a.r, "Rayleigh parameter")->required();
    add_point(s, a);
    add_lyapunov(s, a);

    s = sub("sweep", "Lyapunov exponents and z maxima over an r grid");
    s->add_option("--r-from", a.r_from, "First value")->required();
    s->add_option("--r-to", a.r_to, "Last value")->required();
    s->add_option("--step", a.step, "Grid spacing")->required();
    add_point(s, a);
    add_lyapunov(s, a);

    s = sub("scenario-report", "Grade the scenario claims");
    s->add_option("--budget", a.budget, "Newton starts per cycle search");
    s->add_option("--jitter", a.jitter, "Uniform seed perturbation drawn from --seed");
    s->add_option("--fate-tmax", a.fate_tmax, "Separatrix fate horizon")->capture_default_str();
    add_lyapunov(s, a);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        app.exit(CLI::CallForHelp(), out, err);
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        app.exit(CLI::CallForAllHelp(), out, err);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        return usage(err, e.what(), app);
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg;
        if (!g.config.empty()) cfg = load_config(g.config, cfg);
        if (o_sigma->count()) cfg.sigma = g.sigma;
        if (o_b->count()) cfg.b = g.b;
        if (o_rel->count()) cfg.tol_rel = g.tol_rel;
        if (o_abs->count()) cfg.tol_abs = g.tol_abs;
        if (o_tmax->count()) cfg.t_max = g.tmax;
        if (o_seed->count()) cfg.seed = g.seed;

        std::string report_file = "report.json";
        if (o_out->count()) {
            fs::path target = g.out;
            if (name == "scenario-report" && target.extension() == ".json") {
                report_file = target.filename().string();
                target = target.parent_path().empty() ? fs::path(".") : target.parent_path();
            }
            cfg.out = target.string();
        }
        if (!std::isnan(a.transient)) cfg.lyap_transient = a.transient;
        if (!std::isnan(a.total)) cfg.lyap_total = a.total;
        if (!std::isnan(a.renorm)) cfg.lyap_renorm = a.renorm;
        if (!std::isnan(a.jitter)) cfg.jitter = a.jitter;
        if (a.budget != kUnset) (name == "scenario-report" ? cfg.report_budget : cfg.budget) = a.budget;
        cfg.validate();

        Outputs o(cfg.out);
        fs::create_directories(o.dir());
        fs::remove(o.path("manifest.json"));

        const auto t0 = std::chrono::steady_clock::now();
        Json result;
        if (name == "equilibria") result = run_equilibria(cfg, a, o);
        else if (name == "separatrix") result = run_separatrix(cfg, a, o);
        else if (name == "homoclinic-search") result = run_homoclinic(cfg, a, o);
        else if (name == "fate-transition") result = run_fate_transition(cfg, a, o);
        else if (name == "cycle") result = run_cycle(cfg, a, o);
        else if (name == "continue") result = run_continue(cfg, a, o);
        else if (name == "return-map") result = run_return_map(cfg, a, o);
        else if (name == "lyapunov") result = run_lyapunov(cfg, a, o);
        else if (name == "sweep") result = run_sweep(cfg, a, o);
        else result = run_report(cfg, a, o, report_file, err);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        o.text("effective_config.txt", to_config_text(cfg));

        std::vector<std::string> command(argv + 1, argv + argc);
        Json manifest{{"version", kVersion},
                      {"subcommand", name},
                      {"command", command},
                      {"config", to_json(cfg)},
                      {"wall_time_s", {{name, wall}}},
                      {"files", o.files()}};
        write_json(o.path("manifest.json"), manifest);

        out << result.dump(2) << "\n";
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace lorenz::cli
