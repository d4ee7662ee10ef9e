#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lorenz/chaos.hpp"
#include "lorenz/cli.hpp"
#include "lorenz/cycles.hpp"
#include "lorenz/equilibria.hpp"
#include "lorenz/io.hpp"
#include "lorenz/report.hpp"
#include "lorenz/separatrix.hpp"

namespace py = pybind11;
using namespace lorenz;

namespace {

py::object to_py(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return py::none();
        case Json::value_t::boolean: return py::bool_(j.get<bool>());
        case Json::value_t::number_integer: return py::int_(j.get<long long>());
        case Json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case Json::value_t::number_float: return py::float_(j.get<double>());
        case Json::value_t::string: return py::str(j.get<std::string>());
        case Json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return out;
        }
        case Json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
            return out;
        }
        default: return py::none();
    }
}

State to_state(const std::vector<double>& v) {
    if (v.size() != 3) throw ValidationError("a state needs three coordinates");
    return {v[0], v[1], v[2]};
}

Side to_side(const std::string& s) {
    if (s == "+" || s == "plus") return Side::Plus;
    if (s == "-" || s == "minus") return Side::Minus;
    throw ValidationError("side must be '+' or '-'");
}

std::vector<SeedMode> to_modes(const std::vector<std::string>& names) {
    std::vector<SeedMode> out;
    for (const auto& n : names) {
        if (n == "close-return") out.push_back(SeedMode::CloseReturn);
        else if (n == "separatrix") out.push_back(SeedMode::Separatrix);
        else if (n == "basin-boundary") out.push_back(SeedMode::BasinBoundary);
        else if (n == "point") out.push_back(SeedMode::Point);
        else throw ValidationError("unknown seed mode '" + n + "'");
    }
    return out;
}

Json history(const std::vector<std::pair<double, double>>& h) {
    Json out = Json::array();
    for (const auto& [a, b] : h) out.push_back(Json::array({a, b}));
    return out;
}

BatteryResult battery(double r, double sigma, double b, int budget, const std::vector<std::string>& modes,
                      std::optional<std::vector<double>> point, std::uint64_t seed, double jitter) {
    BatteryOptions o;
    o.budget = budget;
    o.modes = to_modes(modes);
    if (point) o.point = to_state(*point);
    o.seed = seed;
    o.jitter = jitter;
    return cycle_search_battery({sigma, b, r}, o);
}

const std::vector<std::string> kDefaultModes{"close-return", "separatrix", "basin-boundary"};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lorenz system bifurcation toolkit";
    m.attr("__version__") = cli::kVersion;

    auto& base = py::register_exception<Error>(m, "LorenzError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<BracketError>(m, "BracketError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<LyapunovError>(m, "LyapunovError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    m.def("vector_field",
          [](const std::vector<double>& s, double r, double sigma, double b) {
              const State f = vector_field({sigma, b, r}, to_state(s));
              return std::vector<double>{f.x(), f.y(), f.z()};
          },
          py::arg("state"), py::arg("r"), py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("equilibria",
          [](double r, double sigma, double b) {
              Json out = Json::array();
              for (const auto& e : equilibria({sigma, b, r})) out.push_back(to_json(e));
              return to_py(out);
          },
          py::arg("r"), py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("hopf_threshold", &hopf_threshold, py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);
    m.def("find_hopf_numeric", &find_hopf_numeric, py::arg("sigma"), py::arg("b"), py::arg("bracket"));

    m.def("integrate",
          [](const std::vector<double>& s0, double r, double t_max, double sigma, double b, double rtol, double atol) {
              const Trajectory t = integrate({sigma, b, r}, to_state(s0), {rtol, atol, 0.1, t_max});
              py::array_t<double> out({static_cast<py::ssize_t>(t.samples.size()), py::ssize_t{4}});
              auto v = out.mutable_unchecked<2>();
              for (std::size_t i = 0; i < t.samples.size(); ++i) {
                  v(i, 0) = t.samples[i].t;
                  for (int k = 0; k < 3; ++k) v(i, k + 1) = t.samples[i].state[k];
              }
              return out;
          },
          "Rows of (t, x, y, z) at the accepted steps.", py::arg("s0"), py::arg("r"), py::arg("t_max") = 100.0,
          py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0, py::arg("rtol") = 1e-10, py::arg("atol") = 1e-10);

    m.def("separatrix_fate",
          [](double r, const std::string& side, double t_max, double sigma, double b) {
              return to_py(to_json(classify_separatrix_fate({sigma, b, r}, to_side(side), {}, t_max)));
          },
          py::arg("r"), py::arg("side") = "+", py::arg("t_max") = kDefaultFateHorizon, py::arg("sigma") = 10.0,
          py::arg("b") = 8.0 / 3.0);

    m.def("find_homoclinic_r",
          [](std::pair<double, double> bracket, double width, double sigma, double b) {
              const BisectionResult res = find_homoclinic_r({sigma, b, bracket.first}, bracket, {}, width);
              return to_py(Json{{"estimate", res.estimate}, {"history", history(res.history)}});
          },
          py::arg("bracket") = std::pair<double, double>{13.0, 15.0}, py::arg("width") = 1e-4,
          py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("find_fate_transition_r",
          [](std::pair<double, double> bracket, double t_max, double width, double sigma, double b) {
              const auto res = find_fate_transition_r({sigma, b, bracket.first}, bracket, t_max, {}, width);
              Json profile = Json::array();
              for (const auto& e : res.profile) profile.push_back(Json{{"r", e.r}, {"fate", to_json(e.fate)}});
              return to_py(Json{{"estimate", res.estimate ? Json(*res.estimate) : Json(nullptr)},
                                {"monotone", res.monotone},
                                {"history", history(res.history)},
                                {"profile", profile}});
          },
          py::arg("bracket") = std::pair<double, double>{23.0, 25.0}, py::arg("t_max") = kDefaultFateHorizon,
          py::arg("width") = 1e-3, py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("cycle_search",
          [](double r, int budget, const std::vector<std::string>& modes, std::optional<std::vector<double>> point,
             std::uint64_t seed, double jitter, double sigma, double b) {
              const BatteryResult res = battery(r, sigma, b, budget, modes, point, seed, jitter);
              Json orbits = Json::array();
              for (const auto& o : res.orbits) orbits.push_back(to_json(o));
              return to_py(Json{{"orbits", orbits}, {"stats", to_json(res.stats)}});
          },
          py::arg("r"), py::arg("budget") = 200, py::arg("modes") = kDefaultModes, py::arg("point") = py::none(),
          py::arg("seed") = 0, py::arg("jitter") = 0.0, py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("continue_cycle",
          [](double r_from, double r_to, double step, const std::string& pick, int budget, double sigma, double b) {
              const BatteryResult res = battery(r_from, sigma, b, budget, kDefaultModes, std::nullopt, 0, 0.0);
              const Branch br = continue_orbit(pick_orbit(res, pick), r_to, step);
              Json points = Json::array();
              for (const auto& p : br.points) {
                  const auto nt = p.orbit.nontrivial_multipliers();
                  points.push_back(Json{{"r", p.orbit.params.r},
                                        {"period", p.orbit.period},
                                        {"amplitude", p.amplitude},
                                        {"mu1", to_json(nt[0])},
                                        {"mu2", to_json(nt[1])}});
              }
              Json events = Json::array();
              for (const auto& e : br.events) events.push_back(to_json(e));
              return to_py(Json{{"points", points}, {"events", events}});
          },
          py::arg("r_from"), py::arg("r_to"), py::arg("step"), py::arg("pick") = "stable", py::arg("budget") = 200,
          py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("return_map",
          [](double r, int n, int discard, double sigma, double b) {
              const auto samples = lorenz_return_map({sigma, b, r}, State(1.0, 1.0, 1.0), n, discard);
              py::array_t<double> out({static_cast<py::ssize_t>(samples.size()), py::ssize_t{2}});
              auto v = out.mutable_unchecked<2>();
              for (std::size_t i = 0; i < samples.size(); ++i) {
                  v(i, 0) = samples[i].z_max_current;
                  v(i, 1) = samples[i].z_max_next;
              }
              return out;
          },
          "Pairs of successive z maxima.", py::arg("r"), py::arg("n") = 2000, py::arg("discard") = 100,
          py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("return_map_thinness",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> pairs, int bins) {
              if (pairs.ndim() != 2 || pairs.shape(1) != 2) throw ValidationError("expected an (n, 2) array");
              auto v = pairs.unchecked<2>();
              std::vector<ReturnMapSample> samples;
              for (py::ssize_t i = 0; i < v.shape(0); ++i) samples.push_back({v(i, 0), v(i, 1)});
              const auto t = return_map_thinness(samples, bins);
              return to_py(Json{{"range", t.range},
                                {"max_bin_spread", t.max_bin_spread},
                                {"relative_spread", t.relative_spread},
                                {"occupied_bins", t.occupied_bins}});
          },
          py::arg("pairs"), py::arg("bins") = 200);

    m.def("lyapunov_spectrum",
          [](double r, const std::vector<double>& s0, double transient, double total, double renorm, double sigma,
             double b) {
              return to_py(to_json(lyapunov_spectrum({sigma, b, r}, to_state(s0), transient, total, renorm)));
          },
          py::arg("r"), py::arg("s0") = std::vector<double>{1.0, 1.0, 1.0},
          py::arg("transient") = kDefaultLyapunovTransient, py::arg("total") = kDefaultLyapunovTotal,
          py::arg("renorm") = kDefaultRenorm, py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("sweep",
          [](const std::vector<double>& rs, double transient, double total, double sigma, double b) {
              SweepSettings s;
              s.transient = transient;
              s.total = total;
              Json out = Json::array();
              for (const auto& rec : sweep({sigma, b, 28.0}, rs, s))
                  out.push_back(Json{{"r", rec.r},
                                     {"exponents", rec.exponents},
                                     {"verdict", to_string(rec.verdict)},
                                     {"n_clusters", rec.n_clusters},
                                     {"z_maxima", rec.z_maxima},
                                     {"error", rec.error}});
              return to_py(out);
          },
          py::arg("rs"), py::arg("transient") = kDefaultLyapunovTransient, py::arg("total") = kDefaultLyapunovTotal,
          py::arg("sigma") = 10.0, py::arg("b") = 8.0 / 3.0);

    m.def("scenario_report",
          [](int budget, std::uint64_t seed) {
              ReportOptions o;
              o.budget = budget;
              o.seed = seed;
              Report rep;
              {
                  py::gil_scoped_release release;
                  rep = scenario_report(o);
              }
              return to_py(to_json(rep));
          },
          py::arg("budget") = 120, py::arg("seed") = 0);

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::vector<const char*> argv{"lorenzkit"};
              for (const auto& a : args) argv.push_back(a.c_str());
              std::ostringstream out, err;
              const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          "Run one command-line invocation in process; returns (status, stdout, stderr).", py::arg("args"));
}
