#include "lorenz/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lorenz {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error("write failed for " + path.string());
}

std::string join(std::initializer_list<std::string> cells) {
    std::string s;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) s += ',';
        s += c;
        first = false;
    }
    return s;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t) {
    auto out = open_for_write(path);
    out << "t,x,y,z\n";
    for (const auto& s : t.samples)
        out << join({format_number(s.t), format_number(s.state.x()), format_number(s.state.y()),
                     format_number(s.state.z())})
            << '\n';
    finish(out, path);
    return t.samples.size();
}

std::size_t write_events_csv(const std::filesystem::path& path, const Trajectory& t) {
    auto out = open_for_write(path);
    out << "t,x,y,z,tag\n";
    for (const auto& e : t.events)
        out << join({format_number(e.t), format_number(e.state.x()), format_number(e.state.y()),
                     format_number(e.state.z()), e.tag})
            << '\n';
    finish(out, path);
    return t.events.size();
}

std::size_t write_fate_profile_csv(const std::filesystem::path& path,
                                   const std::vector<FateProfileEntry>& profile) {
    auto out = open_for_write(path);
    out << "r,verdict,decision_time,min_dist_origin\n";
    for (const auto& e : profile)
        out << join({format_number(e.r), to_string(e.fate.verdict),
                     format_number(e.fate.decision_time),
                     format_number(e.fate.min_distance_to_origin)})
            << '\n';
    finish(out, path);
    return profile.size();
}

std::size_t write_branch_csv(const std::filesystem::path& path, const Branch& branch) {
    auto out = open_for_write(path);
    out << "r,period,amplitude,mu1_re,mu1_im,mu2_re,mu2_im,event\n";
    // Each event is attached to the first point at or past its r.
    std::vector<std::string> tags(branch.points.size());
    for (const auto& ev : branch.events) {
        std::size_t at = branch.points.size() - 1;
        for (std::size_t i = 1; i < branch.points.size(); ++i) {
            const double a = branch.points[i - 1].orbit.params.r;
            const double b = branch.points[i].orbit.params.r;
            if ((ev.r - a) * (ev.r - b) <= 0.0) {
                at = i;
                break;
            }
        }
        if (!tags[at].empty()) tags[at] += ';';
        tags[at] += to_string(ev.kind);
    }
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        const auto& o = branch.points[i].orbit;
        const auto mu = o.nontrivial_multipliers();
        out << join({format_number(o.params.r), format_number(o.period),
                     format_number(branch.points[i].amplitude), format_number(mu[0].real()),
                     format_number(mu[0].imag()), format_number(mu[1].real()),
                     format_number(mu[1].imag()), tags[i]})
            << '\n';
    }
    finish(out, path);
    return branch.points.size();
}

std::size_t write_return_map_csv(const std::filesystem::path& path,
                                 const std::vector<ReturnMapSample>& samples) {
    auto out = open_for_write(path);
    out << "zmax_i,zmax_next\n";
    for (const auto& s : samples)
        out << format_number(s.z_max_current) << ',' << format_number(s.z_max_next) << '\n';
    finish(out, path);
    return samples.size();
}

std::size_t write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records) {
    auto out = open_for_write(path);
    out << "r,lam1,lam2,lam3,verdict,n_clusters\n";
    for (const auto& r : records)
        out << join({format_number(r.r), format_number(r.exponents[0]), format_number(r.exponents[1]),
                     format_number(r.exponents[2]), to_string(r.verdict),
                     std::to_string(r.n_clusters)})
            << '\n';
    finish(out, path);
    return records.size();
}

std::size_t write_sweep_maxima_csv(const std::filesystem::path& path,
                                   const std::vector<SweepRecord>& records) {
    auto out = open_for_write(path);
    out << "r,zmax\n";
    std::size_t rows = 0;
    for (const auto& r : records) {
        for (double z : r.z_maxima) {
            out << format_number(r.r) << ',' << format_number(z) << '\n';
            ++rows;
        }
    }
    finish(out, path);
    return rows;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

Json to_json(const State& s) { return Json::array({s.x(), s.y(), s.z()}); }

Json to_json(const Complex& c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

Json to_json(const LorenzParams& p) { return Json{{"sigma", p.sigma}, {"b", p.b}, {"r", p.r}}; }

Json to_json(const ToleranceSpec& t) {
    return Json{{"rel", t.rel}, {"abs", t.abs}, {"max_step", t.max_step}, {"t_max", t.t_max}};
}

Json to_json(const Equilibrium& e) {
    Json eig = Json::array();
    for (const auto& l : e.eigenvalues) eig.push_back(to_json(l));
    return Json{{"name", e.name}, {"location", to_json(e.location)}, {"eigenvalues", eig},
                {"type", to_string(e.type)}, {"stable", e.stable()}};
}

Json to_json(const SeparatrixFate& f) {
    return Json{{"verdict", to_string(f.verdict)},
                {"min_distance_to_origin", f.min_distance_to_origin},
                {"decision_time", f.decision_time},
                {"t_max", f.t_max},
                {"maxima_before_first_return", f.maxima_before_first_return}};
}

Json to_json(const PeriodicOrbit& o) {
    Json mu = Json::array();
    for (const auto& m : o.multipliers) mu.push_back(to_json(m));
    return Json{{"params", to_json(o.params)},
                {"anchor", to_json(o.anchor)},
                {"period", o.period},
                {"section_returns", o.section_returns},
                {"multipliers", mu},
                {"trivial_index", o.trivial_index},
                {"stability", to_string(o.stability)},
                {"symmetric", o.symmetric},
                {"signature", Json{{"k", o.signature.k}, {"m", o.signature.m}}},
                {"newton_iterations", o.newton_iterations},
                {"residual", o.residual},
                {"closure_error", o.closure_error}};
}

Json to_json(const BranchEvent& e) {
    return Json{{"kind", to_string(e.kind)}, {"r", e.r}, {"detail", e.detail}};
}

Json to_json(const LyapunovSpectrum& s) {
    return Json{{"exponents", Json::array({s.exponents[0], s.exponents[1], s.exponents[2]})},
                {"sum", s.sum()},
                {"transient", s.transient},
                {"total", s.total},
                {"renorm", s.renorm}};
}

Json to_json(const BatteryStats& s) {
    return Json{{"seeds_considered", s.seeds_considered}, {"newton_starts", s.newton_starts},
                {"converged", s.converged},               {"failed", s.failed},
                {"duplicates", s.duplicates},             {"symmetry_added", s.symmetry_added}};
}

}  // namespace lorenz
