#include "lorenz/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace lorenz {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty())
        throw ValidationError("malformed value for " + key + ": '" + v + "'");
    return out;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty())
        throw ValidationError("malformed value for " + key + ": '" + v + "'");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"sigma", [](RunConfig& c, const std::string& k, const std::string& v) { c.sigma = parse_double(k, v); }},
        {"b", [](RunConfig& c, const std::string& k, const std::string& v) { c.b = parse_double(k, v); }},
        {"tol_rel", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_rel = parse_double(k, v); }},
        {"tol_abs", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_abs = parse_double(k, v); }},
        {"max_step", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_step = parse_double(k, v); }},
        {"t_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_max = parse_double(k, v); }},
        {"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }},
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long s = parse_int(k, v);
             if (s < 0) throw ValidationError("seed must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"jitter", [](RunConfig& c, const std::string& k, const std::string& v) { c.jitter = parse_double(k, v); }},
        {"budget", [](RunConfig& c, const std::string& k, const std::string& v) { c.budget = static_cast<int>(parse_int(k, v)); }},
        {"report_budget",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.report_budget = static_cast<int>(parse_int(k, v)); }},
        {"lyap_transient",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.lyap_transient = parse_double(k, v); }},
        {"lyap_total", [](RunConfig& c, const std::string& k, const std::string& v) { c.lyap_total = parse_double(k, v); }},
        {"lyap_renorm",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.lyap_renorm = parse_double(k, v); }},
    };
    return table;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

void RunConfig::validate() const {
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive and finite");
    require(std::isfinite(b) && b > 0.0, "b must be positive and finite");
    require(std::isfinite(tol_rel) && tol_rel > 0.0, "tol_rel must be positive");
    require(std::isfinite(tol_abs) && tol_abs > 0.0, "tol_abs must be positive");
    require(std::isfinite(max_step) && max_step > 0.0, "max_step must be positive");
    require(!t_max || (std::isfinite(*t_max) && *t_max > 0.0), "t_max must be positive");
    require(!out.empty(), "out must not be empty");
    require(std::isfinite(jitter) && jitter >= 0.0, "jitter must be non-negative");
    require(budget >= 0, "budget must be non-negative");
    require(report_budget >= 0, "report_budget must be non-negative");
    require(std::isfinite(lyap_transient) && lyap_transient >= 0.0, "lyap_transient must be non-negative");
    require(std::isfinite(lyap_total) && lyap_total > 0.0, "lyap_total must be positive");
    require(lyap_renorm >= 0.1 && lyap_renorm <= 1.0, "lyap_renorm must lie in [0.1, 1]");
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ValidationError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = path.string() + ":" + std::to_string(number) + ": ";
        if (eq == std::string::npos) throw ValidationError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            set_config_value(base, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    return base;
}

Json to_json(const RunConfig& c) {
    Json j{{"sigma", c.sigma},
           {"b", c.b},
           {"tol_rel", c.tol_rel},
           {"tol_abs", c.tol_abs},
           {"max_step", c.max_step}};
    j["t_max"] = c.t_max ? Json(*c.t_max) : Json(nullptr);
    j["out"] = c.out;
    j["seed"] = c.seed;
    j["jitter"] = c.jitter;
    j["budget"] = c.budget;
    j["report_budget"] = c.report_budget;
    j["lyap_transient"] = c.lyap_transient;
    j["lyap_total"] = c.lyap_total;
    j["lyap_renorm"] = c.lyap_renorm;
    return j;
}

std::string to_config_text(const RunConfig& c) {
    std::string out;
    auto line = [&](const char* key, const std::string& v) { out += std::string(key) + " = " + v + "\n"; };
    line("sigma", format_number(c.sigma));
    line("b", format_number(c.b));
    line("tol_rel", format_number(c.tol_rel));
    line("tol_abs", format_number(c.tol_abs));
    line("max_step", format_number(c.max_step));
    if (c.t_max) line("t_max", format_number(*c.t_max));
    line("out", c.out);
    line("seed", std::to_string(c.seed));
    line("jitter", format_number(c.jitter));
    line("budget", std::to_string(c.budget));
    line("report_budget", std::to_string(c.report_budget));
    line("lyap_transient", format_number(c.lyap_transient));
    line("lyap_total", format_number(c.lyap_total));
    line("lyap_renorm", format_number(c.lyap_renorm));
    return out;
}

}  // namespace lorenz
