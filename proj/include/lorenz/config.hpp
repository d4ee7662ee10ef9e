#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lorenz/io.hpp"

namespace lorenz {

struct RunConfig {
    double sigma = 10.0;
    double b = 8.0 / 3.0;
    double tol_rel = 1e-10;
    double tol_abs = 1e-10;
    double max_step = 0.1;
    std::optional<double> t_max;  // subcommand default when absent
    std::string out = "out";
    std::uint64_t seed = 0;
    double jitter = 0.0;
    int budget = 200;          // Newton starts per cycle search
    int report_budget = 120;   // per r in the scenario report's cycle searches
    double lyap_transient = 100.0;
    double lyap_total = 2000.0;
    double lyap_renorm = 0.5;

    /// Throws ValidationError naming the offending field.
    void validate() const;

    LorenzParams params(double r) const { return {sigma, b, r}; }
    ToleranceSpec tolerance(double default_t_max) const {
        return {tol_rel, tol_abs, max_step, t_max.value_or(default_t_max)};
    }
};

/// Apply one `key = value` setting. Throws ValidationError on an unknown key
/// or a value that does not parse.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` file with `#` comments, applied over `base`.
/// Errors name the key or carry the line number.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

Json to_json(const RunConfig& cfg);

/// The config as `key = value` lines that load_config reads back unchanged.
std::string to_config_text(const RunConfig& cfg);

}  // namespace lorenz
