#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lorenz/io.hpp"

namespace lorenz {

enum class Verdict { Supported, Contradicted, Inconclusive };

std::string to_string(Verdict v);

struct Claim {
    std::string scenario;  // "C", "MS" or "G"
    std::string claim;
    std::string location;  // scenario item the claim comes from
    std::string finding;   // numeric finding in words
    Verdict verdict = Verdict::Inconclusive;
    std::string error;     // set when the probe failed
    Json details = Json::object();
};

struct ReportOptions {
    double sigma = 10.0;
    double b = 8.0 / 3.0;
    ToleranceSpec tol{};
    int budget = 120;  // Newton starts per cycle search
    double fate_t_max = 1000.0;
    double lyap_transient = 100.0;
    double lyap_total = 2000.0;
    double lyap_renorm = 0.5;
    std::uint64_t seed = 0;
    double jitter = 0.0;
    /// Called with each claim as it completes.
    std::function<void(const Claim&)> progress;
};

struct Report {
    std::vector<Claim> claims;
    std::vector<std::string> notes;
};

/// Runs the fixed probe battery and grades each claim. A probe that throws
/// leaves its claim inconclusive with the error attached.
Report scenario_report(const ReportOptions& opts = {});

Json to_json(const Claim& c);
Json to_json(const Report& r);

}  // namespace lorenz
