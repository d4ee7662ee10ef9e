#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorenz/chaos.hpp"
#include "lorenz/cycles.hpp"
#include "lorenz/equilibria.hpp"
#include "lorenz/separatrix.hpp"

namespace lorenz {

using Json = nlohmann::ordered_json;

/// Shortest decimal text with 17 significant digits.
std::string format_number(double v);

/// Writers return the number of data rows (header excluded).
std::size_t write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t);
std::size_t write_events_csv(const std::filesystem::path& path, const Trajectory& t);
std::size_t write_fate_profile_csv(const std::filesystem::path& path,
                                   const std::vector<FateProfileEntry>& profile);
std::size_t write_branch_csv(const std::filesystem::path& path, const Branch& branch);
std::size_t write_return_map_csv(const std::filesystem::path& path,
                                 const std::vector<ReturnMapSample>& samples);
std::size_t write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records);
/// One row per (r, z maximum) for bifurcation diagrams.
std::size_t write_sweep_maxima_csv(const std::filesystem::path& path,
                                   const std::vector<SweepRecord>& records);

void write_json(const std::filesystem::path& path, const Json& j);

Json to_json(const State& s);
Json to_json(const Complex& c);
Json to_json(const LorenzParams& p);
Json to_json(const ToleranceSpec& t);
Json to_json(const Equilibrium& e);
Json to_json(const SeparatrixFate& f);
Json to_json(const PeriodicOrbit& o);
Json to_json(const BranchEvent& e);
Json to_json(const LyapunovSpectrum& s);
Json to_json(const BatteryStats& s);

}  // namespace lorenz
