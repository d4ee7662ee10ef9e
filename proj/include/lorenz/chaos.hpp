#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lorenz/dynamics.hpp"

namespace lorenz {

struct LyapunovSpectrum {
    std::array<double, 3> exponents{};  // descending
    double transient = 0.0;
    double total = 0.0;  // averaging window after the transient
    double renorm = 0.0;
    State final_state = State::Zero();

    double sum() const { return exponents[0] + exponents[1] + exponents[2]; }
};

inline constexpr double kDefaultLyapunovTransient = 100.0;
inline constexpr double kDefaultLyapunovTotal = 2000.0;
inline constexpr double kDefaultRenorm = 0.5;

/// Benettin's method: three tangent vectors carried along the orbit and
/// re-orthonormalized by QR every `renorm` time units. The transient is run
/// without tangent vectors. Throws LyapunovError with partial exponents if
/// the integration fails.
LyapunovSpectrum lyapunov_spectrum(const LorenzParams& p, const State& s0,
                                   double transient = kDefaultLyapunovTransient,
                                   double total = kDefaultLyapunovTotal,
                                   double renorm = kDefaultRenorm, const ToleranceSpec& tol = {});

enum class SweepVerdict { FixedPoint, Periodic, Chaotic, Undetermined };

std::string to_string(SweepVerdict v);

inline constexpr double kChaosThreshold = 0.01;
inline constexpr double kClusterTolerance = 1e-3;
inline constexpr int kMaxClusters = 32;

struct SweepSettings {
    State s0{1.0, 1.0, 1.0};
    double transient = kDefaultLyapunovTransient;
    double total = kDefaultLyapunovTotal;
    double renorm = kDefaultRenorm;
    int max_maxima = 256;  // latest z maxima kept for clustering
    ToleranceSpec tol{};
};

struct SweepRecord {
    double r = 0.0;
    std::vector<double> z_maxima;  // post-transient, latest max_maxima
    std::array<double, 3> exponents{};
    double leading_exponent = 0.0;
    SweepVerdict verdict = SweepVerdict::Undetermined;
    int n_clusters = 0;  // groups of z maxima at kClusterTolerance
    std::string error;   // non-empty when this r failed
};

/// Groups sorted values whose neighbours are closer than tol; returns the
/// number of groups, or nullopt when some group spans tol or more.
std::optional<int> cluster_count(std::vector<double> values, double tol = kClusterTolerance);

/// One record for a single r.
SweepRecord sweep_point(const LorenzParams& p, const SweepSettings& s = {});

/// Records for every r of an ascending grid, computed independently.
/// Failures are recorded inline.
std::vector<SweepRecord> sweep(const LorenzParams& templ, const std::vector<double>& r_grid,
                               const SweepSettings& s = {});

/// r_from, r_from + step, ... up to r_to (inclusive within step * 1e-9).
std::vector<double> make_grid(double r_from, double r_to, double step);

}  // namespace lorenz
