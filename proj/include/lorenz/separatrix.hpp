#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorenz/dynamics.hpp"

namespace lorenz {

/// Side + leaves the origin toward x > 0 (Gamma_1), side - toward x < 0 (Gamma_2).
enum class Side { Plus, Minus };

std::string to_string(Side s);

inline constexpr double kDefaultLaunchOffset = 1e-6;
inline constexpr double kConvergenceRadius = 1e-5;
inline constexpr double kConvergenceHold = 5.0;
inline constexpr double kHomoclinicThreshold = 1e-3;
inline constexpr double kDefaultFateHorizon = 1000.0;

/// Unit eigenvectors of the positive eigenvalue of the Jacobian at the
/// origin: (plus, minus) with plus.x() > 0 and minus = reflect(plus).
std::pair<State, State> unstable_directions(const LorenzParams& p);

/// Separatrix integrated over [0, tol.t_max] from origin + offset * direction.
/// The trajectory tag is "gamma1" for side + and "gamma2" for side -.
Trajectory launch_separatrix(const LorenzParams& p, Side side,
                             double offset = kDefaultLaunchOffset,
                             const ToleranceSpec& tol = {});

enum class FateVerdict { ConvergesToO1, ConvergesToO2, NearHomoclinic, UndecidedWandering };

std::string to_string(FateVerdict v);

struct SeparatrixFate {
    FateVerdict verdict = FateVerdict::UndecidedWandering;
    /// Closest approach to the origin once the orbit has moved half way to O1.
    double min_distance_to_origin = 0.0;
    /// Entry into the final convergence ball, the near-homoclinic return, or
    /// t_max when undecided.
    double decision_time = 0.0;
    double t_max = kDefaultFateHorizon;
    /// z maxima passed before the first downward crossing of z = r - 1.
    int maxima_before_first_return = 0;
};

/// Long-time fate of one separatrix. Convergence to O1 or O2 means staying
/// within 1e-5 of it for 5 consecutive time units; a post-departure return
/// within 1e-3 of the origin is near-homoclinic.
SeparatrixFate classify_separatrix_fate(const LorenzParams& p, Side side,
                                        const ToleranceSpec& tol = {},
                                        double t_max = kDefaultFateHorizon,
                                        double offset = kDefaultLaunchOffset);

struct BisectionResult {
    double estimate = 0.0;
    std::vector<std::pair<double, double>> history;  // bracket after each halving
};

/// Homoclinic-butterfly value r1: bisection on the sign of reascent_x, to
/// |dr| < width. Below r1 Gamma_1 falls back toward O1, above it the orbit
/// swings over to the O2 side.
BisectionResult find_homoclinic_r(const LorenzParams& p_template, std::pair<double, double> bracket,
                                  const ToleranceSpec& tol = {}, double width = 1e-4);

/// x at the first upward crossing of z = r - 1 by Gamma_1 after its first
/// downward crossing, i.e. where the orbit climbs again after its first loop.
/// Throws GeometryError when that crossing is not reached within tol.t_max.
double reascent_x(const LorenzParams& p, const ToleranceSpec& tol = {});

struct FateProfileEntry {
    double r;
    SeparatrixFate fate;
};

/// Fate of side + on each grid value, evaluated independently and returned
/// in grid order.
std::vector<FateProfileEntry> fate_profile(const LorenzParams& p_template,
                                           const std::vector<double>& r_grid,
                                           double t_max = kDefaultFateHorizon,
                                           const ToleranceSpec& tol = {});

struct FateTransitionResult {
    /// Absent when the fate profile inside the bracket is not monotone.
    std::optional<double> estimate;
    double t_max = kDefaultFateHorizon;
    std::vector<std::pair<double, double>> history;
    /// Bracket of the last bisection step whose ends still disagreed.
    std::pair<double, double> last_interval{0.0, 0.0};
    /// Checking grid across the bracket; always populated.
    std::vector<FateProfileEntry> profile;
    bool monotone = true;
};

/// Operational r2: bisection on "side + converges" versus "side + still
/// wandering at t_max", to |dr| < width.
FateTransitionResult find_fate_transition_r(const LorenzParams& p_template,
                                            std::pair<double, double> bracket,
                                            double t_max = kDefaultFateHorizon,
                                            const ToleranceSpec& tol = {}, double width = 1e-3,
                                            int check_points = 11);

}  // namespace lorenz
