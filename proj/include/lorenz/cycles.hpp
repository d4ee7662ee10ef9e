#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorenz/dynamics.hpp"
#include "lorenz/equilibria.hpp"

namespace lorenz {

// ---------------------------------------------------------------------------
// Sections and return maps

/// Transversal section: a plane and the crossing direction that counts.
struct Section {
    Plane plane;
    Direction direction = Direction::Downward;
};

/// z = r - 1 crossed downward. Both O1 and O2 lie on this plane.
Section default_section(const LorenzParams& p);

struct SectionCrossings {
    std::vector<double> times;
    std::vector<State> points;
    /// False when t_max elapsed before n crossings were found.
    bool complete = true;
};

/// First n direction-filtered crossings of the section within tol.t_max.
SectionCrossings poincare_crossings(const LorenzParams& p, const State& s0, const Section& section,
                                    int n, const ToleranceSpec& tol = {});

struct ReturnMapSample {
    double z_max_current;
    double z_max_next;
};

/// Successive z maxima (M_i, M_{i+1}) after discarding the first `discard`
/// maxima. n_maxima counts the maxima kept, so n_maxima - 1 pairs result.
/// The horizon is extended as needed up to tol.t_max.
std::vector<ReturnMapSample> lorenz_return_map(const LorenzParams& p, const State& s0,
                                               int n_maxima, int discard = 100,
                                               const ToleranceSpec& tol = {1e-10, 1e-10, 0.1, 1e5});

struct ReturnMapThinness {
    double range = 0.0;          // horizontal extent of the samples
    double max_bin_spread = 0.0; // worst per-bin vertical spread after removing the in-bin trend
    double relative_spread = 0.0;
    int bins = 0;
    int occupied_bins = 0;
};

/// Bins the samples by z_max_current and measures the vertical thickness of
/// the graph in each bin after subtracting a least-squares line. The bin
/// holding the map's peak is skipped: the cusp is a genuine feature of the
/// graph, not thickness.
ReturnMapThinness return_map_thinness(const std::vector<ReturnMapSample>& samples, int bins = 200);

struct DiagonalCrossing {
    double z = 0.0;      // where the graph meets z_next = z_current
    double slope = 0.0;  // least-squares slope of the samples around it
};

/// Fixed points of the binned return map: sign changes of the per-bin mean
/// of z_next - z_current, with slopes fitted on the neighbouring bins that lie
/// on the same side of the peak. Empty when the graph never meets the diagonal.
std::vector<DiagonalCrossing> return_map_fixed_points(const std::vector<ReturnMapSample>& samples,
                                                      int bins = 200);

// ---------------------------------------------------------------------------
// Periodic orbits

enum class OrbitStability { Stable, Saddle, Unstable };

std::string to_string(OrbitStability s);

/// Counts of z maxima made in x > 0 (k) and x < 0 (m) over one period.
struct RotationSignature {
    int k = 0;
    int m = 0;
    bool operator==(const RotationSignature&) const = default;
};

struct FloquetSpectrum {
    std::array<Complex, 3> multipliers;
    int trivial_index = 0;
};

/// Multipliers of the product M_k ... M_1 of well-conditioned segment
/// propagators by periodic QR (subspace iteration on the factors). The
/// moduli come from the diagonals of the triangular factors, so a multiplier
/// of 1e-12 next to one of 1e3 keeps its relative accuracy. The trivial
/// multiplier is the one whose Schur direction carries `flow`.
FloquetSpectrum floquet_spectrum(const std::vector<Mat3>& segments, const State& flow);

struct PeriodicOrbit {
    LorenzParams params;
    Section section;
    State anchor;
    double period = 0.0;
    int section_returns = 1;  // section crossings per period
    Mat3 monodromy = Mat3::Identity();
    std::vector<Mat3> monodromy_segments;
    std::array<Complex, 3> multipliers;
    int trivial_index = 0;
    OrbitStability stability = OrbitStability::Saddle;
    bool symmetric = false;
    RotationSignature signature;
    int newton_iterations = 0;
    double residual = 0.0;
    double closure_error = 0.0;  // |phi_period(anchor) - anchor| on re-integration

    Complex trivial_multiplier() const { return multipliers[trivial_index]; }
    std::array<Complex, 2> nontrivial_multipliers() const;
    /// Product of the three multipliers.
    double multiplier_product() const;
};

struct OrbitSearchOptions {
    int returns = 1;
    std::optional<Section> section;  // default_section(p) when empty
    int max_iterations = 50;
    double residual_tol = 1e-10;
    double max_time_per_return = 50.0;
    double symmetry_tol = 1e-6;
};

/// Newton iteration on the section return map with derivatives from the
/// tangent flow. The guess is projected onto the section plane. Throws
/// ConvergenceError (with the residual history) or GeometryError.
PeriodicOrbit find_periodic_orbit(const LorenzParams& p, const State& guess,
                                  const ToleranceSpec& tol = {},
                                  const OrbitSearchOptions& opts = {});

/// One period of the orbit with dense output.
Trajectory orbit_trajectory(const PeriodicOrbit& orbit, const ToleranceSpec& tol = {});

/// Equilibrium nearest the time average of the orbit.
State orbit_center(const PeriodicOrbit& orbit, const ToleranceSpec& tol = {});

/// Largest distance of the orbit from `center`.
double orbit_amplitude(const PeriodicOrbit& orbit, const State& center, const ToleranceSpec& tol = {});

// ---------------------------------------------------------------------------
// Symmetry

State symmetry_image(const State& s);
Trajectory symmetry_image(const Trajectory& t);
PeriodicOrbit symmetry_image(const PeriodicOrbit& o);

/// True when b traces the same closed curve as a (anchors may differ by phase).
bool same_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, double anchor_tol = 1e-4,
                double period_rel_tol = 1e-4);

// ---------------------------------------------------------------------------
// Continuation

enum class BranchEventKind { PeriodDoubling, SymmetryBreaking, TorusBifurcation, BranchEnd };

std::string to_string(BranchEventKind k);

struct BranchEvent {
    BranchEventKind kind;
    double r;  // interpolated crossing value; last reached r for BranchEnd
    std::string detail;
};

struct BranchPoint {
    PeriodicOrbit orbit;
    double amplitude = 0.0;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;
};

struct ContinuationOptions {
    double min_step = 1e-4;
    /// Measure amplitude about this point instead of the orbit's nearest
    /// equilibrium (tracked as r changes when it is O1 or O2).
    std::optional<std::string> amplitude_center;  // "O", "O1" or "O2"
};

/// Natural-parameter continuation in r from orbit.params.r toward r_target.
/// Each step reuses the previous anchor (shifted with the reference
/// equilibrium) as the Newton guess; failed steps are halved down to
/// min_step, after which a BranchEnd event closes the branch. Multiplier
/// crossings of the unit circle between consecutive points are recorded:
/// through -1 as period doubling, through +1 as symmetry breaking / fold,
/// as a complex pair as a torus bifurcation.
Branch continue_orbit(const PeriodicOrbit& orbit, double r_target, double step,
                      const ToleranceSpec& tol = {}, const ContinuationOptions& opts = {});

// ---------------------------------------------------------------------------
// Cycle search

enum class SeedMode { CloseReturn, Separatrix, BasinBoundary, Point };

std::string to_string(SeedMode m);

struct BatteryOptions {
    int budget = 200;  // Newton starts
    std::vector<SeedMode> modes{SeedMode::CloseReturn, SeedMode::Separatrix,
                                SeedMode::BasinBoundary};
    std::optional<State> point;  // for SeedMode::Point
    double recurrence = 0.5;
    int max_returns = 8;
    double transient = 50.0;
    int crossings = 1500;
    std::uint64_t seed = 0;
    double jitter = 0.0;  // uniform seed perturbation, drawn from `seed`
};

struct BatteryStats {
    int seeds_considered = 0;
    int newton_starts = 0;
    int converged = 0;
    int failed = 0;
    int duplicates = 0;
    int symmetry_added = 0;
};

struct BatteryResult {
    std::vector<PeriodicOrbit> orbits;  // sorted by (period, anchor)
    BatteryStats stats;
};

/// Seeds Newton from close returns on a long trajectory, from the late
/// windings of both separatrices, from the basin boundary of O1 when it is
/// stable, and from symmetry images of the orbits found. Orbits are
/// deduplicated by anchor and period proximity.
BatteryResult cycle_search_battery(const LorenzParams& p, const BatteryOptions& opts = {},
                                   const ToleranceSpec& tol = {});

/// Picks one orbit from a battery result:
///   "stable"      first stable orbit
///   "o1"          first single-return orbit with all its z maxima at x > 0
///   "symmetric"   first symmetric orbit
///   "asymmetric"  first stable asymmetric orbit, else any asymmetric one
///   "<n>"         the n-th orbit (0-based)
/// Throws GeometryError when nothing matches, ValidationError on a bad selector.
const PeriodicOrbit& pick_orbit(const BatteryResult& result, const std::string& selector);

}  // namespace lorenz
