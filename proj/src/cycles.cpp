#include "lorenz/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "lorenz/parallel.hpp"
#include "lorenz/separatrix.hpp"

namespace lorenz {

std::string to_string(OrbitStability s) {
    switch (s) {
        case OrbitStability::Stable: return "stable";
        case OrbitStability::Saddle: return "saddle";
        case OrbitStability::Unstable: return "unstable";
    }
    return "saddle";
}

std::string to_string(BranchEventKind k) {
    switch (k) {
        case BranchEventKind::PeriodDoubling: return "period-doubling";
        case BranchEventKind::SymmetryBreaking: return "symmetry-breaking";
        case BranchEventKind::TorusBifurcation: return "torus";
        case BranchEventKind::BranchEnd: return "branch-end";
    }
    return "branch-end";
}

std::string to_string(SeedMode m) {
    switch (m) {
        case SeedMode::CloseReturn: return "close-return";
        case SeedMode::Separatrix: return "separatrix";
        case SeedMode::BasinBoundary: return "basin-boundary";
        case SeedMode::Point: return "point";
    }
    return "point";
}

Section default_section(const LorenzParams& p) {
    return {Plane::z_equals(p.r - 1.0), Direction::Downward};
}

// ---------------------------------------------------------------------------
// Crossings and the successive-maxima map

SectionCrossings poincare_crossings(const LorenzParams& p, const State& s0, const Section& section,
                                    int n, const ToleranceSpec& tol) {
    p.validate();
    require_finite(s0, "poincare_crossings");
    if (n < 1) throw ValidationError("number of crossings must be at least 1");
    const LorenzField field{p};
    Dopri5<3, LorenzField> stepper(field, s0, 0.0, tol);
    SectionCrossings out;
    while (static_cast<int>(out.points.size()) < n && stepper.t() < tol.t_max) {
        const DenseStep<3>& d = stepper.step(tol.t_max);
        if (auto c = locate_crossing<3>(field, d, section.plane, section.direction)) {
            if (c->grazing) continue;
            out.times.push_back(c->t);
            out.points.push_back(c->y);
        }
    }
    out.complete = static_cast<int>(out.points.size()) == n;
    return out;
}

std::vector<ReturnMapSample> lorenz_return_map(const LorenzParams& p, const State& s0,
                                               int n_maxima, int discard,
                                               const ToleranceSpec& tol) {
    p.validate();
    require_finite(s0, "lorenz_return_map");
    if (n_maxima < 2) throw ValidationError("return map needs at least 2 maxima");
    if (discard < 0) throw ValidationError("discard count must be non-negative");
    const LorenzField field{p};
    const ZVelocity zdot{p.b};
    Dopri5<3, LorenzField> stepper(field, s0, 0.0, tol);
    std::vector<double> maxima;
    int seen = 0;
    while (static_cast<int>(maxima.size()) < n_maxima && stepper.t() < tol.t_max) {
        const DenseStep<3>& d = stepper.step(tol.t_max);
        if (auto c = locate_crossing<3>(field, d, zdot, Direction::Downward)) {
            if (c->grazing) continue;
            if (seen++ >= discard) maxima.push_back(c->y[2]);
        }
    }
    if (maxima.size() < 2)
        throw InsufficientDataError("fewer than two z maxima after the transient");
    std::vector<ReturnMapSample> out;
    out.reserve(maxima.size() - 1);
    for (std::size_t i = 0; i + 1 < maxima.size(); ++i) out.push_back({maxima[i], maxima[i + 1]});
    return out;
}

ReturnMapThinness return_map_thinness(const std::vector<ReturnMapSample>& samples, int bins) {
    if (samples.size() < 2) throw InsufficientDataError("thinness needs at least two samples");
    if (bins < 1) throw ValidationError("bin count must be positive");
    ReturnMapThinness out;
    out.bins = bins;
    double lo = samples.front().z_max_current, hi = lo;
    std::size_t peak = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        lo = std::min(lo, samples[i].z_max_current);
        hi = std::max(hi, samples[i].z_max_current);
        if (samples[i].z_max_next > samples[peak].z_max_next) peak = i;
    }
    out.range = hi - lo;
    if (out.range <= 0.0) return out;
    auto bin_of = [&](double v) {
        return std::min(bins - 1, static_cast<int>((v - lo) / out.range * bins));
    };
    std::vector<std::vector<const ReturnMapSample*>> cells(bins);
    for (const auto& s : samples) cells[bin_of(s.z_max_current)].push_back(&s);
    const int peak_bin = bin_of(samples[peak].z_max_current);
    for (int b = 0; b < bins; ++b) {
        const auto& cell = cells[b];
        if (cell.empty()) continue;
        ++out.occupied_bins;
        if (b == peak_bin || cell.size() < 2) continue;
        double mx = 0.0, my = 0.0;
        for (const auto* s : cell) {
            mx += s->z_max_current;
            my += s->z_max_next;
        }
        mx /= cell.size();
        my /= cell.size();
        double sxx = 0.0, sxy = 0.0;
        for (const auto* s : cell) {
            sxx += (s->z_max_current - mx) * (s->z_max_current - mx);
            sxy += (s->z_max_current - mx) * (s->z_max_next - my);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
        for (const auto* s : cell) {
            const double res = s->z_max_next - my - slope * (s->z_max_current - mx);
            rmin = std::min(rmin, res);
            rmax = std::max(rmax, res);
        }
        out.max_bin_spread = std::max(out.max_bin_spread, rmax - rmin);
    }
    out.relative_spread = out.max_bin_spread / out.range;
    return out;
}

std::vector<DiagonalCrossing> return_map_fixed_points(const std::vector<ReturnMapSample>& samples,
                                                      int bins) {
    if (samples.size() < 2) throw InsufficientDataError("fixed points need at least two samples");
    if (bins < 2) throw ValidationError("bin count must be at least 2");
    double lo = samples.front().z_max_current, hi = lo;
    std::size_t peak = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        lo = std::min(lo, samples[i].z_max_current);
        hi = std::max(hi, samples[i].z_max_current);
        if (samples[i].z_max_next > samples[peak].z_max_next) peak = i;
    }
    std::vector<DiagonalCrossing> out;
    if (hi <= lo) return out;
    const double width = (hi - lo) / bins;
    auto bin_of = [&](double v) { return std::min(bins - 1, static_cast<int>((v - lo) / width)); };
    std::vector<double> sum(bins, 0.0);
    std::vector<int> count(bins, 0);
    for (const auto& s : samples) {
        const int b = bin_of(s.z_max_current);
        sum[b] += s.z_max_next - s.z_max_current;
        ++count[b];
    }
    const int peak_bin = bin_of(samples[peak].z_max_current);
    int prev = -1;
    for (int b = 0; b < bins; ++b) {
        if (count[b] == 0) continue;
        if (prev >= 0 && prev != peak_bin && b != peak_bin) {
            const double g0 = sum[prev] / count[prev], g1 = sum[b] / count[b];
            const bool same_side = (prev < peak_bin) == (b < peak_bin);
            if (same_side && (g0 > 0.0) != (g1 > 0.0)) {
                // Fit on up to three bins either side, staying off the peak.
                int a = std::max(0, prev - 2), c = std::min(bins - 1, b + 2);
                if (prev < peak_bin) c = std::min(c, peak_bin - 1);
                else a = std::max(a, peak_bin + 1);
                const double za = lo + a * width, zc = lo + (c + 1) * width;
                double mx = 0.0, my = 0.0;
                int n = 0;
                for (const auto& s : samples) {
                    if (s.z_max_current < za || s.z_max_current >= zc) continue;
                    mx += s.z_max_current;
                    my += s.z_max_next;
                    ++n;
                }
                if (n >= 2) {
                    mx /= n;
                    my /= n;
                    double sxx = 0.0, sxy = 0.0;
                    for (const auto& s : samples) {
                        if (s.z_max_current < za || s.z_max_current >= zc) continue;
                        sxx += (s.z_max_current - mx) * (s.z_max_current - mx);
                        sxy += (s.z_max_current - mx) * (s.z_max_next - my);
                    }
                    if (sxx > 0.0) {
                        const double slope = sxy / sxx;
                        // Line y = my + slope (x - mx) meets y = x here.
                        const double z = slope != 1.0 ? (my - slope * mx) / (1.0 - slope) : mx;
                        out.push_back({z, slope});
                    }
                }
            }
        }
        prev = b;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Floquet multipliers

namespace {

/// Eigenvalues of a real 2x2 block given its trace and determinant.
std::array<Complex, 2> pair_from_trace_det(double tr, double det) {
    const double half = 0.5 * tr;
    const double disc = half * half - det;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // Larger root first; the smaller from the product avoids cancellation.
        const double big = half >= 0.0 ? half + sq : half - sq;
        const double small = big != 0.0 ? det / big : 0.0;
        return {Complex(big), Complex(small)};
    }
    const double im = std::sqrt(-disc);
    return {Complex(half, im), Complex(half, -im)};
}

}  // namespace

namespace {

struct SchurSweep {
    Mat3 q_start;
    Mat3 h;                 // q_start^T q_end
    Eigen::Vector3d log_d;  // logs of the diagonal of the triangular product
    Mat3 unit;              // triangular product with the diagonal divided out
};

/// One pass of periodic QR over the factors starting from the basis q.
SchurSweep schur_sweep(const std::vector<Mat3>& segments, const Mat3& q0) {
    SchurSweep s;
    s.q_start = q0;
    s.log_d.setZero();
    s.unit.setIdentity();
    Mat3 q = q0;
    for (const Mat3& m : segments) {
        Eigen::HouseholderQR<Mat3> qr(m * q);
        Mat3 qn = qr.householderQ();
        Mat3 rn = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < 3; ++i) {
            if (rn(i, i) < 0.0) {
                qn.col(i) *= -1.0;
                rn.row(i) *= -1.0;
            }
        }
        // R_new D U = D_j D (D^-1 U_j D) U with U_j = D_j^-1 R_j.
        Mat3 uj = Mat3::Identity();
        for (int i = 0; i < 3; ++i)
            for (int k = i + 1; k < 3; ++k)
                uj(i, k) = rn(i, k) / rn(i, i) * std::exp(s.log_d[k] - s.log_d[i]);
        s.unit = uj * s.unit;
        for (int i = 0; i < 3; ++i) s.log_d[i] += std::log(rn(i, i));
        q = qn;
    }
    s.h = q0.transpose() * q;
    return s;
}

struct BlockSpectrum {
    std::array<Complex, 3> mu;
    std::array<int, 3> block_of{0, 1, 2};
};

BlockSpectrum read_blocks(const SchurSweep& s) {
    constexpr double kCoupled = 1e-8;
    const Eigen::Vector3d d = s.log_d.array().exp();
    const Mat3 t = s.h * d.asDiagonal() * s.unit;
    BlockSpectrum out;
    int i = 0;
    while (i < 3) {
        if (i < 2 && std::abs(s.h(i + 1, i)) > kCoupled) {
            const double det_h = s.h(i, i) * s.h(i + 1, i + 1) - s.h(i, i + 1) * s.h(i + 1, i);
            const double det = det_h * d[i] * d[i + 1];
            const auto pair = pair_from_trace_det(t(i, i) + t(i + 1, i + 1), det);
            out.mu[i] = pair[0];
            out.mu[i + 1] = pair[1];
            out.block_of[i + 1] = i;
            i += 2;
        } else {
            out.mu[i] = Complex(std::copysign(d[i], s.h(i, i)));
            ++i;
        }
    }
    return out;
}

}  // namespace

FloquetSpectrum floquet_spectrum(const std::vector<Mat3>& segments, const State& flow) {
    if (segments.empty()) throw ValidationError("floquet_spectrum needs at least one segment");
    constexpr int kMaxSweeps = 2000;
    SchurSweep sweep = schur_sweep(segments, Mat3::Identity());
    BlockSpectrum spec = read_blocks(sweep);
    int stable_sweeps = 0;
    for (int k = 0; k < kMaxSweeps && stable_sweeps < 3; ++k) {
        Eigen::HouseholderQR<Mat3> qr(sweep.q_start * sweep.h);
        Mat3 q = qr.householderQ();
        sweep = schur_sweep(segments, q);
        const BlockSpectrum next = read_blocks(sweep);
        bool same = next.block_of == spec.block_of;
        for (int i = 0; i < 3 && same; ++i)
            same = std::abs(next.mu[i] - spec.mu[i]) <= 1e-13 * std::abs(spec.mu[i]);
        stable_sweeps = same ? stable_sweeps + 1 : 0;
        spec = next;
    }
    FloquetSpectrum out;
    out.multipliers = spec.mu;
    const auto& block_of = spec.block_of;
    const Mat3& q_start = sweep.q_start;

    // The flow direction lies in the span of the first p Schur vectors.
    const Eigen::Vector3d c = q_start.transpose() * flow.normalized();
    int p = 0;
    for (int k = 0; k < 3; ++k)
        if (std::abs(c[k]) > 1e-6) p = k;
    int trivial = p;
    const int start = block_of[p];
    if (start != p || (p < 2 && block_of[p + 1] == p)) {
        const int a = start, b = start + 1;
        trivial = std::abs(out.multipliers[a] - 1.0) <= std::abs(out.multipliers[b] - 1.0) ? a : b;
    }
    out.trivial_index = trivial;
    return out;
}

std::array<Complex, 2> PeriodicOrbit::nontrivial_multipliers() const {
    std::array<Complex, 2> out;
    int j = 0;
    for (int i = 0; i < 3; ++i)
        if (i != trivial_index) out[j++] = multipliers[i];
    return out;
}

double PeriodicOrbit::multiplier_product() const {
    return (multipliers[0] * multipliers[1] * multipliers[2]).real();
}

// ---------------------------------------------------------------------------
// Newton on the section map

namespace {

struct SectionFrame {
    State origin;
    State e1, e2;
    State normal;

    State lift(const Eigen::Vector2d& u) const { return origin + u[0] * e1 + u[1] * e2; }
    Eigen::Vector2d coords(const State& s) const {
        const State d = s - origin;
        return {d.dot(e1), d.dot(e2)};
    }
};

SectionFrame frame_for(const Plane& plane) {
    SectionFrame f;
    f.normal = plane.normal.normalized();
    f.origin = plane.normal * (plane.offset / plane.normal.squaredNorm());
    // Pick the coordinate axis least aligned with the normal to start the basis.
    int axis = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(f.normal[k]) < std::abs(f.normal[axis])) axis = k;
    State a = State::Zero();
    a[axis] = 1.0;
    f.e1 = (a - a.dot(f.normal) * f.normal).normalized();
    f.e2 = f.normal.cross(f.e1);
    return f;
}

struct SectionReturn {
    State point;
    double time = 0.0;
    std::vector<Mat3> segments;
    Mat3 monodromy = Mat3::Identity();
    std::vector<State> crossings;  // includes the final one
};

SectionReturn section_return(const LorenzParams& p, const State& start, const Section& section,
                             int returns, const ToleranceSpec& tol, double max_time) {
    const TangentField field{p};
    ToleranceSpec t = tol.with_t_max(max_time);
    Dopri5<12, TangentField> stepper(field, pack_tangent(start, Mat3::Identity()), 0.0, t);
    SectionReturn out;
    double next_reset = kTangentSegment;
    while (stepper.t() < max_time) {
        const double stop = std::min(next_reset, max_time);
        const DenseStep<12>& d = stepper.step(stop);
        auto c = locate_crossing<12>(field, d, section.plane, section.direction);
        if (c && !c->grazing && c->t > 1e-9) {
            const State s = c->y.head<3>();
            out.crossings.push_back(s);
            if (static_cast<int>(out.crossings.size()) == returns) {
                out.point = s;
                out.time = c->t;
                out.segments.push_back(unpack_matrix(c->y));
                for (const Mat3& m : out.segments) out.monodromy = m * out.monodromy;
                return out;
            }
        }
        if (stepper.t() >= next_reset) {
            out.segments.push_back(unpack_matrix(stepper.y()));
            stepper.reset_state(pack_tangent(stepper.y().head<3>(), Mat3::Identity()));
            next_reset += kTangentSegment;
        }
    }
    throw GeometryError("orbit did not return to the section within the time limit");
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const LorenzParams& p, const State& guess,
                                  const ToleranceSpec& tol, const OrbitSearchOptions& opts) {
    p.validate();
    require_finite(guess, "find_periodic_orbit");
    if (opts.returns < 1) throw ValidationError("section returns must be at least 1");
    const Section section = opts.section.value_or(default_section(p));
    const SectionFrame frame = frame_for(section.plane);
    const double max_time = opts.max_time_per_return * opts.returns;

    Eigen::Vector2d u = frame.coords(guess);
    const State origin_guess = frame.lift(u);
    std::vector<double> history;
    auto evaluate = [&](const Eigen::Vector2d& at) {
        return section_return(p, frame.lift(at), section, opts.returns, tol, max_time);
    };
    auto check_escape = [&](const Eigen::Vector2d& at) {
        if (!at.allFinite() || (frame.lift(at) - origin_guess).norm() > 100.0)
            throw GeometryError("Newton iterate left the neighbourhood of the guess");
    };

    SectionReturn ret = evaluate(u);
    Eigen::Vector2d g = frame.coords(ret.point) - u;
    double res = g.norm();
    history.push_back(res);
    int it = 0;
    while (res >= opts.residual_tol) {
        if (++it > opts.max_iterations)
            throw ConvergenceError("Newton did not converge on the section map", history);
        const State f = LorenzField{p}(ret.point);
        const double nf = frame.normal.dot(f);
        if (std::abs(nf) < kGrazingRate) throw GeometryError("return is tangent to the section");
        const Mat3 proj = Mat3::Identity() - f * frame.normal.transpose() / nf;
        const Mat3 dp = proj * ret.monodromy;
        Eigen::Matrix<double, 3, 2> basis;
        basis.col(0) = frame.e1;
        basis.col(1) = frame.e2;
        const Eigen::Matrix2d jac = basis.transpose() * dp * basis - Eigen::Matrix2d::Identity();
        const Eigen::Vector2d du = -jac.fullPivLu().solve(g);
        if (!du.allFinite()) throw ConvergenceError("singular Newton system", history);

        double lambda = 1.0;
        bool accepted = false;
        for (int damp = 0; damp < 12; ++damp) {
            const Eigen::Vector2d trial = u + lambda * du;
            check_escape(trial);
            try {
                SectionReturn rt = evaluate(trial);
                const Eigen::Vector2d gt = frame.coords(rt.point) - trial;
                if (gt.norm() < res || damp == 11) {
                    u = trial;
                    ret = std::move(rt);
                    g = gt;
                    accepted = gt.norm() < res;
                    break;
                }
            } catch (const GeometryError&) {
                if (damp == 11) throw;
            }
            lambda *= 0.5;
        }
        res = g.norm();
        history.push_back(res);
        if (!accepted && res >= opts.residual_tol) {
            // Stagnation at the noise floor of the integrator counts as
            // converged only once the Newton correction itself is negligible.
            if (du.norm() < 10.0 * opts.residual_tol) break;
            throw ConvergenceError("Newton stalled on the section map", history);
        }
    }

    const State fixed = frame.lift(u);
    for (const auto& e : equilibria(p))
        if ((fixed - e.location).norm() < 1e-5 * std::max(1.0, e.location.norm()))
            throw GeometryError("Newton collapsed onto equilibrium " + e.name);

    PeriodicOrbit orbit;
    orbit.params = p;
    orbit.section = section;
    orbit.anchor = frame.lift(u);
    orbit.period = ret.time;
    orbit.section_returns = opts.returns;
    orbit.monodromy = ret.monodromy;
    orbit.monodromy_segments = ret.segments;
    orbit.newton_iterations = it;
    orbit.residual = res;

    const FloquetSpectrum spec = floquet_spectrum(ret.segments, LorenzField{p}(orbit.anchor));
    orbit.multipliers = spec.multipliers;
    orbit.trivial_index = spec.trivial_index;
    int outside = 0;
    for (const Complex& m : orbit.nontrivial_multipliers())
        if (std::abs(m) > 1.0) ++outside;
    orbit.stability = outside == 0   ? OrbitStability::Stable
                      : outside == 1 ? OrbitStability::Saddle
                                     : OrbitStability::Unstable;

    // One more period with z-maximum and section events for closure,
    // signature and symmetry.
    const LorenzField field{p};
    const ZVelocity zdot{p.b};
    Dopri5<3, LorenzField> stepper(field, orbit.anchor, 0.0, tol.with_t_max(orbit.period));
    std::vector<State> crossings{orbit.anchor};
    while (stepper.t() < orbit.period) {
        const DenseStep<3>& d = stepper.step(orbit.period);
        if (auto c = locate_crossing<3>(field, d, zdot, Direction::Downward)) {
            if (c->y[0] > 0.0)
                ++orbit.signature.k;
            else
                ++orbit.signature.m;
        }
        if (auto c = locate_crossing<3>(field, d, section.plane, section.direction))
            if (c->t < orbit.period - 1e-9) crossings.push_back(c->y);
    }
    orbit.closure_error = (stepper.y() - orbit.anchor).norm();
    const State mirrored = reflect(orbit.anchor);
    orbit.symmetric = std::any_of(crossings.begin(), crossings.end(), [&](const State& c) {
        return (c - mirrored).norm() < opts.symmetry_tol;
    });
    return orbit;
}

Trajectory orbit_trajectory(const PeriodicOrbit& orbit, const ToleranceSpec& tol) {
    Trajectory t = integrate(orbit.params, orbit.anchor, tol.with_t_max(orbit.period));
    t.tag = "orbit";
    return t;
}

State orbit_center(const PeriodicOrbit& orbit, const ToleranceSpec& tol) {
    const Trajectory t = orbit_trajectory(orbit, tol);
    State mean = State::Zero();
    for (const auto& d : t.dense) mean += 0.5 * d.h * (d.start() + d.end());
    mean /= orbit.period;
    State best = State::Zero();
    for (const auto& e : equilibria(orbit.params))
        if ((e.location - mean).norm() < (best - mean).norm()) best = e.location;
    return best;
}

double orbit_amplitude(const PeriodicOrbit& orbit, const State& center, const ToleranceSpec& tol) {
    const Trajectory t = orbit_trajectory(orbit, tol);
    double amp = 0.0;
    for (const auto& d : t.dense)
        for (int k = 0; k < 8; ++k) amp = std::max(amp, (d.eval(d.t0 + d.h * k / 8.0) - center).norm());
    return std::max(amp, (t.final_state() - center).norm());
}

// ---------------------------------------------------------------------------
// Symmetry

State symmetry_image(const State& s) { return reflect(s); }

Trajectory symmetry_image(const Trajectory& t) {
    Trajectory out = t;
    for (auto& s : out.samples) s.state = reflect(s.state);
    for (auto& e : out.events) e.state = reflect(e.state);
    for (auto& d : out.dense)
        for (auto& c : d.coeff) c = reflect(c);
    if (t.tag == "gamma1")
        out.tag = "gamma2";
    else if (t.tag == "gamma2")
        out.tag = "gamma1";
    return out;
}

PeriodicOrbit symmetry_image(const PeriodicOrbit& o) {
    PeriodicOrbit out = o;
    const Mat3 s = reflection_matrix();
    out.anchor = reflect(o.anchor);
    out.monodromy = s * o.monodromy * s;
    for (auto& m : out.monodromy_segments) m = s * m * s;
    out.signature = {o.signature.m, o.signature.k};
    return out;
}

bool same_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, double anchor_tol,
                double period_rel_tol) {
    if (std::abs(a.period - b.period) > period_rel_tol * std::max(a.period, b.period)) return false;
    if ((a.anchor - b.anchor).norm() < anchor_tol) return true;
    // Different phase: b's anchor must be one of a's section points.
    const SectionCrossings cs =
        poincare_crossings(a.params, a.anchor, a.section, a.section_returns,
                           ToleranceSpec{}.with_t_max(a.period * 1.01 + 1e-6));
    return std::any_of(cs.points.begin(), cs.points.end(),
                       [&](const State& c) { return (c - b.anchor).norm() < anchor_tol; });
}

// ---------------------------------------------------------------------------
// Continuation

namespace {

State reference_point(const LorenzParams& p, const std::string& name) {
    if (name == "O" || p.r <= 1.0) return State::Zero();
    const double c = std::sqrt(p.b * (p.r - 1.0));
    const State o1(c, c, p.r - 1.0);
    return name == "O2" ? reflect(o1) : o1;
}

std::string nearest_equilibrium_name(const PeriodicOrbit& o, const ToleranceSpec& tol) {
    const State c = orbit_center(o, tol);
    if (c.norm() == 0.0) return "O";
    return c.x() > 0.0 ? "O1" : "O2";
}

int count_outside(const PeriodicOrbit& o) {
    int n = 0;
    for (const Complex& m : o.nontrivial_multipliers())
        if (std::abs(m) > 1.0) ++n;
    return n;
}

/// Nontrivial multiplier whose modulus is nearest the unit circle.
Complex critical_multiplier(const PeriodicOrbit& o) {
    const auto nt = o.nontrivial_multipliers();
    return std::abs(std::log(std::abs(nt[0]))) <= std::abs(std::log(std::abs(nt[1]))) ? nt[0] : nt[1];
}

/// Newton solve of prev's branch at r_next, guessing from prev's anchor
/// shifted with the reference equilibrium. Empty on failure or branch jump.
std::optional<PeriodicOrbit> step_orbit(const PeriodicOrbit& prev, double r_next,
                                        const std::string& ref, const ToleranceSpec& tol) {
    const double r_prev = prev.params.r;
    const LorenzParams pn = prev.params.with_r(r_next);
    const State shift = reference_point(pn, ref) - reference_point(prev.params, ref);
    OrbitSearchOptions o;
    o.returns = prev.section_returns;
    o.section = prev.section;
    // A horizontal section tracks the equilibria's height r - 1.
    const State& n = prev.section.plane.normal;
    if (n.x() == 0.0 && n.y() == 0.0) o.section->plane.offset += (r_next - r_prev) * n.z();
    try {
        PeriodicOrbit next = find_periodic_orbit(pn, prev.anchor + shift, tol, o);
        const bool jumped = std::abs(next.period - prev.period) > 0.2 * prev.period ||
                            (next.anchor - reference_point(pn, ref)).norm() < 1e-7;
        if (!jumped) return next;
    } catch (const Error&) {
    }
    return std::nullopt;
}

std::string format_multiplier(const Complex& m) {
    std::ostringstream os;
    os.precision(6);
    os << m.real() << (m.imag() >= 0 ? "+" : "") << m.imag() << "i";
    return os.str();
}

/// Classify a change in the number of unstable multipliers between a and b,
/// then narrow the bracket by bisection until the critical multiplier is
/// within 1e-3 of the unit circle at both ends.
std::optional<BranchEvent> crossing_event(const PeriodicOrbit& a, const PeriodicOrbit& b,
                                          const std::string& ref, const ToleranceSpec& tol) {
    const int na = count_outside(a);
    if (na == count_outside(b)) return std::nullopt;
    PeriodicOrbit lo = a, hi = b;
    auto near_circle = [](const PeriodicOrbit& o) {
        return std::abs(std::abs(critical_multiplier(o)) - 1.0) < 1e-3;
    };
    for (int it = 0; it < 40; ++it) {
        if (near_circle(lo) && near_circle(hi)) break;
        if (std::abs(hi.params.r - lo.params.r) < 1e-9) break;
        const double mid = 0.5 * (lo.params.r + hi.params.r);
        auto m = step_orbit(lo, mid, ref, tol);
        if (!m) break;
        if (count_outside(*m) == na)
            lo = std::move(*m);
        else
            hi = std::move(*m);
    }
    const Complex ma = critical_multiplier(lo);
    const Complex mb = critical_multiplier(hi);
    const double la = std::log(std::abs(ma));
    const double lb = std::log(std::abs(mb));
    const double ra = lo.params.r, rb = hi.params.r;
    BranchEvent ev;
    ev.r = (la == lb) ? 0.5 * (ra + rb) : ra + (rb - ra) * la / (la - lb);
    const double imag_tol = 1e-6;
    const bool complex_pair = std::abs(ma.imag()) > imag_tol || std::abs(mb.imag()) > imag_tol;
    if (complex_pair)
        ev.kind = BranchEventKind::TorusBifurcation;
    else if (ma.real() < 0.0 && mb.real() < 0.0)
        ev.kind = BranchEventKind::PeriodDoubling;
    else
        ev.kind = BranchEventKind::SymmetryBreaking;
    std::ostringstream os;
    os.precision(10);
    os << "multiplier " << format_multiplier(ma) << " at r=" << ra << " -> " << format_multiplier(mb)
       << " at r=" << rb;
    ev.detail = os.str();
    return ev;
}

}  // namespace

Branch continue_orbit(const PeriodicOrbit& orbit, double r_target, double step,
                      const ToleranceSpec& tol, const ContinuationOptions& opts) {
    if (!(step > 0.0 && step <= 0.5)) throw ValidationError("continuation step must lie in (0, 0.5]");
    if (!(opts.min_step > 0.0)) throw ValidationError("minimum continuation step must be positive");
    const std::string ref = opts.amplitude_center.value_or(nearest_equilibrium_name(orbit, tol));

    Branch branch;
    branch.points.push_back({orbit, orbit_amplitude(orbit, reference_point(orbit.params, ref), tol)});
    const double dir = r_target >= orbit.params.r ? 1.0 : -1.0;
    double h = step;
    while (dir * (r_target - branch.points.back().orbit.params.r) > 0.0) {
        const PeriodicOrbit& prev = branch.points.back().orbit;
        const double r_prev = prev.params.r;
        double r_next = r_prev + dir * h;
        if (dir * (r_next - r_target) > 0.0) r_next = r_target;
        if (auto next = step_orbit(prev, r_next, ref, tol)) {
            const double amp = orbit_amplitude(*next, reference_point(next->params, ref), tol);
            if (auto ev = crossing_event(prev, *next, ref, tol)) branch.events.push_back(*ev);
            branch.points.push_back({std::move(*next), amp});
            h = std::min(step, 2.0 * h);
        } else {
            h *= 0.5;
            if (h < opts.min_step) {
                std::ostringstream os;
                os << "Newton failed below the minimum step " << opts.min_step;
                branch.events.push_back({BranchEventKind::BranchEnd, r_prev, os.str()});
                break;
            }
        }
    }
    return branch;
}

// ---------------------------------------------------------------------------
// Cycle search battery

namespace {

struct Seed {
    State point;
    int returns;
    double score;  // recurrence distance; smaller is better
    SeedMode mode;
};

std::vector<Seed> close_return_seeds(const std::vector<State>& pts, const BatteryOptions& opts,
                                     SeedMode mode) {
    std::vector<Seed> seeds;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (int k = 1; k <= opts.max_returns && i + k < pts.size(); ++k) {
            const double d = (pts[i + k] - pts[i]).norm();
            if (d < opts.recurrence) {
                seeds.push_back({pts[i], k, d, mode});
                break;
            }
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(),
                     [](const Seed& a, const Seed& b) { return a.score < b.score; });
    // Thin out seeds that repeat an earlier one.
    std::vector<Seed> kept;
    for (const Seed& s : seeds) {
        const bool near = std::any_of(kept.begin(), kept.end(), [&](const Seed& k) {
            return k.returns == s.returns && (k.point - s.point).norm() < 0.05;
        });
        if (!near) kept.push_back(s);
    }
    return kept;
}

std::vector<State> trajectory_crossings(const LorenzParams& p, const State& s0, const Section& sec,
                                        double transient, int n, const ToleranceSpec& tol) {
    const LorenzField field{p};
    const double horizon = transient + 100.0 * n;
    Dopri5<3, LorenzField> stepper(field, s0, 0.0, tol.with_t_max(horizon));
    std::vector<State> out;
    while (static_cast<int>(out.size()) < n && stepper.t() < horizon) {
        const DenseStep<3>& d = stepper.step(horizon);
        if (stepper.t() < transient) continue;
        if (auto c = locate_crossing<3>(field, d, sec.plane, sec.direction))
            if (!c->grazing) out.push_back(c->y);
    }
    return out;
}

/// True when the orbit from s crosses to x < 0 within the horizon.
bool leaves_o1_side(const LorenzParams& p, const State& s, double horizon, const ToleranceSpec& tol) {
    const LorenzField field{p};
    Dopri5<3, LorenzField> stepper(field, s, 0.0, tol.with_t_max(horizon));
    while (stepper.t() < horizon) {
        stepper.step(horizon);
        if (stepper.y()[0] < 0.0) return true;
    }
    return false;
}

/// Points on the boundary of O1's basin (the stable manifold of the saddle
/// cycle around O1), located by bisection along rays in the section plane and
/// then carried forward so they settle next to the cycle.
std::vector<Seed> basin_boundary_seeds(const LorenzParams& p, const Section& sec,
                                       const ToleranceSpec& tol) {
    std::vector<Seed> seeds;
    if (!(p.r > 1.0)) return seeds;
    const auto eq = equilibria(p);
    if (!eq[1].stable()) return seeds;
    const State o1 = eq[1].location;
    const double horizon = 150.0;
    const SectionFrame frame = frame_for(sec.plane);
    for (int dir = 0; dir < 4; ++dir) {
        const double ang = 0.5 * std::acos(-1.0) * dir;
        const State u = std::cos(ang) * frame.e1 + std::sin(ang) * frame.e2;
        double lo = 1e-3, hi = lo;
        bool found = false;
        while (hi < 40.0) {
            hi *= 2.0;
            if (leaves_o1_side(p, o1 + hi * u, horizon, tol)) {
                found = true;
                break;
            }
            lo = hi;
        }
        if (!found || leaves_o1_side(p, o1 + lo * u, horizon, tol)) continue;
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (leaves_o1_side(p, o1 + mid * u, horizon, tol))
                hi = mid;
            else
                lo = mid;
        }
        // Follow the inner boundary point while it shadows the cycle.
        const auto cs = poincare_crossings(p, o1 + lo * u, sec, 12, tol.with_t_max(60.0));
        for (std::size_t i = 6; i < cs.points.size(); i += 3)
            seeds.push_back({cs.points[i], 1, 0.0, SeedMode::BasinBoundary});
    }
    return seeds;
}

bool canonical_less(const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (std::abs(a.period - b.period) > 1e-9 * std::max(a.period, b.period)) return a.period < b.period;
    if (a.anchor.x() != b.anchor.x()) return a.anchor.x() < b.anchor.x();
    if (a.anchor.y() != b.anchor.y()) return a.anchor.y() < b.anchor.y();
    return a.anchor.z() < b.anchor.z();
}

}  // namespace

BatteryResult cycle_search_battery(const LorenzParams& p, const BatteryOptions& opts,
                                   const ToleranceSpec& tol) {
    p.validate();
    if (opts.budget < 0) throw ValidationError("battery budget must be non-negative");
    const Section sec = default_section(p);
    BatteryResult result;

    std::vector<std::vector<Seed>> pools;
    auto has = [&](SeedMode m) {
        return std::find(opts.modes.begin(), opts.modes.end(), m) != opts.modes.end();
    };
    const double delta = p.r > 1.0 ? std::sqrt(p.b * (p.r - 1.0)) : 1.0;
    if (has(SeedMode::CloseReturn)) {
        const State s0(1.0 + 0.1 * delta, 1.0, std::max(1.0, p.r - 1.0) + 0.5);
        pools.push_back(close_return_seeds(
            trajectory_crossings(p, s0, sec, opts.transient, opts.crossings, tol), opts,
            SeedMode::CloseReturn));
    }
    if (has(SeedMode::Separatrix) && p.r > 1.0) {
        std::vector<Seed> sep;
        for (Side side : {Side::Plus, Side::Minus}) {
            const auto [plus, minus] = unstable_directions(p);
            const State s0 = kDefaultLaunchOffset * (side == Side::Plus ? plus : minus);
            auto pts = trajectory_crossings(p, s0, sec, 0.0, opts.crossings, tol);
            auto seeds = close_return_seeds(pts, opts, SeedMode::Separatrix);
            sep.insert(sep.end(), seeds.begin(), seeds.end());
        }
        std::stable_sort(sep.begin(), sep.end(),
                         [](const Seed& a, const Seed& b) { return a.score < b.score; });
        pools.push_back(std::move(sep));
    }
    if (has(SeedMode::BasinBoundary)) pools.push_back(basin_boundary_seeds(p, sec, tol));
    if (has(SeedMode::Point) && opts.point) {
        std::vector<Seed> pt;
        const auto cs = poincare_crossings(p, *opts.point, sec, 1, tol.with_t_max(200.0));
        if (!cs.points.empty())
            for (int k = 1; k <= opts.max_returns; ++k) pt.push_back({cs.points[0], k, 0.0, SeedMode::Point});
        auto cr = close_return_seeds(trajectory_crossings(p, *opts.point, sec, opts.transient,
                                                          opts.crossings, tol),
                                     opts, SeedMode::Point);
        pt.insert(pt.end(), cr.begin(), cr.end());
        pools.push_back(std::move(pt));
    }

    // Round-robin over the pools so every mode gets a share of the budget.
    std::vector<Seed> queue;
    for (std::size_t idx = 0;; ++idx) {
        bool any = false;
        for (const auto& pool : pools) {
            if (idx < pool.size()) {
                queue.push_back(pool[idx]);
                any = true;
            }
        }
        if (!any) break;
    }
    for (const auto& pool : pools) result.stats.seeds_considered += static_cast<int>(pool.size());

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    for (auto& s : queue) {
        if (opts.jitter > 0.0) {
            s.point.x() += opts.jitter * jitter(rng);
            s.point.y() += opts.jitter * jitter(rng);
        }
    }

    auto known = [&](const PeriodicOrbit& o) {
        return std::any_of(result.orbits.begin(), result.orbits.end(),
                           [&](const PeriodicOrbit& k) { return same_orbit(k, o); });
    };
    auto covered = [&](const Seed& s) {
        // A seed sitting on a known orbit's section point with the same
        // number of returns would only rediscover it.
        return std::any_of(result.orbits.begin(), result.orbits.end(), [&](const PeriodicOrbit& k) {
            return k.section_returns == s.returns && (k.anchor - s.point).norm() < 1e-3;
        });
    };

    const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
    std::size_t next = 0;
    while (next < queue.size() && result.stats.newton_starts < opts.budget) {
        std::vector<Seed> work;
        while (next < queue.size() && work.size() < batch &&
               result.stats.newton_starts + static_cast<int>(work.size()) < opts.budget) {
            const Seed& s = queue[next++];
            if (covered(s)) {
                ++result.stats.duplicates;
                continue;
            }
            work.push_back(s);
        }
        if (work.empty()) continue;
        result.stats.newton_starts += static_cast<int>(work.size());
        auto found = parallel_map<std::optional<PeriodicOrbit>>(work.size(), [&](std::size_t i) {
            OrbitSearchOptions o;
            o.returns = work[i].returns;
            try {
                return std::optional<PeriodicOrbit>(find_periodic_orbit(p, work[i].point, tol, o));
            } catch (const Error&) {
                return std::optional<PeriodicOrbit>();
            }
        });
        for (auto& f : found) {
            if (!f) {
                ++result.stats.failed;
                continue;
            }
            ++result.stats.converged;
            if (known(*f)) {
                ++result.stats.duplicates;
                continue;
            }
            result.orbits.push_back(*f);
            // Symmetry image as a fresh Newton start.
            if (f->symmetric || result.stats.newton_starts >= opts.budget) continue;
            ++result.stats.newton_starts;
            try {
                OrbitSearchOptions o;
                o.returns = f->section_returns;
                PeriodicOrbit img = find_periodic_orbit(p, reflect(f->anchor), tol, o);
                ++result.stats.converged;
                if (!known(img)) {
                    result.orbits.push_back(std::move(img));
                    ++result.stats.symmetry_added;
                } else {
                    ++result.stats.duplicates;
                }
            } catch (const Error&) {
                ++result.stats.failed;
            }
        }
    }
    std::sort(result.orbits.begin(), result.orbits.end(), canonical_less);
    return result;
}

const PeriodicOrbit& pick_orbit(const BatteryResult& result, const std::string& selector) {
    const auto& v = result.orbits;
    auto first = [&](auto pred) -> const PeriodicOrbit* {
        for (const auto& o : v)
            if (pred(o)) return &o;
        return nullptr;
    };
    const PeriodicOrbit* hit = nullptr;
    if (selector == "stable") {
        hit = first([](const PeriodicOrbit& o) { return o.stability == OrbitStability::Stable; });
    } else if (selector == "o1") {
        hit = first([](const PeriodicOrbit& o) {
            return o.section_returns == 1 && o.signature.m == 0 && o.signature.k > 0;
        });
    } else if (selector == "symmetric") {
        hit = first([](const PeriodicOrbit& o) { return o.symmetric; });
    } else if (selector == "asymmetric") {
        hit = first([](const PeriodicOrbit& o) {
            return !o.symmetric && o.stability == OrbitStability::Stable;
        });
        if (!hit) hit = first([](const PeriodicOrbit& o) { return !o.symmetric; });
    } else {
        std::size_t pos = 0;
        long idx = -1;
        try {
            idx = std::stol(selector, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != selector.size() || selector.empty() || idx < 0)
            throw ValidationError("unknown orbit selector '" + selector + "'");
        if (static_cast<std::size_t>(idx) < v.size()) hit = &v[idx];
    }
    if (!hit) throw GeometryError("no orbit matches selector '" + selector + "'");
    return *hit;
}

}  // namespace lorenz
