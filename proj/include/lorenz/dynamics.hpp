#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lorenz/dopri5.hpp"
#include "lorenz/params.hpp"

namespace lorenz {

/// (sigma (y - x), x (r - z) - y, x y - b z). Throws DomainError on non-finite input.
State vector_field(const LorenzParams& p, const State& s);

/// [[-sigma, sigma, 0], [r - z, -1, -x], [y, x, -b]].
Mat3 jacobian(const LorenzParams& p, const State& s);

/// The field without input checks, as consumed by the stepper.
struct LorenzField {
    LorenzParams p;
    Vec<3> operator()(const Vec<3>& s) const {
        return {p.sigma * (s[1] - s[0]), s[0] * (p.r - s[2]) - s[1], s[0] * s[1] - p.b * s[2]};
    }
};

/// Field plus tangent flow: the state is (s, vec(M)) in column-major order and
/// dM/dt = J(s) M.
struct TangentField {
    LorenzParams p;
    Vec<12> operator()(const Vec<12>& u) const {
        const double x = u[0], y = u[1], z = u[2];
        Vec<12> out;
        out[0] = p.sigma * (y - x);
        out[1] = x * (p.r - z) - y;
        out[2] = x * y - p.b * z;
        for (int c = 0; c < 3; ++c) {
            const double m0 = u[3 + 3 * c], m1 = u[4 + 3 * c], m2 = u[5 + 3 * c];
            out[3 + 3 * c] = p.sigma * (m1 - m0);
            out[4 + 3 * c] = (p.r - z) * m0 - m1 - x * m2;
            out[5 + 3 * c] = y * m0 + x * m1 - p.b * m2;
        }
        return out;
    }
};

inline Vec<12> pack_tangent(const State& s, const Mat3& m) {
    Vec<12> u;
    u.head<3>() = s;
    u.tail<9>() = Eigen::Map<const Vec<9>>(m.data());
    return u;
}

inline Mat3 unpack_matrix(const Vec<12>& u) {
    Mat3 m;
    Eigen::Map<Vec<9>>(m.data()) = u.tail<9>();
    return m;
}

// ---------------------------------------------------------------------------
// Event functions

enum class Direction { Both, Upward, Downward };

/// Plane n . s = offset. "Upward" means n . s increasing.
struct Plane {
    State normal{0.0, 0.0, 1.0};
    double offset = 0.0;

    double value(const State& s) const { return normal.dot(s) - offset; }
    double rate(const State& /*s*/, const State& f) const { return normal.dot(f); }

    static Plane z_equals(double z) { return {State(0.0, 0.0, 1.0), z}; }
};

/// dz/dt = x y - b z. A downward zero of this function is a local z maximum.
struct ZVelocity {
    double b = 8.0 / 3.0;
    double value(const State& s) const { return s.x() * s.y() - b * s.z(); }
    double rate(const State& s, const State& f) const {
        return f.x() * s.y() + s.x() * f.y() - b * f.z();
    }
};

inline constexpr double kGrazingRate = 1e-12;
inline constexpr double kEventTimeTol = 1e-12;

template <int N>
struct Crossing {
    double t = 0.0;
    Vec<N> y;
    double rate = 0.0;  // d(event)/dt at the root
    bool grazing = false;
};

/// Locate a sign change of ev over one accepted step. The root is bracketed
/// on the dense output (Illinois), then polished with exact steps from the
/// step start so the crossing state has the stepper's full order.
template <int N, class Field, class Event>
std::optional<Crossing<N>> locate_crossing(const Field& f, const DenseStep<N>& step,
                                           const Event& ev, Direction dir) {
    auto g = [&](const Vec<N>& y) { return ev.value(State(y.template head<3>())); };
    const double g0 = g(step.start());
    const Vec<N> yend = step.end();
    const double g1 = g(yend);
    const bool up = g0 < 0.0 && g1 >= 0.0;
    const bool down = g0 > 0.0 && g1 <= 0.0;
    if (!(up || down)) return std::nullopt;
    if ((dir == Direction::Upward && !up) || (dir == Direction::Downward && !down))
        return std::nullopt;

    double a = step.t0, b = step.t1();
    double ga = g0, gb = g1;
    int side = 0;
    double tr = b;
    for (int it = 0; it < 200 && (b - a) > 0.25 * kEventTimeTol; ++it) {
        tr = (a * gb - b * ga) / (gb - ga);
        if (!(tr > a && tr < b)) tr = 0.5 * (a + b);
        const double gr = g(step.eval(tr));
        if (gr == 0.0) {
            a = b = tr;
            break;
        }
        if ((gr > 0.0) == (gb > 0.0)) {
            b = tr;
            gb = gr;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            a = tr;
            ga = gr;
            if (side == 1) gb *= 0.5;
            side = 1;
        }
    }
    tr = (a == b) ? a : (std::abs(ga) < std::abs(gb) ? a : b);

    Crossing<N> out;
    out.t = tr;
    out.y = dopri_exact_step<N>(f, step.start(), tr - step.t0);
    for (int it = 0; it < 3; ++it) {
        const State s = out.y.template head<3>();
        const State fs = f(out.y).template head<3>();
        const double rate = ev.rate(s, fs);
        const double gv = ev.value(s);
        if (rate == 0.0 || gv == 0.0) break;
        const double dt = -gv / rate;
        if (std::abs(dt) > step.h) break;
        const double tn = std::clamp(out.t + dt, step.t0, step.t1());
        if (tn == out.t) break;
        out.t = tn;
        out.y = dopri_exact_step<N>(f, step.start(), out.t - step.t0);
        if (std::abs(dt) < kEventTimeTol) break;
    }
    const State s = out.y.template head<3>();
    out.rate = ev.rate(s, State(f(out.y).template head<3>()));
    out.grazing = std::abs(out.rate) < kGrazingRate;
    return out;
}

// ---------------------------------------------------------------------------
// Trajectories

struct Sample {
    double t;
    State state;
};

struct TrajectoryEvent {
    double t;
    State state;
    std::string tag;
};

struct Trajectory {
    LorenzParams params;
    std::string tag;
    std::vector<Sample> samples;
    std::vector<TrajectoryEvent> events;
    std::vector<DenseStep<3>> dense;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t grazing_events = 0;

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
    const State& final_state() const { return samples.back().state; }

    /// Dense-output evaluation at any t in [t_begin, t_end].
    State at(double t) const;
};

/// Integrate over [0, tol.t_max] with dense output stored per step.
Trajectory integrate(const LorenzParams& p, const State& s0, const ToleranceSpec& tol = {});

/// As integrate, additionally recording every direction-filtered transversal
/// crossing of the plane as an event tagged "plane". Grazing crossings are
/// counted in grazing_events and not recorded.
Trajectory integrate_with_events(const LorenzParams& p, const State& s0, const ToleranceSpec& tol,
                                 const Plane& plane, Direction direction = Direction::Both);

/// Longest interval over which a tangent map is integrated from the identity.
/// The monodromy over longer horizons is the ordered product of these
/// segment propagators; each one stays well conditioned, so determinants and
/// Floquet multipliers can be formed from them without the cancellation that
/// ruins det(M) once M spans many orders of magnitude.
inline constexpr double kTangentSegment = 0.25;

struct VariationalResult {
    State state;
    Mat3 monodromy;                // product of segments, latest on the left
    std::vector<Mat3> segments;    // propagators in time order

    /// det(monodromy) as the product of segment determinants.
    double determinant() const;
};

/// Flow and tangent map over [0, T].
VariationalResult integrate_variational(const LorenzParams& p, const State& s0, double T,
                                        const ToleranceSpec& tol = {});

}  // namespace lorenz
