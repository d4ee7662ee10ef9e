#include "lorenz/separatrix.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "lorenz/parallel.hpp"

namespace lorenz {

std::string to_string(Side s) { return s == Side::Plus ? "+" : "-"; }

std::string to_string(FateVerdict v) {
    switch (v) {
        case FateVerdict::ConvergesToO1: return "converges-to-O1";
        case FateVerdict::ConvergesToO2: return "converges-to-O2";
        case FateVerdict::NearHomoclinic: return "near-homoclinic";
        case FateVerdict::UndecidedWandering: return "undecided-wandering";
    }
    return "undecided-wandering";
}

std::pair<State, State> unstable_directions(const LorenzParams& p) {
    p.validate();
    if (!(p.r > 1.0)) throw DomainError("origin has no unstable direction for r <= 1");
    // The z direction decouples at the origin; the unstable eigenvector lives
    // in the (x, y) block [[-sigma, sigma], [r, -1]].
    const double lam = 0.5 * (-(p.sigma + 1.0) +
                              std::sqrt((p.sigma + 1.0) * (p.sigma + 1.0) +
                                        4.0 * p.sigma * (p.r - 1.0)));
    State v(1.0, (lam + p.sigma) / p.sigma, 0.0);
    v.normalize();
    return {v, reflect(v)};
}

namespace {

State launch_point(const LorenzParams& p, Side side, double offset) {
    if (!(offset >= 1e-8 && offset <= 1e-4))
        throw ValidationError("separatrix launch offset must lie in [1e-8, 1e-4]");
    const auto [plus, minus] = unstable_directions(p);
    return offset * (side == Side::Plus ? plus : minus);
}

/// Minimum over the dense output of one step of |s - target|.
double min_distance_on_step(const DenseStep<3>& d, const State& target) {
    double best = (d.start() - target).norm();
    for (int k = 1; k <= 4; ++k) best = std::min(best, (d.eval(d.t0 + 0.25 * k * d.h) - target).norm());
    return best;
}

}  // namespace

Trajectory launch_separatrix(const LorenzParams& p, Side side, double offset,
                             const ToleranceSpec& tol) {
    Trajectory t = integrate(p, launch_point(p, side, offset), tol);
    t.tag = side == Side::Plus ? "gamma1" : "gamma2";
    return t;
}

SeparatrixFate classify_separatrix_fate(const LorenzParams& p, Side side, const ToleranceSpec& tol,
                                        double t_max, double offset) {
    p.validate();
    if (!(t_max > 0.0)) throw ValidationError("fate horizon must be positive");
    const State s0 = launch_point(p, side, offset);
    const double c = std::sqrt(p.b * (p.r - 1.0));
    const State o1(c, c, p.r - 1.0);
    const State o2 = reflect(o1);
    const double departure = 0.5 * o1.norm();

    const LorenzField field{p};
    Dopri5<3, LorenzField> stepper(field, s0, 0.0, tol.with_t_max(t_max));
    const Plane section = Plane::z_equals(p.r - 1.0);
    const ZVelocity zdot{p.b};

    SeparatrixFate fate;
    fate.t_max = t_max;
    fate.decision_time = t_max;
    fate.min_distance_to_origin = std::numeric_limits<double>::infinity();
    bool departed = false;
    bool returned = false;
    int maxima = 0;
    int inside = 0;  // 0 none, 1 near O1, 2 near O2
    double entered = 0.0;

    try {
        while (stepper.t() < t_max) {
            const DenseStep<3>& d = stepper.step(t_max);
            const State s = stepper.y();
            if (!departed && s.norm() > departure) departed = true;
            if (departed) {
                fate.min_distance_to_origin =
                    std::min(fate.min_distance_to_origin, min_distance_on_step(d, State::Zero()));
                if (fate.min_distance_to_origin < kHomoclinicThreshold) {
                    fate.verdict = FateVerdict::NearHomoclinic;
                    fate.decision_time = stepper.t();
                    break;
                }
            }
            if (!returned) {
                if (locate_crossing<3>(field, d, zdot, Direction::Downward)) ++maxima;
                if (locate_crossing<3>(field, d, section, Direction::Downward)) {
                    returned = true;
                    fate.maxima_before_first_return = maxima;
                }
            }
            int now = 0;
            if ((s - o1).norm() < kConvergenceRadius)
                now = 1;
            else if ((s - o2).norm() < kConvergenceRadius)
                now = 2;
            if (now != inside) {
                inside = now;
                entered = d.t0;
            }
            if (inside != 0 && stepper.t() - entered >= kConvergenceHold) {
                fate.verdict = inside == 1 ? FateVerdict::ConvergesToO1 : FateVerdict::ConvergesToO2;
                fate.decision_time = entered;
                break;
            }
        }
    } catch (const IntegrationError&) {
        throw;
    }
    if (!std::isfinite(fate.min_distance_to_origin)) fate.min_distance_to_origin = s0.norm();
    return fate;
}

double reascent_x(const LorenzParams& p, const ToleranceSpec& tol) {
    const State s0 = launch_point(p, Side::Plus, kDefaultLaunchOffset);
    const LorenzField field{p};
    Dopri5<3, LorenzField> stepper(field, s0, 0.0, tol);
    const Plane section = Plane::z_equals(p.r - 1.0);
    bool descended = false;
    while (stepper.t() < tol.t_max) {
        const DenseStep<3>& d = stepper.step(tol.t_max);
        if (auto c = locate_crossing<3>(field, d, section, Direction::Both)) {
            if (c->rate < 0.0)
                descended = true;
            else if (descended)
                return c->y[0];
        }
    }
    throw GeometryError("separatrix did not fall through and re-cross z = r - 1 within t_max");
}

BisectionResult find_homoclinic_r(const LorenzParams& p_template, std::pair<double, double> bracket,
                                  const ToleranceSpec& tol, double width) {
    auto [lo, hi] = bracket;
    if (lo > hi) std::swap(lo, hi);
    if (!(lo > 1.0)) throw BracketError("homoclinic bracket must lie in r > 1");
    const ToleranceSpec t = tol.with_t_max(std::min(tol.t_max, 50.0));
    double xlo = reascent_x(p_template.with_r(lo), t);
    const double xhi = reascent_x(p_template.with_r(hi), t);
    if ((xlo > 0.0) == (xhi > 0.0))
        throw BracketError("separatrix re-ascends on the same side at both bracket ends");
    BisectionResult out;
    out.history.emplace_back(lo, hi);
    while (hi - lo >= width) {
        const double mid = 0.5 * (lo + hi);
        const double xm = reascent_x(p_template.with_r(mid), t);
        if ((xm > 0.0) == (xlo > 0.0)) {
            lo = mid;
            xlo = xm;
        } else {
            hi = mid;
        }
        out.history.emplace_back(lo, hi);
    }
    out.estimate = 0.5 * (lo + hi);
    return out;
}

std::vector<FateProfileEntry> fate_profile(const LorenzParams& p_template,
                                           const std::vector<double>& r_grid, double t_max,
                                           const ToleranceSpec& tol) {
    return parallel_map<FateProfileEntry>(r_grid.size(), [&](std::size_t i) {
        return FateProfileEntry{
            r_grid[i], classify_separatrix_fate(p_template.with_r(r_grid[i]), Side::Plus, tol, t_max)};
    });
}

namespace {

bool wanders(const SeparatrixFate& f) { return f.verdict == FateVerdict::UndecidedWandering; }

}  // namespace

FateTransitionResult find_fate_transition_r(const LorenzParams& p_template,
                                            std::pair<double, double> bracket, double t_max,
                                            const ToleranceSpec& tol, double width,
                                            int check_points) {
    auto [lo, hi] = bracket;
    if (lo > hi) std::swap(lo, hi);
    if (!(lo > 1.0)) throw BracketError("fate-transition bracket must lie in r > 1");
    FateTransitionResult out;
    out.t_max = t_max;

    std::vector<double> grid;
    const int n = std::max(2, check_points);
    for (int i = 0; i < n; ++i) grid.push_back(lo + (hi - lo) * i / (n - 1));
    out.profile = fate_profile(p_template, grid, t_max, tol);
    const bool wlo = wanders(out.profile.front().fate);
    const bool whi = wanders(out.profile.back().fate);
    if (wlo == whi)
        throw BracketError("separatrix fate does not change between the bracket ends");

    // Narrow to the first flip on the checking grid; any later flip back
    // means the fate is not monotone in r over the bracket.
    std::size_t flip = 0;
    int flips = 0;
    for (std::size_t i = 1; i < out.profile.size(); ++i) {
        if (wanders(out.profile[i].fate) != wanders(out.profile[i - 1].fate)) {
            if (flips == 0) flip = i;
            ++flips;
        }
    }
    out.monotone = flips == 1;
    lo = out.profile[flip - 1].r;
    hi = out.profile[flip].r;
    out.history.emplace_back(lo, hi);
    while (hi - lo >= width) {
        const double mid = 0.5 * (lo + hi);
        const bool wm = wanders(classify_separatrix_fate(p_template.with_r(mid), Side::Plus, tol, t_max));
        if (wm == wlo)
            lo = mid;
        else
            hi = mid;
        out.history.emplace_back(lo, hi);
    }
    out.last_interval = {lo, hi};
    if (out.monotone) out.estimate = 0.5 * (lo + hi);
    return out;
}

}  // namespace lorenz
