#include "lorenz/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "lorenz/equilibria.hpp"
#include "lorenz/parallel.hpp"

namespace lorenz {

namespace {

struct LyapunovRun {
    LyapunovSpectrum spectrum;
    std::vector<double> z_maxima;
};

LyapunovRun run_lyapunov(const LorenzParams& p, const State& s0, double transient, double total,
                         double renorm, const ToleranceSpec& tol, int max_maxima) {
    p.validate();
    require_finite(s0, "lyapunov_spectrum");
    if (!(transient >= 0.0) || !(total > 0.0)) throw ValidationError("Lyapunov times must be positive");
    if (!(renorm >= 0.1 && renorm <= 1.0)) throw ValidationError("renormalization interval must lie in [0.1, 1]");

    State start = s0;
    if (transient > 0.0) {
        Dopri5<3, LorenzField> pre(LorenzField{p}, s0, 0.0, tol.with_t_max(transient));
        pre.advance_to(transient);
        start = pre.y();
    }

    // Coordinate axes can span invariant subspaces (the xy-plane at the
    // origin), which delays the frame's alignment; start from a generic one.
    Mat3 generic;
    generic << 0.6, -0.3, 0.7, 0.5, 0.8, -0.2, -0.4, 0.3, 0.9;
    const Mat3 frame = Eigen::HouseholderQR<Mat3>(generic).householderQ();
    const TangentField field{p};
    const ZVelocity zdot{p.b};
    Dopri5<12, TangentField> stepper(field, pack_tangent(start, frame), 0.0,
                                     tol.with_t_max(total));
    Eigen::Vector3d log_sum = Eigen::Vector3d::Zero();
    LyapunovRun run;
    double next = renorm;
    auto partial = [&](double t) {
        std::vector<double> v(3);
        for (int i = 0; i < 3; ++i) v[i] = t > 0.0 ? log_sum[i] / t : 0.0;
        return v;
    };
    try {
        while (stepper.t() < total) {
            const double stop = std::min(next, total);
            const DenseStep<12>& d = stepper.step(stop);
            if (max_maxima > 0) {
                if (auto c = locate_crossing<12>(field, d, zdot, Direction::Downward))
                    if (!c->grazing) run.z_maxima.push_back(c->y[2]);
            }
            if (stepper.t() >= stop) {
                Eigen::HouseholderQR<Mat3> qr(unpack_matrix(stepper.y()));
                Mat3 q = qr.householderQ();
                const Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
                for (int i = 0; i < 3; ++i) {
                    log_sum[i] += std::log(std::abs(r(i, i)));
                    if (r(i, i) < 0.0) q.col(i) *= -1.0;
                }
                stepper.reset_state(pack_tangent(stepper.y().head<3>(), q));
                next += renorm;
            }
        }
    } catch (const IntegrationError& e) {
        throw LyapunovError(std::string("Lyapunov integration failed: ") + e.what(),
                            partial(stepper.t()), stepper.t());
    }
    auto& sp = run.spectrum;
    for (int i = 0; i < 3; ++i) sp.exponents[i] = log_sum[i] / total;
    std::sort(sp.exponents.begin(), sp.exponents.end(), std::greater<>());
    sp.transient = transient;
    sp.total = total;
    sp.renorm = renorm;
    sp.final_state = stepper.y().head<3>();
    if (max_maxima > 0 && static_cast<int>(run.z_maxima.size()) > max_maxima)
        run.z_maxima.erase(run.z_maxima.begin(), run.z_maxima.end() - max_maxima);
    return run;
}

}  // namespace

LyapunovSpectrum lyapunov_spectrum(const LorenzParams& p, const State& s0, double transient,
                                   double total, double renorm, const ToleranceSpec& tol) {
    return run_lyapunov(p, s0, transient, total, renorm, tol, 0).spectrum;
}

std::string to_string(SweepVerdict v) {
    switch (v) {
        case SweepVerdict::FixedPoint: return "fixed-point";
        case SweepVerdict::Periodic: return "periodic";
        case SweepVerdict::Chaotic: return "chaotic";
        case SweepVerdict::Undetermined: return "undetermined";
    }
    return "undetermined";
}

std::optional<int> cluster_count(std::vector<double> values, double tol) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    int groups = 1;
    double first = values.front();
    bool tight = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] - values[i - 1] >= tol) {
            ++groups;
            first = values[i];
        } else if (values[i] - first >= tol) {
            tight = false;
        }
    }
    if (!tight) return std::nullopt;
    return groups;
}

SweepRecord sweep_point(const LorenzParams& p, const SweepSettings& s) {
    SweepRecord rec;
    rec.r = p.r;
    rec.exponents.fill(std::numeric_limits<double>::quiet_NaN());
    rec.leading_exponent = rec.exponents[0];
    try {
        LyapunovRun run = run_lyapunov(p, s.s0, s.transient, s.total, s.renorm, s.tol, s.max_maxima);
        rec.exponents = run.spectrum.exponents;
        rec.leading_exponent = rec.exponents[0];
        rec.z_maxima = std::move(run.z_maxima);

        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& e : equilibria(p))
            nearest = std::min(nearest, (e.location - run.spectrum.final_state).norm());
        const auto clusters = cluster_count(rec.z_maxima);
        if (clusters) {
            rec.n_clusters = *clusters;
        } else {
            std::vector<double> sorted = rec.z_maxima;
            std::sort(sorted.begin(), sorted.end());
            rec.n_clusters = 1;
            for (std::size_t i = 1; i < sorted.size(); ++i)
                if (sorted[i] - sorted[i - 1] >= kClusterTolerance) ++rec.n_clusters;
        }
        if (nearest < 1e-3)
            rec.verdict = SweepVerdict::FixedPoint;
        else if (clusters && *clusters >= 1 && *clusters <= kMaxClusters)
            rec.verdict = SweepVerdict::Periodic;
        else if (rec.leading_exponent > kChaosThreshold)
            rec.verdict = SweepVerdict::Chaotic;
        else
            rec.verdict = SweepVerdict::Undetermined;
    } catch (const Error& e) {
        rec.verdict = SweepVerdict::Undetermined;
        rec.error = e.what();
    }
    return rec;
}

std::vector<SweepRecord> sweep(const LorenzParams& templ, const std::vector<double>& r_grid,
                               const SweepSettings& s) {
    templ.validate();
    if (!std::is_sorted(r_grid.begin(), r_grid.end()))
        throw ValidationError("sweep grid must be sorted ascending");
    return parallel_map<SweepRecord>(r_grid.size(), [&](std::size_t i) {
        LorenzParams p = templ.with_r(r_grid[i]);
        try {
            p.validate();
        } catch (const Error& e) {
            SweepRecord rec;
            rec.r = r_grid[i];
            rec.exponents.fill(std::numeric_limits<double>::quiet_NaN());
            rec.leading_exponent = rec.exponents[0];
            rec.error = e.what();
            return rec;
        }
        return sweep_point(p, s);
    });
}

std::vector<double> make_grid(double r_from, double r_to, double step) {
    if (!(step > 0.0)) throw ValidationError("grid step must be positive");
    if (!(r_to >= r_from)) throw ValidationError("grid end must not precede its start");
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((r_to - r_from) / step * (1.0 + 1e-9) + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(r_from + i * step);
    return grid;
}

}  // namespace lorenz
