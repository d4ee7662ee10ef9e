#pragma once

// Dormand-Prince 5(4) with Hairer's free 4th-order continuous extension.
// Templated on the state dimension so the same stepper drives the bare
// field, the field plus its tangent map, and the Lyapunov frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>

#include "lorenz/error.hpp"
#include "lorenz/params.hpp"

namespace lorenz {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

/// Continuous extension of one accepted step on [t0, t0 + h].
template <int N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Vec<N>, 5> coeff;

    double t1() const { return t0 + h; }
    const Vec<N>& start() const { return coeff[0]; }
    Vec<N> end() const { return coeff[0] + coeff[1]; }

    Vec<N> eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return coeff[0] +
               th * (coeff[1] + th1 * (coeff[2] + th * (coeff[3] + th1 * coeff[4])));
    }
};

namespace dp {
// Butcher tableau.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

/// Result of a single trial step.
template <int N>
struct TrialStep {
    Vec<N> y1;
    Vec<N> k7;  // field at y1 (first stage of the next step)
    double err = 0.0;
    std::array<Vec<N>, 7> k;
};

/// One Dormand-Prince step of size h from y0 with k1 = f(y0). Autonomous
/// fields only.
template <int N, class Field>
TrialStep<N> dopri_trial(const Field& f, const Vec<N>& y0, const Vec<N>& k1, double h,
                         double rtol, double atol) {
    using namespace dp;
    TrialStep<N> out;
    auto& k = out.k;
    k[0] = k1;
    k[1] = f(Vec<N>(y0 + h * a21 * k[0]));
    k[2] = f(Vec<N>(y0 + h * (a31 * k[0] + a32 * k[1])));
    k[3] = f(Vec<N>(y0 + h * (a41 * k[0] + a42 * k[1] + a43 * k[2])));
    k[4] = f(Vec<N>(y0 + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3])));
    k[5] = f(Vec<N>(y0 + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4])));
    out.y1 = y0 + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] + a75 * k[4] + a76 * k[5]);
    k[6] = f(out.y1);
    out.k7 = k[6];
    const Vec<N> e =
        h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(out.y1[i]));
        const double q = e[i] / sk;
        sum += q * q;
    }
    out.err = std::sqrt(sum / N);
    return out;
}

/// Single step of exactly size h, no error control. Used to refine event
/// locations so the crossing state carries full 5th-order accuracy.
template <int N, class Field>
Vec<N> dopri_exact_step(const Field& f, const Vec<N>& y0, double h) {
    if (h == 0.0) return y0;
    return dopri_trial<N>(f, y0, f(y0), h, 1.0, 1.0).y1;
}

/// Adaptive Dormand-Prince integrator. Each call to step() advances by one
/// accepted step (rejected trials are retried internally) and exposes the
/// dense output of that step.
template <int N, class Field>
class Dopri5 {
public:
    Dopri5(Field f, const Vec<N>& y0, double t0, const ToleranceSpec& tol)
        : f_(std::move(f)), y_(y0), t_(t0), tol_(tol) {
        tol_.validate();
        if (!y_.allFinite()) fail("non-finite initial state");
        k1_ = f_(y_);
        h_ = initial_step();
    }

    double t() const { return t_; }
    const Vec<N>& y() const { return y_; }
    const DenseStep<N>& last() const { return dense_; }
    std::size_t accepted() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }
    const Field& field() const { return f_; }

    /// Replace the current state (e.g. after renormalizing tangent vectors).
    void reset_state(const Vec<N>& y) {
        y_ = y;
        k1_ = f_(y_);
    }

    /// Advance by one accepted step without passing t_stop.
    const DenseStep<N>& step(double t_stop) {
        if (t_stop <= t_) fail("step requested past stop time");
        bool last_rejected = false;
        for (;;) {
            double h = std::min(h_, tol_.max_step);
            bool clipped = false;
            if (t_ + h >= t_stop) {
                h = t_stop - t_;
                clipped = true;
            }
            if (h < 1e-14 * std::max(1.0, std::abs(t_))) fail("step size underflow");

            TrialStep<N> trial = dopri_trial<N>(f_, y_, k1_, h, tol_.rel, tol_.abs);
            if (!std::isfinite(trial.err) || !trial.y1.allFinite()) {
                ++rejected_;
                h_ = 0.1 * h;
                last_rejected = true;
                continue;
            }
            const double err = trial.err;
            const double fac11 = std::pow(std::max(err, 1e-300), kExpo1);
            if (err <= 1.0) {
                double fac = fac11 / std::pow(facold_, kBeta);
                fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
                double hnew = h / fac;
                if (last_rejected) hnew = std::min(hnew, h);
                facold_ = std::max(err, 1e-4);

                build_dense(trial, h);
                t_ = clipped ? t_stop : t_ + h;
                y_ = trial.y1;
                k1_ = trial.k7;
                ++accepted_;
                // A clipped step says nothing about the natural step size.
                if (!clipped || hnew < h_) h_ = hnew;
                if (y_.template head<3>().norm() > kBlowup) fail("state norm exceeded blow-up bound");
                return dense_;
            }
            ++rejected_;
            last_rejected = true;
            h_ = h / std::min(1.0 / kFacMin, fac11 / kSafe);
        }
    }

    /// Integrate to exactly t_end.
    void advance_to(double t_end) {
        while (t_ < t_end) step(t_end);
    }

private:
    static constexpr double kBeta = 0.04;
    static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
    static constexpr double kSafe = 0.9;
    static constexpr double kFacMin = 0.2;
    static constexpr double kFacMax = 10.0;
    static constexpr double kBlowup = 1e12;

    [[noreturn]] void fail(const char* what) const {
        State s = y_.template head<3>();
        throw IntegrationError(what, t_, s);
    }

    double weighted_norm(const Vec<N>& v, const Vec<N>& ref) const {
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sk = tol_.abs + tol_.rel * std::abs(ref[i]);
            sum += (v[i] / sk) * (v[i] / sk);
        }
        return std::sqrt(sum / N);
    }

    double initial_step() const {
        const double d0 = weighted_norm(y_, y_);
        const double d1 = weighted_norm(k1_, y_);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, tol_.max_step);
        const Vec<N> y1 = y_ + h0 * k1_;
        const Vec<N> f1 = f_(y1);
        const double d2 = weighted_norm(Vec<N>(f1 - k1_), y_) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, tol_.max_step});
    }

    void build_dense(const TrialStep<N>& s, double h) {
        using namespace dp;
        const auto& k = s.k;
        dense_.t0 = t_;
        dense_.h = h;
        dense_.coeff[0] = y_;
        dense_.coeff[1] = s.y1 - y_;
        dense_.coeff[2] = h * k[0] - dense_.coeff[1];
        dense_.coeff[3] = dense_.coeff[1] - h * k[6] - dense_.coeff[2];
        dense_.coeff[4] =
            h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] + d6 * k[5] + d7 * k[6]);
    }

    Field f_;
    Vec<N> y_;
    Vec<N> k1_;
    double t_;
    double h_ = 0.0;
    double facold_ = 1e-4;
    ToleranceSpec tol_;
    DenseStep<N> dense_;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

}  // namespace lorenz
