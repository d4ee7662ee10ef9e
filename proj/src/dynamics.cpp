#include "lorenz/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace lorenz {

State vector_field(const LorenzParams& p, const State& s) {
    require_finite(s, "vector_field");
    return LorenzField{p}(s);
}

Mat3 jacobian(const LorenzParams& p, const State& s) {
    require_finite(s, "jacobian");
    Mat3 j;
    j << -p.sigma, p.sigma, 0.0,
         p.r - s.z(), -1.0, -s.x(),
         s.y(), s.x(), -p.b;
    return j;
}

State Trajectory::at(double t) const {
    if (dense.empty() || t < dense.front().t0 || t > dense.back().t1())
        throw DomainError("dense output requested outside the integrated interval");
    auto it = std::upper_bound(dense.begin(), dense.end(), t,
                               [](double v, const DenseStep<3>& d) { return v < d.t0; });
    if (it != dense.begin()) --it;
    if (t == it->t1()) return it->end();
    return it->eval(t);
}

namespace {

Trajectory run(const LorenzParams& p, const State& s0, const ToleranceSpec& tol,
               const Plane* plane, Direction direction) {
    p.validate();
    require_finite(s0, "integrate");
    tol.validate();
    if (plane && plane->normal.squaredNorm() == 0.0)
        throw ValidationError("event plane normal must be nonzero");

    Trajectory traj;
    traj.params = p;
    traj.samples.push_back({0.0, s0});
    const LorenzField field{p};
    Dopri5<3, LorenzField> stepper(field, s0, 0.0, tol);
    while (stepper.t() < tol.t_max) {
        const DenseStep<3>& d = stepper.step(tol.t_max);
        traj.dense.push_back(d);
        traj.samples.push_back({stepper.t(), stepper.y()});
        if (plane) {
            if (auto c = locate_crossing<3>(field, d, *plane, direction)) {
                if (c->grazing)
                    ++traj.grazing_events;
                else
                    traj.events.push_back({c->t, c->y, "plane"});
            }
        }
    }
    traj.accepted_steps = stepper.accepted();
    traj.rejected_steps = stepper.rejected();
    return traj;
}

}  // namespace

Trajectory integrate(const LorenzParams& p, const State& s0, const ToleranceSpec& tol) {
    return run(p, s0, tol, nullptr, Direction::Both);
}

Trajectory integrate_with_events(const LorenzParams& p, const State& s0, const ToleranceSpec& tol,
                                 const Plane& plane, Direction direction) {
    return run(p, s0, tol, &plane, direction);
}

VariationalResult integrate_variational(const LorenzParams& p, const State& s0, double T,
                                        const ToleranceSpec& tol) {
    p.validate();
    require_finite(s0, "integrate_variational");
    if (!(T > 0.0)) throw DomainError("variational horizon must be positive");
    Dopri5<12, TangentField> stepper(TangentField{p}, pack_tangent(s0, Mat3::Identity()), 0.0,
                                     tol);
    VariationalResult out;
    out.monodromy = Mat3::Identity();
    const int n = std::max(1, static_cast<int>(std::ceil(T / kTangentSegment - 1e-9)));
    for (int k = 1; k <= n; ++k) {
        const double t_seg = (k == n) ? T : T * k / n;
        stepper.advance_to(t_seg);
        const Mat3 seg = unpack_matrix(stepper.y());
        out.segments.push_back(seg);
        out.monodromy = seg * out.monodromy;
        stepper.reset_state(pack_tangent(stepper.y().head<3>(), Mat3::Identity()));
    }
    out.state = stepper.y().head<3>();
    return out;
}

double VariationalResult::determinant() const {
    double det = 1.0;
    for (const Mat3& m : segments) det *= m.determinant();
    return det;
}

}  // namespace lorenz
