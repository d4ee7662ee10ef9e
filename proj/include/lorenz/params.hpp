#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "lorenz/error.hpp"

namespace lorenz {

using State = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// (sigma, b, r) of the Lorenz field. Canonical values are sigma = 10,
/// b = 8/3 with r the bifurcation parameter.
struct LorenzParams {
    double sigma = 10.0;
    double b = 8.0 / 3.0;
    double r = 28.0;

    /// Throws ValidationError unless sigma > 0, b > 0 and all are finite.
    void validate() const;

    /// Trace of the Jacobian, identical at every state.
    double divergence() const { return -(sigma + 1.0 + b); }

    LorenzParams with_r(double new_r) const { return {sigma, b, new_r}; }
};

struct ToleranceSpec {
    double rel = 1e-10;
    double abs = 1e-10;
    double max_step = 0.1;
    double t_max = 100.0;

    void validate() const;

    ToleranceSpec with_t_max(double t) const {
        ToleranceSpec copy = *this;
        copy.t_max = t;
        return copy;
    }
};

inline bool is_finite(const State& s) { return s.allFinite(); }

/// Throws DomainError when any coordinate is NaN or infinite.
void require_finite(const State& s, const char* context);

/// The z-axis reflection (x, y, z) -> (-x, -y, z) that leaves the field invariant.
inline State reflect(const State& s) { return {-s.x(), -s.y(), s.z()}; }

/// Matrix of the reflection; conjugating a tangent map by it gives the tangent
/// map of the mirrored orbit.
inline Mat3 reflection_matrix() {
    Mat3 m = Mat3::Identity();
    m(0, 0) = -1.0;
    m(1, 1) = -1.0;
    return m;
}

std::string to_string(const LorenzParams& p);

}  // namespace lorenz
