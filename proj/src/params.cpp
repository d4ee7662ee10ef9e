#include "lorenz/params.hpp"

#include <sstream>

namespace lorenz {

void LorenzParams::validate() const {
    if (!std::isfinite(sigma) || !std::isfinite(b) || !std::isfinite(r))
        throw ValidationError("parameters must be finite: " + to_string(*this));
    if (sigma <= 0.0) throw ValidationError("sigma must be positive: " + to_string(*this));
    if (b <= 0.0) throw ValidationError("b must be positive: " + to_string(*this));
}

void ToleranceSpec::validate() const {
    if (!(rel > 0.0 && rel < 1.0)) throw ValidationError("relative tolerance must lie in (0, 1)");
    if (!(abs > 0.0 && abs < 1.0)) throw ValidationError("absolute tolerance must lie in (0, 1)");
    if (!(max_step > 0.0) || !std::isfinite(max_step))
        throw ValidationError("max step must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("t_max must be positive");
}

void require_finite(const State& s, const char* context) {
    if (!s.allFinite()) {
        std::ostringstream os;
        os << context << ": non-finite state (" << s.x() << ", " << s.y() << ", " << s.z() << ")";
        throw DomainError(os.str());
    }
}

std::string to_string(const LorenzParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(sigma=" << p.sigma << ", b=" << p.b << ", r=" << p.r << ")";
    return os.str();
}

}  // namespace lorenz
