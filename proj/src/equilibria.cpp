#include "lorenz/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lorenz/dynamics.hpp"

namespace lorenz {

std::string to_string(EquilibriumType t) {
    switch (t) {
        case EquilibriumType::StableNode: return "stable-node";
        case EquilibriumType::StableFocusNode: return "stable-focus-node";
        case EquilibriumType::TripleDegenerate: return "triple-degenerate";
        case EquilibriumType::SaddleIndex1: return "saddle-index-1";
        case EquilibriumType::UnstableSaddleFocus: return "unstable-saddle-focus";
        case EquilibriumType::Marginal: return "marginal";
    }
    return "marginal";
}

namespace {

constexpr double kDiscriminantTol = 1e-12;

double polish(double x, double a2, double a1, double a0) {
    for (int i = 0; i < 2; ++i) {
        const double f = ((x + a2) * x + a1) * x + a0;
        const double df = (3.0 * x + 2.0 * a2) * x + a1;
        if (df == 0.0) break;
        const double nx = x - f / df;
        if (!std::isfinite(nx)) break;
        x = nx;
    }
    return x;
}

}  // namespace

std::array<Complex, 3> solve_monic_cubic(double a2, double a1, double a0) {
    const double shift = a2 / 3.0;
    const double p = a1 - a2 * a2 / 3.0;
    const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const double hq = 0.5 * q;
    const double tp = p / 3.0;
    const double disc = hq * hq + tp * tp * tp;
    const double scale = hq * hq + std::abs(tp * tp * tp);

    std::array<Complex, 3> roots;
    if (scale == 0.0 || std::abs(disc) <= kDiscriminantTol * scale) {
        if (std::abs(p) <= 1e-14 * (1.0 + a2 * a2)) {
            roots = {Complex(-shift), Complex(-shift), Complex(-shift)};
        } else {
            const double single = 3.0 * q / p;
            const double twice = -1.5 * q / p;
            roots = {Complex(polish(single - shift, a2, a1, a0)), Complex(twice - shift),
                     Complex(twice - shift)};
        }
    } else if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(-hq + sq);
        const double v = std::cbrt(-hq - sq);
        const double real_root = polish(u + v - shift, a2, a1, a0);
        // The pair follows from the trace and product so that the sum of
        // the three roots is -a2 to rounding.
        const double re = -0.5 * (a2 + real_root);
        const double prod = real_root != 0.0 ? -a0 / real_root : re * re + 0.75 * (u - v) * (u - v);
        const double im2 = prod - re * re;
        const double im = im2 > 0.0 ? std::sqrt(im2) : 0.5 * std::numbers::sqrt3 * std::abs(u - v);
        roots = {Complex(real_root), Complex(re, im), Complex(re, -im)};
    } else {
        const double m = 2.0 * std::sqrt(-tp);
        const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double t = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
            roots[k] = Complex(polish(t - shift, a2, a1, a0));
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return roots;
}

std::array<Complex, 3> eigenvalues_3x3(const Mat3& m) {
    const double tr = m.trace();
    const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                          m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                       m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                       m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    return solve_monic_cubic(-tr, minors, -det);
}

namespace {

EquilibriumType label(const std::array<Complex, 3>& ev, bool at_origin) {
    double scale = 1.0;
    for (const auto& v : ev) scale = std::max(scale, std::abs(v));
    const double zero_tol = 1e-10 * scale;
    int pos = 0, zero = 0;
    bool complex_pair = false;
    for (const auto& v : ev) {
        if (std::abs(v.real()) <= zero_tol)
            ++zero;
        else if (v.real() > 0.0)
            ++pos;
        if (std::abs(v.imag()) > zero_tol) complex_pair = true;
    }
    if (zero > 0) {
        // A zero eigenvalue at the origin marks the collision of O, O1 and O2.
        const bool real_zero = std::any_of(ev.begin(), ev.end(), [&](const Complex& v) {
            return std::abs(v) <= zero_tol;
        });
        return (at_origin && real_zero) ? EquilibriumType::TripleDegenerate
                                        : EquilibriumType::Marginal;
    }
    if (pos == 0) return complex_pair ? EquilibriumType::StableFocusNode : EquilibriumType::StableNode;
    if (pos == 1 && !complex_pair) return EquilibriumType::SaddleIndex1;
    if (pos == 2 && complex_pair) return EquilibriumType::UnstableSaddleFocus;
    return EquilibriumType::Marginal;
}

Equilibrium make(const LorenzParams& p, std::string name, const State& loc) {
    Equilibrium e;
    e.name = std::move(name);
    e.location = loc;
    e.eigenvalues = eigenvalues_3x3(jacobian(p, loc));
    e.type = label(e.eigenvalues, loc.norm() == 0.0);
    return e;
}

}  // namespace

std::vector<Equilibrium> equilibria(const LorenzParams& p) {
    p.validate();
    std::vector<Equilibrium> out;
    out.push_back(make(p, "O", State::Zero()));
    if (p.r > 1.0) {
        const double c = std::sqrt(p.b * (p.r - 1.0));
        const State o1(c, c, p.r - 1.0);
        out.push_back(make(p, "O1", o1));
        out.push_back(make(p, "O2", reflect(o1)));
    }
    return out;
}

Equilibrium classify(const LorenzParams& p, const Equilibrium& e) {
    p.validate();
    const State f = vector_field(p, e.location);
    if (f.norm() > 1e-8 * (1.0 + e.location.squaredNorm())) {
        std::ostringstream os;
        os << "point is not an equilibrium of " << to_string(p) << " (|f| = " << f.norm() << ")";
        throw DomainError(os.str());
    }
    return make(p, e.name, e.location);
}

double hopf_threshold(double sigma, double b) {
    const double den = sigma - b - 1.0;
    if (!(den > 0.0))
        throw DomainError("no Hopf threshold: sigma - b - 1 must be positive");
    return sigma * (sigma + b + 3.0) / den;
}

namespace {

double o1_growth(double sigma, double b, double r) {
    const LorenzParams p{sigma, b, r};
    const double c = std::sqrt(b * (r - 1.0));
    return eigenvalues_3x3(jacobian(p, State(c, c, r - 1.0)))[0].real();
}

}  // namespace

double find_hopf_numeric(double sigma, double b, std::pair<double, double> bracket) {
    LorenzParams{sigma, b, bracket.first}.validate();
    auto [lo, hi] = bracket;
    if (lo > hi) std::swap(lo, hi);
    if (!(lo > 1.0)) throw BracketError("Hopf bracket must lie in r > 1");
    double glo = o1_growth(sigma, b, lo);
    const double ghi = o1_growth(sigma, b, hi);
    if ((glo < 0.0) == (ghi < 0.0))
        throw BracketError("largest real part of O1's spectrum has no sign change in bracket");
    while (hi - lo >= 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = o1_growth(sigma, b, mid);
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace lorenz
