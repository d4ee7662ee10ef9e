#pragma once

#include <array>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "lorenz/params.hpp"

namespace lorenz {

using Complex = std::complex<double>;

enum class EquilibriumType {
    StableNode,
    StableFocusNode,
    TripleDegenerate,
    SaddleIndex1,
    UnstableSaddleFocus,
    Marginal,
};

std::string to_string(EquilibriumType t);

struct Equilibrium {
    std::string name;  // "O", "O1" or "O2"
    State location;
    std::array<Complex, 3> eigenvalues;  // sorted by descending real part
    EquilibriumType type = EquilibriumType::Marginal;

    double max_real_part() const { return eigenvalues[0].real(); }
    bool stable() const {
        return type == EquilibriumType::StableNode || type == EquilibriumType::StableFocusNode;
    }
};

/// Roots of x^3 + a2 x^2 + a1 x + a0 by the trigonometric / Cardano formulas.
/// A scaled discriminant within 1e-12 of zero is treated as a repeated root.
std::array<Complex, 3> solve_monic_cubic(double a2, double a1, double a0);

/// Eigenvalues of a 3x3 matrix through its characteristic polynomial.
std::array<Complex, 3> eigenvalues_3x3(const Mat3& m);

/// Origin for r <= 1; origin, O1, O2 for r > 1. All classified.
std::vector<Equilibrium> equilibria(const LorenzParams& p);

/// Recompute spectrum and label of a point that must be an equilibrium of p.
Equilibrium classify(const LorenzParams& p, const Equilibrium& e);

/// Closed-form Hopf value sigma (sigma + b + 3) / (sigma - b - 1) of O1 and O2.
double hopf_threshold(double sigma, double b);

/// Bisection on the largest real part of O1's spectrum over r. Converges to
/// |dr| < 1e-9; throws BracketError if the sign does not change.
double find_hopf_numeric(double sigma, double b, std::pair<double, double> bracket);

}  // namespace lorenz
