#pragma once

#include <cmath>
#include <span>

#include "semilab/common.hpp"

namespace semilab {

// Radial cutoff profile: 1 on r <= 1, 0 on r >= 2, monotone in between.
// Transition branch is the exponential step exp(1 - 1/(1-(r-1)^2)); it is
// continuous with vanishing first derivative at both ends of [1,2].
inline double chi_radial(double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double s = r - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

inline double chi(std::span<const double> eta) { return chi_radial(norm2(eta)); }

}  // namespace semilab
