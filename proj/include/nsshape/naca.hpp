#pragma once

/// NACA 4-digit symmetric thickness geometry (NACA0012 by default) with a
/// smooth angle parameterization of the closed surface curve.

#include "nsshape/common.hpp"

#include <array>
#include <cmath>

namespace nsshape {

struct AirfoilGeometry {
    double chord = 1.0;
    /// coefficients of y_t(x)/(5 t): sqrt(x), x, x^2, x^3, x^4
    std::array<double, 5> half_thickness_coeffs{0.2969, -0.1260, -0.3516, 0.2843, -0.1015};
    double thickness = 0.12; ///< max thickness ratio t
    bool closed_te = true;

    static AirfoilGeometry naca0012(bool closed_te = true) {
        AirfoilGeometry a;
        a.thickness = 0.12;
        a.closed_te = closed_te;
        if (closed_te) {
            // adjust the quartic coefficient so the thickness closes at x = chord
            auto& c = a.half_thickness_coeffs;
            c[4] = -(c[0] + c[1] + c[2] + c[3]);
        }
        return a;
    }

    /// Half thickness at chordwise position x in [0, chord].
    double half_thickness(double x) const {
        const double xc = x / chord;
        const double s = std::sqrt(xc);
        const auto& c = half_thickness_coeffs;
        return 5.0 * thickness * chord *
               (c[0] * s + xc * (c[1] + xc * (c[2] + xc * (c[3] + xc * c[4]))));
    }

    /// Surface point from the angle parameter phi in [0, 2pi):
    /// x = chord/2 (1 + cos phi), upper surface for phi in (0, pi).
    /// The sqrt(x) leading-edge singularity is smooth in phi.
    Vec2 surface_point(double phi) const {
        const double x = 0.5 * chord * (1.0 + std::cos(phi));
        const double y = half_thickness(x) * (std::sin(phi) >= 0.0 ? 1.0 : -1.0);
        return Vec2(x, y);
    }
};

} // namespace nsshape
