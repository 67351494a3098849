#pragma once

#include <complex>
#include <string>

#include "nibm/frame.hpp"

namespace nibm {

enum class SheetRegion { Omega1 = 1, Omega2 = 2, Omega3 = 3, Omega4 = 4, Boundary = 0 };

/// A point of the genus-zero curve in the rational parameter v, together with
/// the sheet region its z-image belongs to.
struct ParametrizationPoint {
    cplx v;
    cplx xi;
    cplx z;
    SheetRegion region = SheetRegion::Boundary;
    double residual = 0.0;
};

inline cplx param_xi(cplx v, const ModelParams& p) {
    const double a = p.a, b = p.b, t = p.t;
    return (b * v * v - v + a * a * b) / ((1.0 - t) * (a * a - v * v));
}

inline cplx param_z(cplx v, const ModelParams& p) {
    const double a = p.a, b = p.b, t = p.t;
    const cplx num = (b * v * v - v + a * a * b) *
                     ((1.0 - t) * v * v - 2.0 * t * b * v + t - (1.0 - t) * a * a);
    return num / ((2.0 * b * v - 1.0) * (v * v - a * a));
}

/// Map a parameter value to the curve and classify which sheet's z-image it
/// lies on (the image regions omega_j are exactly where the labeled branch
/// xi_j(z) equals xi(v)). Points whose z lands on the cut cross are Boundary.
inline ParametrizationPoint parametrize(cplx v, const ModelParams& params) {
    const double a = params.a, b = params.b;
    const double pole_gap = std::min({std::abs(v - a), std::abs(v + a),
                                      std::abs(v - 1.0 / (2.0 * b))});
    if (pole_gap <= params.tol.pole)
        throw PoleError("parametrize: v coincides with a pole of the parametrization");

    ParametrizationPoint out;
    out.v = v;
    out.xi = param_xi(v, params);
    out.z = param_z(v, params);
    const SpectralCurve curve(params);
    out.residual = curve.relative_residual(out.z, out.xi);

    const BranchPointSet bp = branch_points(params);
    const double tau = params.tol.bp_scale * bp.z1;
    if (detail::dist_to_cross(out.z, bp) < tau) {
        out.region = SheetRegion::Boundary;
        return out;
    }
    const XiFrame f = xi_frame(out.z, params);
    int best = 0;
    for (int j = 1; j < 4; ++j)
        if (std::abs(f.xi[j] - out.xi) < std::abs(f.xi[best] - out.xi)) best = j;
    out.region = static_cast<SheetRegion>(best + 1);
    return out;
}

} // namespace nibm
