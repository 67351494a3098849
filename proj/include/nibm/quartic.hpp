#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "nibm/model.hpp"

namespace nibm {

using cplx = std::complex<double>;

/// The quartic spectral curve in xi, with coefficients rational in z:
///   xi^4 + c3(z) xi^3 + c2(z) xi^2 + c1(z) xi + c0(z) = 0.
struct SpectralCurve {
    ModelParams params;

    explicit SpectralCurve(const ModelParams& p) : params(p) {}

    cplx c3(cplx z) const { return -2.0 * z / params.s2(); }
    cplx c2(cplx z) const {
        const double t = params.t, a = params.a, b = params.b;
        const double s = params.s2();
        return z * z / (s * s) - a * a / (t * t) - b * b / ((1 - t) * (1 - t)) + 1.0 / s;
    }
    cplx c1(cplx z) const {
        const double t = params.t, b = params.b;
        return (2.0 * b * b / (t * (1 - t) * (1 - t) * (1 - t)) -
                1.0 / (t * t * (1 - t) * (1 - t))) * z;
    }
    cplx c0(cplx z) const {
        const double t = params.t, b = params.b;
        const double u = 1 - t;
        return -b * b * z * z / (t * t * u * u * u * u);
    }

    std::array<cplx, 5> coefficients(cplx z) const {
        return {cplx(1.0), c3(z), c2(z), c1(z), c0(z)};
    }

    cplx eval(cplx z, cplx xi) const {
        // Horner on the monic quartic
        cplx r = xi + c3(z);
        r = r * xi + c2(z);
        r = r * xi + c1(z);
        return r * xi + c0(z);
    }

    /// Residual relative to the magnitude of the largest term.
    double relative_residual(cplx z, cplx xi) const {
        const cplx x2 = xi * xi;
        double scale = std::abs(x2 * x2);
        scale = std::max(scale, std::abs(c3(z) * xi * x2));
        scale = std::max(scale, std::abs(c2(z) * x2));
        scale = std::max(scale, std::abs(c1(z) * xi));
        scale = std::max(scale, std::abs(c0(z)));
        if (scale == 0.0) return std::abs(eval(z, xi));
        return std::abs(eval(z, xi)) / scale;
    }

    // Vieta invariants used as cheap cross-checks everywhere.
    cplx vieta_sum(cplx z) const { return -c3(z); }
    cplx vieta_product(cplx z) const { return c0(z); }

    /// Factored evaluation P = xi^2 u^2 - (a/t)^2 xi^2 + xi u / (t(1-t))
    /// - (b/(1-t))^2 u^2 with u = xi - z/(t(1-t)). Equivalent to the monic
    /// expansion but free of the z^4-scale cancellations, which makes the two
    /// linear-growth branches polishable to machine accuracy at any |z|.
    cplx eval_factored(cplx z, cplx xi, double* magnitude = nullptr) const {
        const double t = params.t, a = params.a, b = params.b;
        const cplx u = xi - z / params.s2();
        const double ca = (a / t) * (a / t);
        const double cb = (b / (1 - t)) * (b / (1 - t));
        const cplx xu = xi * u;
        if (magnitude)
            *magnitude = std::norm(xu) + ca * std::norm(xi) + std::abs(xu) / params.s2() +
                         cb * std::norm(u);
        return xu * xu - ca * xi * xi + xu / params.s2() - cb * u * u;
    }

    cplx eval_factored_dxi(cplx z, cplx xi) const {
        const double t = params.t, a = params.a, b = params.b;
        const cplx u = xi - z / params.s2();
        const double ca = (a / t) * (a / t);
        const double cb = (b / (1 - t)) * (b / (1 - t));
        return 2.0 * xi * u * (u + xi) - 2.0 * ca * xi + (u + xi) / params.s2() -
               2.0 * cb * u;
    }

    /// Attainable double-precision uncertainty of a computed root: factored
    /// evaluation noise divided by |P_xi|. Grows near branch points.
    double root_noise(cplx z, cplx xi) const {
        double mag = 0.0;
        (void)eval_factored(z, xi, &mag);
        const double d = std::abs(eval_factored_dxi(z, xi));
        if (d == 0.0) return std::abs(xi);
        return 8.0 * 2.2e-16 * mag / d;
    }

    /// Implicit derivative d(xi)/dz = -P_z / P_xi along a branch. Returns
    /// false when the branch is too close to a branch point (P_xi ~ 0).
    bool xi_derivative(cplx z, cplx xi, cplx& dxi) const {
        const double t = params.t, b = params.b;
        const double s = params.s2();
        const cplx dc3 = cplx(-2.0 / s);
        const cplx dc2 = 2.0 * z / (s * s);
        const cplx dc1 = 2.0 * b * b / (t * (1 - t) * (1 - t) * (1 - t)) -
                         1.0 / (t * t * (1 - t) * (1 - t));
        const cplx dc0 = -2.0 * b * b * z / (t * t * (1 - t) * (1 - t) * (1 - t) * (1 - t));
        const cplx pz = ((dc3 * xi + dc2) * xi + dc1) * xi + dc0;
        const cplx pxi = ((4.0 * xi + 3.0 * c3(z)) * xi + 2.0 * c2(z)) * xi + c1(z);
        const double scale = std::max({std::abs(xi), std::abs(c3(z)), 1.0});
        if (std::abs(pxi) < 1e-12 * scale * scale * scale) return false;
        dxi = -pz / pxi;
        return true;
    }
};

namespace detail_quartic {

inline std::array<cplx, 4> companion_eigenvalues(const std::array<cplx, 5>& c) {
    // rescale the variable so the companion entries are O(1); raw coefficients
    // can span many orders of magnitude, which defeats the QR iteration
    double sigma = 1.0;
    for (int k = 1; k <= 4; ++k)
        sigma = std::max(sigma, std::pow(std::abs(c[k]), 1.0 / k));
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(1, 0) = m(2, 1) = m(3, 2) = 1.0;
    m(0, 3) = -c[4] / (sigma * sigma * sigma * sigma);
    m(1, 3) = -c[3] / (sigma * sigma * sigma);
    m(2, 3) = -c[2] / (sigma * sigma);
    m(3, 3) = -c[1] / sigma;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalError("solve_monic_quartic: eigenvalue iteration failed");
    std::array<cplx, 4> r;
    for (int i = 0; i < 4; ++i) r[i] = sigma * es.eigenvalues()(i);
    return r;
}

// Newton-polish to the evaluation noise floor; relative residual returned.
inline double polish(const std::array<cplx, 5>& c, cplx& x) {
    double rel = 0.0;
    for (int it = 0; it < 8; ++it) {
        const double ax = std::abs(x);
        const cplx p = (((x + c[1]) * x + c[2]) * x + c[3]) * x + c[4];
        const double mag =
            ((((ax + std::abs(c[1])) * ax + std::abs(c[2])) * ax + std::abs(c[3])) * ax +
             std::abs(c[4]));
        rel = mag > 0 ? std::abs(p) / mag : std::abs(p);
        if (std::abs(p) <= 8.0 * 2.2e-16 * mag) break;
        const cplx dp = ((4.0 * x + 3.0 * c[1]) * x + 2.0 * c[2]) * x + c[3];
        if (std::abs(dp) == 0.0) break;
        const cplx step = p / dp;
        if (!(std::abs(step) < 0.5 * (1.0 + ax))) break;
        x -= step;
        if (std::abs(step) <= 4.0 * 2.2e-16 * (1.0 + std::abs(x))) break;
    }
    return rel;
}

} // namespace detail_quartic

/// All four roots of a monic quartic via companion-matrix eigenvalues plus
/// Newton polish. Unordered. When the magnitudes split into far-apart groups
/// the companion QR can return the small roots at the level of its absolute
/// noise; candidates from the reciprocal polynomial (where small roots are
/// the dominant ones) then fill in, picked by polished residual.
inline std::array<cplx, 4> solve_monic_quartic(const std::array<cplx, 5>& c) {
    auto roots = detail_quartic::companion_eigenvalues(c);
    double worst = 0.0;
    std::array<double, 8> resid{};
    for (int i = 0; i < 4; ++i) {
        resid[i] = detail_quartic::polish(c, roots[i]);
        worst = std::max(worst, resid[i]);
    }
    if (worst <= 1e-8 || std::abs(c[4]) == 0.0) return roots;

    const std::array<cplx, 5> rev = {cplx(1.0), c[3] / c[4], c[2] / c[4], c[1] / c[4],
                                     cplx(1.0) / c[4]};
    std::array<cplx, 8> cand;
    for (int i = 0; i < 4; ++i) cand[i] = roots[i];
    auto eta = detail_quartic::companion_eigenvalues(rev);
    for (int i = 0; i < 4; ++i) {
        cand[4 + i] = 1.0 / eta[i];
        resid[4 + i] = detail_quartic::polish(c, cand[4 + i]);
    }
    std::array<int, 8> order = {0, 1, 2, 3, 4, 5, 6, 7};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return resid[a] < resid[b]; });
    // greedy non-duplicate pick; the fallback only fires on magnitude-split
    // configurations, where distinct roots are far apart relatively
    std::array<cplx, 4> picked{};
    int taken = 0;
    for (int idx : order) {
        if (taken == 4) break;
        bool dup = false;
        for (int j = 0; j < taken; ++j)
            if (std::abs(cand[idx] - picked[j]) <=
                1e-7 * (std::abs(cand[idx]) + std::abs(picked[j])))
                dup = true;
        if (!dup) picked[taken++] = cand[idx];
    }
    for (int idx : order) {
        if (taken == 4) break;
        picked[taken++] = cand[idx]; // degenerate input: admit duplicates
    }
    // a root can be unreachable from both companions (three magnitude groups);
    // the complement of the three best picks recovers it through Vieta
    std::sort(picked.begin(), picked.end(), [&](cplx a, cplx b) {
        cplx ta = a, tb = b;
        return detail_quartic::polish(c, ta) < detail_quartic::polish(c, tb);
    });
    cplx last = picked[3];
    if (detail_quartic::polish(c, last) > 1e-8) {
        cplx by_sum = -c[1] - picked[0] - picked[1] - picked[2];
        cplx by_prod = picked[0] * picked[1] * picked[2];
        by_prod = std::abs(by_prod) > 0 ? c[4] / by_prod : by_sum;
        const double r_sum = detail_quartic::polish(c, by_sum);
        const double r_prod = detail_quartic::polish(c, by_prod);
        picked[3] = r_sum <= r_prod ? by_sum : by_prod;
    }
    return picked;
}

inline std::array<cplx, 4> curve_roots(const SpectralCurve& curve, cplx z) {
    auto roots = solve_monic_quartic(curve.coefficients(z));
    // polish in the factored form, whose evaluation noise does not blow up
    // with |z|
    for (auto& x : roots) {
        for (int it = 0; it < 3; ++it) {
            double mag = 0.0;
            const cplx p = curve.eval_factored(z, x, &mag);
            if (std::abs(p) <= 8.0 * 2.2e-16 * mag) break;
            const cplx dp = curve.eval_factored_dxi(z, x);
            if (std::abs(dp) == 0.0) break;
            const cplx step = p / dp;
            if (!(std::abs(step) < 0.1 * (1.0 + std::abs(x)))) break;
            x -= step;
        }
    }
    return roots;
}

/// Real roots of a real cubic a3 x^3 + a2 x^2 + a1 x + a0 with a3 != 0.
/// Uses the trigonometric form when all roots are real (nonnegative
/// discriminant) and Cardano otherwise; in the latter case only the single
/// real root is returned unless the complex pair is within imag_tol of real.
/// pair_imag, when given, receives the imaginary magnitude of that pair.
inline std::array<double, 3> solve_cubic_real(double a3, double a2, double a1, double a0,
                                              int& n_real, double imag_tol = 0.0,
                                              double* pair_imag = nullptr) {
    if (pair_imag) *pair_imag = 0.0;
    // depressed cubic y^3 + p y + q, x = y - a2/(3 a3)
    const double inv = 1.0 / a3;
    const double b2 = a2 * inv, b1 = a1 * inv, b0 = a0 * inv;
    const double shift = b2 / 3.0;
    const double p = b1 - b2 * b2 / 3.0;
    const double q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;

    std::array<double, 3> roots{0.0, 0.0, 0.0};
    if (disc >= 0.0 && p < 0.0) {
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots[k] = m * std::cos(theta - 2.0 * M_PI * k / 3.0) - shift;
        n_real = 3;
        return roots;
    }
    // Cardano
    const double half_q = q / 2.0, third_p = p / 3.0;
    const double inner = half_q * half_q + third_p * third_p * third_p;
    if (inner >= 0.0) {
        const double s = std::sqrt(inner);
        const double u = std::cbrt(-half_q + s);
        const double v = std::cbrt(-half_q - s);
        roots[0] = u + v - shift;
        // complex pair: real part -(u+v)/2, imag sqrt(3)/2 (u-v)
        const double im = std::sqrt(3.0) / 2.0 * std::abs(u - v);
        if (pair_imag) *pair_imag = im;
        roots[1] = roots[2] = -(u + v) / 2.0 - shift;
        n_real = im <= imag_tol ? 3 : 1;
        return roots;
    }
    // disc >= 0 but p >= 0 can only happen with p = q = 0 (triple root)
    roots[0] = roots[1] = roots[2] = -shift;
    n_real = 3;
    return roots;
}

} // namespace nibm
