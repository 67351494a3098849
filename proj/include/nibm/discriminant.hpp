#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nibm/model.hpp"
#include "nibm/quartic.hpp"

namespace nibm {

/// Coefficients of the reduced sextic a3 z^6 + a2 z^4 + a1 z^2 + a0 = 0 whose
/// roots are the branch points of the spectral curve, written as the cubic
/// p1(x) = a3 x^3 + a2 x^2 + a1 x + a0 in x = z^2.
///
/// a3 and a0 have compact closed forms; a2 and a1 below were regenerated by
/// expanding the quartic's discriminant with a computer-algebra system and are
/// pinned by three factorization identities in the test suite (t -> 0,
/// t = a/(a+b), and a0 = 0 exactly at the critical times).
struct DiscriminantData {
    double a3 = 0.0, a2 = 0.0, a1 = 0.0, a0 = 0.0;

    double p1(double x) const { return ((a3 * x + a2) * x + a1) * x + a0; }
    double scale() const {
        return std::max({std::abs(a3), std::abs(a2), std::abs(a1), std::abs(a0)});
    }
};

inline DiscriminantData discriminant_coefficients(const ModelParams& params) {
    const double a = params.a, b = params.b, t = params.t;
    const double a2_ = a * a, b2_ = b * b;
    const double a4 = a2_ * a2_, b4 = b2_ * b2_;
    const double a6 = a4 * a2_, b6 = b4 * b2_;

    DiscriminantData d;
    d.a3 = 16.0 * a2_ * b2_;

    d.a2 = (-48.0 * a4 * b2_ - 48.0 * a2_ * b4 + 96.0 * a2_ * b2_ + 4.0 * a2_ + 4.0 * b2_) * t * t +
           (96.0 * a4 * b2_ - 96.0 * a2_ * b2_ - 8.0 * a2_) * t +
           (-48.0 * a4 * b2_ + 4.0 * a2_);

    d.a1 = (48.0 * a6 * b2_ - 336.0 * a4 * b4 - 48.0 * a4 * b2_ - 8.0 * a4 +
            48.0 * a2_ * b6 - 48.0 * a2_ * b4 + 104.0 * a2_ * b2_ + 20.0 * a2_ -
            8.0 * b4 + 20.0 * b2_ + 1.0) * t * t * t * t +
           (-192.0 * a6 * b2_ + 672.0 * a4 * b4 + 144.0 * a4 * b2_ + 32.0 * a4 +
            48.0 * a2_ * b4 - 208.0 * a2_ * b2_ - 60.0 * a2_ - 20.0 * b2_ - 2.0) * t * t * t +
           (288.0 * a6 * b2_ - 336.0 * a4 * b4 - 144.0 * a4 * b2_ - 48.0 * a4 +
            104.0 * a2_ * b2_ + 60.0 * a2_ + 1.0) * t * t +
           (-192.0 * a6 * b2_ + 48.0 * a4 * b2_ + 32.0 * a4 - 20.0 * a2_) * t +
           (48.0 * a6 * b2_ - 8.0 * a4);

    const double crit = a2_ * (1 - t) * (1 - t) + b2_ * t * t - t * (1 - t);
    d.a0 = 4.0 * (1.0 - 4.0 * a2_ * b2_) * crit * crit * crit;
    return d;
}

/// Branch points z1, z2, z3 of the curve together with the regime of t.
/// TwoCuts: real pairs +-z1, +-z2 (z1 > z2 > 0) and one imaginary pair +-i z3.
/// OneCut: one real pair +-z1 and imaginary pairs +-i z2, +-i z3 (z3 >= z2).
struct BranchPointSet {
    double z1 = 0.0, z2 = 0.0, z3 = 0.0;
    Regime regime = Regime::TwoCuts;
    double t_c1 = 0.0, t_c2 = 0.0;

    int n_real_roots() const { return regime == Regime::TwoCuts ? 4 : 2; }
    int n_imag_roots() const { return regime == Regime::TwoCuts ? 2 : 4; }
};

inline BranchPointSet branch_points(const ModelParams& params) {
    if (params.separation == Separation::Sub) {
        if (std::abs(params.t - params.t_c1) <= params.tol.critical ||
            std::abs(params.t - params.t_c2) <= params.tol.critical)
            throw CriticalTimeError("branch_points: t within tolerance of a critical time");
    }
    const DiscriminantData d = discriminant_coefficients(params);
    int n_real = 0;
    double pair_imag = 0.0;
    auto roots =
        solve_cubic_real(d.a3, d.a2, d.a1, d.a0, n_real, params.tol.classify, &pair_imag);
    if (n_real != 3) {
        // roundoff can push the double root at t = a/(a+b) slightly complex;
        // a pair tiny relative to its own magnitude is still a real pair
        const double rel_floor = 1e-5 * (std::abs(roots[1]) + std::cbrt(d.scale() / d.a3));
        if (pair_imag <= rel_floor) {
            n_real = 3;
        } else if (params.separation == Separation::Super) {
            // above the critical separation the all-real/imaginary dichotomy
            // genuinely fails: four branch points move off the axes. Only the
            // real pair +-z1 is reported; everything downstream is the
            // unvalidated experimental branch.
            BranchPointSet bp;
            if (roots[0] <= 0.0)
                throw ClassificationError("branch_points: no real edge found for the "
                                          "super-critical separation");
            bp.z1 = std::sqrt(roots[0]);
            const cplx off(roots[1], pair_imag);
            bp.z2 = bp.z3 = std::abs(std::sqrt(off));
            bp.regime = Regime::OneCut;
            return bp;
        } else {
            throw ClassificationError(
                "branch_points: cubic p1 produced a genuinely complex pair; "
                "this signals numerical trouble, not a regime change");
        }
    }
    std::vector<double> pos, neg;
    for (double x : roots)
        (x > 0.0 ? pos : neg).push_back(x);

    BranchPointSet bp;
    if (params.separation == Separation::Sub) {
        bp.t_c1 = params.t_c1;
        bp.t_c2 = params.t_c2;
    }
    Regime expected = params.regime();
    if (params.separation == Separation::Super)
        expected = pos.size() == 2 ? Regime::TwoCuts : Regime::OneCut; // experimental
    if (expected == Regime::TwoCuts) {
        if (pos.size() != 2 || neg.size() != 1)
            throw ClassificationError("branch_points: root sign pattern disagrees with the TwoCuts regime");
        std::sort(pos.begin(), pos.end());
        bp.z1 = std::sqrt(pos[1]);
        bp.z2 = std::sqrt(pos[0]);
        bp.z3 = std::sqrt(-neg[0]);
        bp.regime = Regime::TwoCuts;
    } else {
        if (pos.size() != 1 || neg.size() != 2)
            throw ClassificationError("branch_points: root sign pattern disagrees with the OneCut regime");
        std::sort(neg.begin(), neg.end()); // neg[0] most negative
        bp.z1 = std::sqrt(pos[0]);
        bp.z3 = std::sqrt(-neg[0]);
        bp.z2 = std::sqrt(-neg[1]);
        bp.regime = Regime::OneCut;
    }
    return bp;
}

} // namespace nibm
