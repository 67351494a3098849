#include <doctest.h>

#include <cmath>

#include "nibm/contour.hpp"

using namespace nibm;

namespace {

double half_integer_distance(double v) {
    return std::abs(2.0 * v - std::round(2.0 * v)) / 2.0;
}

} // namespace

TEST_CASE("periods: analytic regions give zero, large circles give residues") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    auto bp = branch_points(p);

    // contour in a quadrant enclosing nothing
    const double zero = period_integral(
        1, {cplx(0.5, 0.4), cplx(1.8, 0.4), cplx(1.8, 1.4), cplx(0.5, 1.4)}, p);
    CHECK(std::abs(zero) < 1e-9);

    // the spec'd far anchor circle on the bounded sheet
    const double far = period_integral(3, circle_contour(0.0, anchor_radius(bp), 64), p);
    CHECK(far == doctest::Approx(0.5).epsilon(1e-8));

    // a circle enclosing all cuts: the four residues at infinity
    const double R = 4.0 * std::max(bp.z1, bp.z3);
    const double expected[4] = {-0.5, -0.5, 0.5, 0.5};
    for (int sheet = 1; sheet <= 4; ++sheet) {
        const double per = period_integral(sheet, circle_contour(0.0, R, 48), p);
        CHECK(per == doctest::Approx(expected[sheet - 1]).epsilon(1e-8));
    }
}

TEST_CASE("period of a circle crossing the right cut twice is zero") {
    // golden value frozen from an independent 25-digit tracked quadrature:
    // the loop closes through the cut and bounds a disk containing no poles
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    auto bp = branch_points(p);
    const double mid = 0.5 * (bp.z1 + bp.z2), r = 0.25 * (bp.z1 - bp.z2);
    const double per = period_integral(3, circle_contour(mid, r, 64), p);
    CHECK(std::abs(per - 0.0) < 1e-8);
}

TEST_CASE("periods around the cuts are half-integers in both regimes") {
    { // two separated cuts
        auto p = ModelParams::make(0.6, 0.6, 0.25);
        auto bp = branch_points(p);
        const double d = 0.45 * std::min(bp.z2, 0.5 * (bp.z1 - bp.z2));
        for (int sheet = 1; sheet <= 4; ++sheet) {
            const double per = period_integral(
                sheet, rectangle_contour(bp.z2 - d, bp.z1 + d, -d, d), p);
            CHECK(half_integer_distance(per) < 1e-6);
        }
        const double d2 = 0.45 * bp.z2;
        for (int sheet = 1; sheet <= 4; ++sheet) {
            const double per = period_integral(
                sheet, rectangle_contour(-d2, d2, -bp.z3 - d2, bp.z3 + d2), p);
            CHECK(half_integer_distance(per) < 1e-6);
        }
        // the right cut carries the mass of one group on the glued sheets
        CHECK(period_integral(1, rectangle_contour(bp.z2 - d, bp.z1 + d, -d, d), p) ==
              doctest::Approx(-0.5).epsilon(1e-6));
        CHECK(period_integral(3, rectangle_contour(bp.z2 - d, bp.z1 + d, -d, d), p) ==
              doctest::Approx(0.5).epsilon(1e-6));
    }
    { // merged support: each sheet's cuts form one connected set
        auto p = ModelParams::make(0.6, 0.6, 0.45);
        auto bp = branch_points(p);
        const double d = 0.3 * bp.z1;
        const double expected[4] = {-0.5, -0.5, 0.5, 0.5};
        for (int sheet = 1; sheet <= 4; ++sheet) {
            const double lo = (sheet == 1 || sheet == 3) ? -d : -bp.z1 - d;
            const double hi = (sheet == 1 || sheet == 3) ? bp.z1 + d : d;
            const double per = period_integral(
                sheet, rectangle_contour(lo, hi, -bp.z3 - d, bp.z3 + d), p);
            CHECK(per == doctest::Approx(expected[sheet - 1]).epsilon(1e-6));
        }
    }
}

TEST_CASE("lambda: base point, asymptotic constants, boundary relations") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    LambdaCalculator lam(p);
    const auto& bp = lam.bp();

    // the first antiderivative vanishes at its base point
    CHECK(std::abs(lam.lambda(1, cplx(bp.z1 + 1e-4, 0.0))) < 2e-3);

    // constants l_j: frozen from an independent 30-digit quadrature of the
    // second-largest real branch along the axis
    auto l1_of = [&](double Z) {
        return lam.lambda(1, cplx(Z, 0.0)).real() -
               (Z * Z / (2 * p.s2()) - p.a * Z / p.t - 0.5 * std::log(Z));
    };
    const double l1_100 = l1_of(100.0);
    const double l1_1e3 = l1_of(1000.0);
    const double l1_1e4 = l1_of(10000.0);
    CHECK(l1_100 == doctest::Approx(-1.36596532649799).epsilon(5e-7));
    CHECK(l1_1e3 == doctest::Approx(-1.36871355442908).epsilon(5e-7));
    CHECK(l1_1e4 == doctest::Approx(-1.36898734361663).epsilon(5e-7));
    // the tail corrections decay like 1/z, so successive differences drop
    // tenfold and the extrapolated limits agree far below 1e-4
    const double d1 = l1_100 - l1_1e3, d2 = l1_1e3 - l1_1e4;
    CHECK(std::abs(d2) < std::abs(d1) / 8.0);
    const double extrap_a = (1000.0 * l1_1e3 - 100.0 * l1_100) / 900.0;
    const double extrap_b = (10000.0 * l1_1e4 - 1000.0 * l1_1e3) / 9000.0;
    CHECK(std::abs(extrap_a - extrap_b) < 1e-4);

    // real parts of the two glued antiderivatives coincide on the cut
    for (double frac : {0.25, 0.6, 0.9}) {
        const double x = bp.z2 + frac * (bp.z1 - bp.z2);
        const cplx l1 = lam.lambda_boundary(1, x, +1);
        const cplx l3 = lam.lambda_boundary(3, x, +1);
        CHECK(l1.real() == doctest::Approx(l3.real()).epsilon(1e-9));
    }
}

TEST_CASE("the matching constant glues the correct sheet pair at i z3") {
    { // t below a/(a+b): sheets 3 and 4 meet at i z3
        auto p = ModelParams::make(0.6, 0.6, 0.25);
        LambdaCalculator lam(p);
        const auto& bp = lam.bp();
        const cplx near_top(0.0, bp.z3 + 1e-5);
        const cplx l3 = lam.lambda(3, near_top);
        const cplx l4 = lam.lambda(4, near_top);
        CHECK(std::abs(l3 - l4) < 1e-2); // meet like sqrt at the branch point
        const cplx l3f(0.0, bp.z3 + 1e-7);
        CHECK(std::abs(lam.lambda(3, l3f) - lam.lambda(4, l3f)) <
              std::abs(l3 - l4) / 3.0);
    }
    { // t above a/(a+b): sheets 1 and 2 meet there instead
      // (cut layout for a/(a+b) < t < t_c2 follows the reversed-role rule)
        auto p = ModelParams::make(0.6, 0.6, 0.55);
        LambdaCalculator lam(p);
        const auto& bp = lam.bp();
        const cplx near_top(0.0, bp.z3 + 1e-5);
        CHECK(std::abs(lam.lambda(1, near_top) - lam.lambda(2, near_top)) < 1e-2);
    }
}

TEST_CASE("lambda rejects cut points and the excluded ray") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    auto bp = branch_points(p);
    CHECK_THROWS_AS((void)LambdaCalculator(p).lambda(1, cplx(-2.0 * bp.z1, 0.0)),
                    DomainError);
    CHECK_THROWS_AS((void)LambdaCalculator(p).lambda(1, cplx(0.5 * (bp.z1 + bp.z2), 0.0)),
                    PathError);
}

TEST_CASE("rescaling function: real, symmetric, smooth") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    LambdaCalculator lam(p);
    const auto& bp = lam.bp();
    const double x0 = 0.5 * (bp.z1 + bp.z2);

    // imaginary parts of the lambda combination cancel
    const cplx l1 = lam.lambda_boundary(1, x0, +1);
    const cplx l3 = lam.lambda_boundary(3, x0, +1);
    CHECK(std::abs(0.5 * (l1 + l3).imag()) < 1e-8);

    // mirrored definition through sheets 2 and 4 reproduces h(-x) = h(x)
    CHECK(lam.h(-x0) == doctest::Approx(lam.h(x0)).epsilon(1e-8));

    // smoothness: second differences scale quadratically with the spacing,
    // so any splice discontinuity would stick out by orders of magnitude
    const double h_m = lam.h(x0 - 1e-3), h_0 = lam.h(x0), h_p = lam.h(x0 + 1e-3);
    const double second = std::abs(h_p - 2 * h_0 + h_m);
    CHECK(second < 4e-6);
    const double h_m2 = lam.h(x0 - 5e-4), h_p2 = lam.h(x0 + 5e-4);
    const double second_half = std::abs(h_p2 - 2 * h_0 + h_m2);
    CHECK(second_half < 0.5 * second + 1e-9);

    CHECK_THROWS_AS((void)lam.h(bp.z1 + 0.1), DomainError);
    CHECK_THROWS_AS((void)lam.h(0.5 * bp.z2), DomainError); // inside the gap
}
