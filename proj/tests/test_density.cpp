#include <doctest.h>

#include <cmath>

#include "nibm/density.hpp"

using namespace nibm;

TEST_CASE("pointwise density: golden oracle value and support structure") {
    auto p = ModelParams::make(0.6, 0.6, 0.45);
    auto bp = branch_points(p);

    // oracle: bare quartic solve at x + 1e-9 i, take max positive imaginary
    // part over pi (frozen from a 30-digit run; recomputed here in double)
    const double frozen = 0.4217647896664967;
    const auto raw = solve_monic_quartic(SpectralCurve(p).coefficients(cplx(0.3, 1e-9)));
    double max_im = 0.0;
    for (auto r : raw) max_im = std::max(max_im, r.imag());
    CHECK(max_im / M_PI == doctest::Approx(frozen).epsilon(1e-9));

    const double rho = density_at_ex(0.3, p, bp).rho;
    CHECK(rho == doctest::Approx(frozen).epsilon(2e-8));

    // off the support the density is exactly zero
    CHECK(density_at_ex(bp.z1 + 0.01, p, bp).rho == 0.0);
    CHECK(density_at_ex(-bp.z1 - 2.0, p, bp).rho == 0.0);

    auto p25 = ModelParams::make(0.6, 0.6, 0.25);
    auto bp25 = branch_points(p25);
    CHECK(density_at_ex(0.5 * bp25.z2, p25, bp25).rho == 0.0); // inside the gap
    CHECK(density_at_ex(0.6, p25, bp25).rho > 0.3);

    // near-edge evaluations are flagged
    CHECK(density_at_ex(bp25.z1 - 1e-8, p25, bp25).low_accuracy);
    CHECK_FALSE(density_at_ex(0.6, p25, bp25).low_accuracy);
}

TEST_CASE("two formulations of the density coincide") {
    // labeled boundary value of the first/second branch vs the bare maximal
    // imaginary part, wherever a root with positive imaginary part exists
    for (double t : {0.25, 0.45}) {
        auto p = ModelParams::make(0.6, 0.6, t);
        auto bp = branch_points(p);
        for (double frac : {0.3, 0.55, 0.85}) {
            const double lo = bp.regime == Regime::TwoCuts ? bp.z2 : 0.0;
            const double x = lo + frac * (bp.z1 - lo);
            const double via_label = density_at_ex(x, p, bp).rho;
            const auto raw =
                solve_monic_quartic(SpectralCurve(p).coefficients(cplx(x, 1e-10)));
            double max_im = 0.0;
            for (auto r : raw) max_im = std::max(max_im, r.imag());
            CHECK(via_label == doctest::Approx(max_im / M_PI).epsilon(1e-8));
            // mirrored point through the second branch
            CHECK(density_at_ex(-x, p, bp).rho ==
                  doctest::Approx(via_label).epsilon(1e-9));
        }
    }
}

TEST_CASE("edge constants: exponent band and the two independent estimators") {
    for (double t : {0.25, 0.45}) {
        auto p = ModelParams::make(0.6, 0.6, t);
        auto bp = branch_points(p);
        auto f1 = edge_constant(Edge::z1, p);
        CHECK(std::abs(f1.exponent - 0.5) <= 0.02);
        CHECK(std::abs(f1.c - f1.c_split) <= 0.01 * f1.c_split);
        if (bp.regime == Regime::TwoCuts) {
            auto f2 = edge_constant(Edge::z2, p);
            CHECK(std::abs(f2.exponent - 0.5) <= 0.02);
            CHECK(std::abs(f2.c - f2.c_split) <= 0.01 * f2.c_split);
        } else {
            CHECK_THROWS_AS((void)edge_constant(Edge::z2, p), DomainError);
        }
    }
}

TEST_CASE("profile: mass, symmetry, support count, rescaling grid") {
    for (double t : {0.25, 0.45}) {
        auto p = ModelParams::make(0.6, 0.6, t);
        auto prof = density_profile(p, 1024);
        CHECK(prof.support.size() == (t == 0.25 ? 2 : 1));
        CHECK(std::abs(prof.mass - 1.0) < 1e-8);

        const std::size_t m = prof.grid.size();
        double sym = 0.0, hsym = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(prof.grid[i] == -prof.grid[m - 1 - i]); // exactly mirrored grid
            sym = std::max(sym, std::abs(prof.rho[i] - prof.rho[m - 1 - i]));
            hsym = std::max(hsym, std::abs(prof.h_grid[i] - prof.h_grid[m - 1 - i]));
        }
        CHECK(sym < 1e-9);
        CHECK(hsym < 1e-7);

        for (double r : prof.rho) CHECK(r >= 0.0);
        CHECK(prof.c1 > 0.0);
        CHECK(prof.c2.has_value() == (t == 0.25));

        // h interpolant: zero off support, finite inside
        CHECK(prof.h_or_zero(prof.bp.z1 + 1.0) == 0.0);
        const double x_mid = 0.5 * (prof.support.back().first + prof.support.back().second);
        CHECK(std::isfinite(prof.h_or_zero(x_mid)));
    }
}

TEST_CASE("mass stays normalized along a time sweep") {
    for (double t : {0.12, 0.2, 0.38, 0.6}) {
        auto prof = density_profile(ModelParams::make(0.6, 0.6, t), 1024);
        CHECK(std::abs(prof.mass - 1.0) < 1e-8);
    }
}

TEST_CASE("gap closes monotonically approaching the merge time") {
    auto base = ModelParams::make(0.6, 0.6, 0.25);
    double prev = 1e9;
    for (double gap : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
        auto bp = branch_points(ModelParams::make(0.6, 0.6, base.t_c1 - gap));
        CHECK(bp.z2 < prev);
        prev = bp.z2;
    }
}
