#include <doctest.h>

#include <cmath>
#include <random>

#include "nibm/biorth.hpp"
#include "nibm/density.hpp"
#include "nibm/scaling.hpp"

using namespace nibm;

TEST_CASE("transition density: normalization, translation, peak") {
    const double mass =
        adaptive_gl([](double x) { return transition_density(0.3, 0.6, x, 8); }, -5, 6,
                    1e-12, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(transition_density(0.3, 0.6, 1.1, 8) ==
          doctest::Approx(transition_density(0.3, 0.0, 0.5, 8)).epsilon(1e-14));
    CHECK(transition_density(0.4, 0.2, 0.2, 6) ==
          doctest::Approx(std::sqrt(6.0 / (2 * M_PI * 0.4))).epsilon(1e-14));
    CHECK_THROWS_AS((void)transition_density(0.0, 0.2, 0.2, 6), DomainError);
}

TEST_CASE("weight system: integrable products and mirrored moments") {
    auto p = ModelParams::make(0.6, 0.6, 0.25, 8);
    WeightSystem w(p);
    for (int i = 1; i <= 2; ++i)
        for (int k = 1; k <= 2; ++k) {
            const auto g = w.combined(i, k);
            CHECK(g.sigma2 == doctest::Approx(p.s2() / 8).epsilon(1e-15));
            // the product weight really is the advertised Gaussian
            for (double x : {-0.4, 0.3, 1.1}) {
                const double direct = w.w1(i, x) * w.w2(k, x);
                const double gauss =
                    std::exp(g.log_amp - (x - g.mu) * (x - g.mu) / (2 * g.sigma2));
                CHECK(direct == doctest::Approx(gauss).epsilon(1e-12));
            }
        }

    // parity: swapping both family indices mirrors the moments up to the sign
    // of odd powers
    BiorthogonalSystem sys(p);
    const int half = 4; // n/2
    for (int dp = 0; dp < half; ++dp)
        for (int dq = 0; dq < half; ++dq) {
            const double m11 = sys.gram_entry(dp, dq);
            const double m22 = sys.gram_entry(half + dp, half + dq);
            const double sign = (dp + dq) % 2 ? -1.0 : 1.0;
            CHECK(m11 == doctest::Approx(sign * m22).epsilon(1e-13));
        }
    CHECK(sys.gram_entry(0, 0) > 0.0); // zeroth moment is a Gaussian mass
}

TEST_CASE("closed-form moments match adaptive quadrature at n = 2") {
    auto p = ModelParams::make(0.6, 0.6, 0.45, 2);
    WeightSystem w(p);
    BiorthogonalSystem sys(p);
    // basis: {w_{1,1}, w_{1,2}} against {w_{2,1}, w_{2,2}}
    for (int pi = 0; pi < 2; ++pi)
        for (int qi = 0; qi < 2; ++qi) {
            const double closed = sys.gram_entry(pi, qi);
            const double quad = adaptive_gl(
                [&](double x) { return w.w1(pi + 1, x) * w.w2(qi + 1, x); }, -8.0, 8.0,
                1e-13, 1e-13);
            CHECK(closed == doctest::Approx(quad).epsilon(1e-12));
        }
}

TEST_CASE("biorthogonality holds against the independent quadrature gram") {
    for (int n : {8, 16, 32}) {
        auto p = ModelParams::make(0.6, 0.6, 0.25, n);
        BiorthogonalSystem sys(p); // 256-bit default here
        CHECK(sys.precision_bits() == 256);
        CHECK(sys.biorthogonality_residual() <= std::pow(10.0, -0.15 * 256));
    }
}

TEST_CASE("biorthogonality at n = 64 under the 512-bit default") {
    auto p = ModelParams::make(0.6, 0.6, 0.25, 64);
    BiorthogonalSystem sys(p);
    CHECK(sys.precision_bits() == 512);
    CHECK(sys.biorthogonality_residual() <= std::pow(10.0, -0.15 * 512));
}

TEST_CASE("phi and psi rows are biorthonormal under quadrature") {
    auto p = ModelParams::make(0.6, 0.6, 0.45, 4);
    auto bp = branch_points(p);
    BiorthogonalSystem sys(p);
    const double X = bp.z1 + 10 * std::sqrt(p.s2() / 4) * std::sqrt(2 * std::log(1e16));
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            const double ip = adaptive_gl(
                [&](double s) { return sys.phi(j, s) * sys.psi(k, s); }, -X, X, 1e-11,
                1e-11);
            CHECK(ip == doctest::Approx(j == k ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
        }
}

TEST_CASE("kernel trace equals the number of paths") {
    for (int n : {2, 4, 8, 16}) {
        auto p = ModelParams::make(0.6, 0.6, 0.45, n);
        auto bp = branch_points(p);
        BiorthogonalSystem sys(p, 256);
        const double X =
            bp.z1 + 10 * std::sqrt(p.s2() / n) * std::sqrt(2 * std::log(1e16));
        const double tr =
            adaptive_gl([&](double x) { return sys.kernel(x, x); }, -X, X, 1e-9, 1e-11);
        CHECK(std::abs(tr - n) < 1e-6);
    }
}

TEST_CASE("reproducing property of the projection kernel") {
    auto p = ModelParams::make(0.6, 0.6, 0.45, 8);
    auto bp = branch_points(p);
    BiorthogonalSystem sys(p, 256);
    const double X = bp.z1 + 10 * std::sqrt(p.s2() / 8) * std::sqrt(2 * std::log(1e16));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-bp.z1, bp.z1);
    double worst = 0.0, scale = 0.0;
    for (int k = 0; k < 25; ++k) {
        const double x = uni(rng), y = uni(rng);
        const double conv = adaptive_gl(
            [&](double s) { return sys.kernel(x, s) * sys.kernel(s, y); }, -X, X, 1e-9,
            1e-11);
        worst = std::max(worst, std::abs(conv - sys.kernel(x, y)));
        scale = std::max(scale, std::abs(sys.kernel(x, y)));
    }
    CHECK(worst <= 1e-6 * scale);
}

TEST_CASE("kernel diagonal is even in x") {
    auto p = ModelParams::make(0.6, 0.6, 0.25, 8);
    BiorthogonalSystem sys(p);
    for (double x : {0.15, 0.6, 1.05}) {
        const double kp = sys.kernel(x, x), km = sys.kernel(-x, -x);
        CHECK(std::abs(kp - km) <= 1e-10 * std::max(1.0, std::abs(kp)));
    }
}

TEST_CASE("pair correlation determinants are nonnegative") {
    auto p = ModelParams::make(0.6, 0.6, 0.45, 8);
    BiorthogonalSystem sys(p);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-1.2, 1.2);
    for (int k = 0; k < 40; ++k) {
        const double x = uni(rng), y = uni(rng);
        const double det =
            sys.kernel(x, x) * sys.kernel(y, y) - sys.kernel(x, y) * sys.kernel(y, x);
        CHECK(det >= -1e-9);
    }
}

TEST_CASE("rescaled kernel: conjugation cancels in pair products") {
    auto p = ModelParams::make(0.6, 0.6, 0.45, 8);
    BiorthogonalSystem sys(p);
    auto prof = density_profile(ModelParams::make(0.6, 0.6, 0.45), 256);
    auto h = [&](double x) { return prof.h_or_zero(x); };
    for (auto [x, y] : {std::pair{0.2, 0.5}, {-0.8, 0.3}, {1.0, -1.0}}) {
        const auto exy = kernel_eval(x, y, sys, h);
        const auto eyx = kernel_eval(y, x, sys, h);
        const double lhs = exy.K_hat * eyx.K_hat;
        const double rhs = exy.K * eyx.K;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        // and without any h the rescaled kernel is the kernel itself
        const auto plain = kernel_eval(x, y, sys);
        CHECK(plain.K_hat == plain.K);
    }
}

TEST_CASE("kernel diagonal over n approaches the limiting density") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    auto bp = branch_points(p);
    std::vector<double> xs;
    for (double x = bp.z2 + 0.1; x <= bp.z1 - 0.1; x += 0.1) xs.push_back(x);
    auto d16 = diag_comparison(p, 16, xs);
    CHECK(d16.sup_err < 0.03);
}

TEST_CASE("precision control: collapse detection and the error path") {
    // a numerically singular matrix trips the pivot floor
    std::vector<Big256> singular = {Big256(1), Big256(2), Big256(2), Big256(4)};
    CHECK_THROWS_AS((void)lu_full_pivot(std::move(singular), 2), PrecisionError);

    // 128 bits cannot carry the n = 64 gram factorization
    auto p = ModelParams::make(0.6, 0.6, 0.25, 64);
    CHECK_THROWS_AS((void)BiorthogonalSystem(p, 128), PrecisionError);

    // n cap
    auto big = ModelParams::make(0.6, 0.6, 0.25, 130);
    CHECK_THROWS_AS((void)BiorthogonalSystem(big), DomainError);
}

TEST_CASE("gauge choice cannot affect scaling comparisons") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    auto bp = branch_points(p);
    const std::vector<double> grid = {-1.0, 0.0, 1.0};
    auto rep = bulk_scaling_check(0.5 * (bp.z1 + bp.z2), {8}, grid, grid, p);
    // measured values are built from plain kernel pair products, which equal
    // the conjugated products identically; diagonal entries match the
    // squared-diagonal reference structure
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double diag = rep.measured[0][i * grid.size() + i];
        CHECK(diag >= 0.0);
    }
    CHECK(rep.reference[0 * grid.size() + 0] == doctest::Approx(1.0));
    CHECK(rep.sup_errors.size() == 1);
}

TEST_CASE("mirrored edges produce identical scaling reports") {
    auto p = ModelParams::make(0.6, 0.6, 0.25);
    const std::vector<double> grid = {-1.0, 0.5, 2.0};
    const auto plus = edge_scaling_check(ScalingEdge::PlusZ1, {8}, grid, grid, p);
    const auto minus = edge_scaling_check(ScalingEdge::MinusZ1, {8}, grid, grid, p);
    for (std::size_t i = 0; i < plus.measured[0].size(); ++i)
        CHECK(std::abs(plus.measured[0][i] - minus.measured[0][i]) <= 1e-9);
}

TEST_CASE("exact kernel matches the oscillatory sandwich built from lambda and h") {
    // strong cross-module check: the finite-n kernel, computed by the
    // multiprecision factorization, against exp(n(h(y)-h(x))) *
    // sin(n Im(lambda_1+(x) - lambda_1+(y))) / (pi (x-y)) from the labeled
    // antiderivatives; pointwise, not gauge-invariant, so it pins h too
    auto p0 = ModelParams::make(0.6, 0.6, 0.25);
    LambdaCalculator lam(p0);
    const auto& bp = lam.bp();
    const double x0 = 0.5 * (bp.z1 + bp.z2);
    const double rho0 = density_at_ex(x0, p0, bp).rho;
    double prev_worst = 1e9;
    for (int n : {16, 32}) {
        ModelParams pn = p0;
        pn.n = n;
        BiorthogonalSystem sys(pn);
        double worst = 0.0;
        for (double du : {0.3, 0.9, 1.7}) {
            const double x = x0 + du / (n * rho0) / 2, y = x0 - du / (n * rho0) / 2;
            const double K = sys.kernel(x, y);
            const double hx = lam.h(x), hy = lam.h(y);
            const double im_dl = lam.lambda_boundary(1, x, +1).imag() -
                                 lam.lambda_boundary(1, y, +1).imag();
            const double approx =
                std::exp(n * (hy - hx)) * std::sin(n * im_dl) / (M_PI * (x - y));
            worst = std::max(worst, std::abs(K - approx) / (n * rho0));
        }
        CHECK(worst < 0.05);
        CHECK(worst < prev_worst);
        prev_worst = worst;
    }
}
