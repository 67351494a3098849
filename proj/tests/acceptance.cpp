// Acceptance suite: every release criterion with its pinned tolerance, one
// pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nibm/biorth.hpp"
#include "nibm/contour.hpp"
#include "nibm/density.hpp"
#include "nibm/parametrize.hpp"
#include "nibm/quadrature.hpp"
#include "nibm/scaling.hpp"
#include "nibm/simulate.hpp"

using namespace nibm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail,
            double seconds, double budget) {
    std::printf("%s criterion %2d: %-34s %s (%.1fs of %.0fs)\n", pass ? "PASS" : "FAIL",
                id, title, detail.c_str(), seconds, budget);
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class F>
void timed(int id, const char* title, double budget_seconds, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_seconds) {
        pass = false;
        detail += " [over the runtime budget]";
    }
    report(id, title, pass, detail, secs, budget_seconds);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// 1. root-count pattern matches the regime on a seeded parameter grid
bool crit_regime_classification(std::string& detail) {
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> uni(0.05, 1.5);
    std::uniform_real_distribution<double> ut(0.01, 0.99);
    int done = 0, good = 0;
    while (done < 500) {
        const double a = uni(rng), b = uni(rng), t = ut(rng);
        if (a * b >= 0.5 - 1e-3) continue;
        const auto [tc1, tc2] = critical_times(a, b);
        if (std::abs(t - tc1) <= 1e-3 || std::abs(t - tc2) <= 1e-3) continue;
        ++done;
        auto p = ModelParams::make(a, b, t);
        auto bp = branch_points(p); // throws on any pattern inconsistency
        const bool expect_one = t > tc1 && t < tc2;
        const int n_real = bp.n_real_roots(), n_imag = bp.n_imag_roots();
        if ((bp.regime == Regime::OneCut) == expect_one &&
            ((expect_one && n_real == 2 && n_imag == 4) ||
             (!expect_one && n_real == 4 && n_imag == 2)))
            ++good;
    }
    detail = std::to_string(good) + "/500 triples";
    return good == 500;
}

// 2. the sextic's constant coefficient vanishes at the critical times
bool crit_critical_time_formulas(std::string& detail) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.05, 1.5);
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
        const double a = uni(rng), b = uni(rng);
        if (a * b >= 0.5 - 1e-4) continue;
        ++done;
        const auto [tc1, tc2] = critical_times(a, b);
        for (double tc : {tc1, tc2}) {
            ModelParams p;
            p.a = a;
            p.b = b;
            p.t = tc;
            const auto d = discriminant_coefficients(p);
            worst = std::max(worst, std::abs(d.a0) / d.scale());
        }
    }
    detail = "max |a0|/scale = " + fmt(worst);
    return worst <= 1e-10;
}

// 3. the rational parametrization lands on the curve
bool crit_parametrization(std::string& detail) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(-2.5, 2.5);
    std::uniform_real_distribution<double> pa(0.1, 1.3);
    std::uniform_real_distribution<double> pt(0.05, 0.95);
    double worst = 0.0;
    for (int set = 0; set < 10; ++set) {
        double a = pa(rng), b = pa(rng);
        if (a * b >= 0.5) b = 0.45 / a;
        double t = pt(rng);
        const auto [tc1, tc2] = critical_times(a, b);
        if (std::abs(t - tc1) < 1e-3 || std::abs(t - tc2) < 1e-3) t = 0.5 * (tc1 + tc2);
        auto p = ModelParams::make(a, b, t);
        SpectralCurve curve(p);
        int done = 0;
        while (done < 1000) {
            const cplx v(uni(rng), uni(rng));
            const double pole_gap = std::min(
                {std::abs(v - a), std::abs(v + a), std::abs(v - 1.0 / (2 * b))});
            if (pole_gap < 1e-4) continue;
            ++done;
            worst = std::max(worst, curve.relative_residual(param_z(v, p), param_xi(v, p)));
        }
    }
    detail = "max residual = " + fmt(worst);
    return worst <= 1e-10;
}

// 4. tracked contour integrals land on half-integers; residues at infinity
bool crit_periods(std::string& detail) {
    double worst = 0.0;
    bool residues_ok = true;
    auto half_dist = [](double v) { return std::abs(2 * v - std::round(2 * v)) / 2; };
    const double expect[4] = {-0.5, -0.5, 0.5, 0.5};
    for (double t : {0.25, 0.45}) {
        auto p = ModelParams::make(0.6, 0.6, t);
        auto bp = branch_points(p);
        const double R = 4.0 * std::max(bp.z1, bp.z3);
        for (int sheet = 1; sheet <= 4; ++sheet) {
            const double big = period_integral(sheet, circle_contour(0.0, R, 48), p);
            worst = std::max(worst, std::abs(big - expect[sheet - 1]));
            if (std::abs(big - expect[sheet - 1]) > 1e-6) residues_ok = false;
            if (bp.regime == Regime::TwoCuts) {
                const double d = 0.45 * std::min(bp.z2, 0.5 * (bp.z1 - bp.z2));
                worst = std::max(
                    worst, half_dist(period_integral(
                               sheet, rectangle_contour(bp.z2 - d, bp.z1 + d, -d, d), p)));
                worst = std::max(
                    worst,
                    half_dist(period_integral(
                        sheet,
                        rectangle_contour(-bp.z1 - d, -bp.z2 + d, -d, d), p)));
                const double d2 = 0.45 * bp.z2;
                worst = std::max(
                    worst, half_dist(period_integral(
                               sheet,
                               rectangle_contour(-d2, d2, -bp.z3 - d2, bp.z3 + d2), p)));
            } else {
                const double d = 0.3 * bp.z1;
                const double lo = (sheet == 1 || sheet == 3) ? -d : -bp.z1 - d;
                const double hi = (sheet == 1 || sheet == 3) ? bp.z1 + d : d;
                worst = std::max(
                    worst, half_dist(period_integral(
                               sheet, rectangle_contour(lo, hi, -bp.z3 - d, bp.z3 + d),
                               p)));
            }
        }
    }
    detail = "max half-integer distance = " + fmt(worst);
    return worst <= 1e-6 && residues_ok;
}

// 5. mass and parity of the sampled density profiles
bool crit_density_mass_symmetry(std::string& detail) {
    double worst_mass = 0.0, worst_sym = 0.0;
    for (auto [a, b, t] : {std::tuple{0.6, 0.6, 0.25}, {0.6, 0.6, 0.45},
                           {0.4, 0.3, 0.1}, {0.4, 0.3, 0.5}}) {
        auto prof = density_profile(ModelParams::make(a, b, t), 2048);
        worst_mass = std::max(worst_mass, std::abs(prof.mass - 1.0));
        const std::size_t m = prof.grid.size();
        for (std::size_t i = 0; i < m; ++i)
            worst_sym = std::max(worst_sym, std::abs(prof.rho[i] - prof.rho[m - 1 - i]));
    }
    detail = "|mass-1| = " + fmt(worst_mass) + ", asym = " + fmt(worst_sym);
    return worst_mass <= 1e-8 && worst_sym < 1e-9;
}

// 6. square-root vanishing at every real edge, both regimes
bool crit_edge_exponents(std::string& detail) {
    double worst_exp = 0.0, worst_agree = 0.0;
    // mirrored edges carry the same constants because the sampled density is
    // parity-symmetric far below the fit resolution (criterion 5)
    for (auto [a, b, t] : {std::tuple{0.6, 0.6, 0.25}, {0.6, 0.6, 0.45}}) {
        auto p = ModelParams::make(a, b, t);
        auto bp = branch_points(p);
        std::vector<Edge> edges = {Edge::z1};
        if (bp.regime == Regime::TwoCuts) edges.push_back(Edge::z2);
        for (Edge e : edges) {
            const auto fit = edge_constant(e, p);
            worst_exp = std::max(worst_exp, std::abs(fit.exponent - 0.5));
            worst_agree =
                std::max(worst_agree, std::abs(fit.c - fit.c_split) / fit.c_split);
        }
    }
    detail = "|exp-1/2| = " + fmt(worst_exp) + ", estimator gap = " + fmt(worst_agree);
    return worst_exp <= 0.02 && worst_agree <= 0.01;
}

// 7. finite-n kernel: trace and reproducing identities at 256 bits
bool crit_kernel_self_consistency(std::string& detail) {
    auto params0 = ModelParams::make(0.6, 0.6, 0.45);
    auto bp = branch_points(params0);
    double worst_trace = 0.0;
    for (int n : {2, 4, 8, 16}) {
        auto p = ModelParams::make(0.6, 0.6, 0.45, n);
        BiorthogonalSystem sys(p, 256);
        const double X =
            bp.z1 + 10 * std::sqrt(p.s2() / n) * std::sqrt(2 * std::log(1e16));
        const double tr =
            adaptive_gl([&](double x) { return sys.kernel(x, x); }, -X, X, 1e-9, 1e-11);
        worst_trace = std::max(worst_trace, std::abs(tr - n));
    }
    auto p8 = ModelParams::make(0.6, 0.6, 0.45, 8);
    BiorthogonalSystem sys(p8, 256);
    const double X = bp.z1 + 10 * std::sqrt(p8.s2() / 8) * std::sqrt(2 * std::log(1e16));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-bp.z1, bp.z1);
    double worst_rep = 0.0, scale = 0.0;
    for (int k = 0; k < 25; ++k) {
        const double x = uni(rng), y = uni(rng);
        const double conv = adaptive_gl(
            [&](double s) { return sys.kernel(x, s) * sys.kernel(s, y); }, -X, X, 1e-9,
            1e-11);
        worst_rep = std::max(worst_rep, std::abs(conv - sys.kernel(x, y)));
        scale = std::max(scale, std::abs(sys.kernel(x, y)));
    }
    detail = "trace err = " + fmt(worst_trace) + ", reproducing rel = " +
             fmt(worst_rep / scale);
    return worst_trace <= 1e-6 && worst_rep <= 1e-6 * scale;
}

// 8. the normalized diagonal converges to the limiting density
bool crit_global_density_convergence(std::string& detail) {
    double worst64 = 0.0;
    bool decreasing = true;
    for (double t : {0.25, 0.45}) {
        auto p = ModelParams::make(0.6, 0.6, t);
        auto bp = branch_points(p);
        std::vector<double> xs;
        const double lo = bp.regime == Regime::TwoCuts ? bp.z2 : -bp.z1;
        for (double x = lo + 0.1; x <= bp.z1 - 0.1; x += 0.06)
            if (std::abs(x) > 5e-3) xs.push_back(x);
        const auto d16 = diag_comparison(p, 16, xs);
        const auto d64 = diag_comparison(p, 64, xs);
        worst64 = std::max(worst64, d64.sup_err);
        if (!(d64.sup_err < d16.sup_err)) decreasing = false;
    }
    detail = "sup at n=64: " + fmt(worst64) + (decreasing ? ", decreasing" : ", NOT decreasing");
    return worst64 <= 0.02 && decreasing;
}

// 9. bulk pair correlations approach the squared sine kernel
bool crit_sine_limit(std::string& detail) {
    std::vector<double> grid;
    for (double u = -2.0; u <= 2.01; u += 0.5) grid.push_back(u);
    double worst64 = 0.0;
    bool monotone = true;
    for (double t : {0.25, 0.45}) {
        auto p = ModelParams::make(0.6, 0.6, t);
        auto bp = branch_points(p);
        const double x0 =
            bp.regime == Regime::TwoCuts ? 0.5 * (bp.z1 + bp.z2) : 0.5 * bp.z1;
        const auto rep = bulk_scaling_check(x0, {16, 32, 64}, grid, grid, p);
        for (std::size_t i = 1; i < rep.sup_errors.size(); ++i)
            if (!(rep.sup_errors[i] < rep.sup_errors[i - 1])) monotone = false;
        worst64 = std::max(worst64, rep.sup_errors.back());
    }
    detail = "sup at n=64: " + fmt(worst64) + (monotone ? ", monotone" : ", NOT monotone");
    return worst64 <= 0.05 && monotone;
}

// 10. edge pair correlations approach the squared Airy kernel; the inner edge
//     uses the inward orientation. The inner-edge set runs at t = 0.1 where
//     the gap is wide enough for the scaling window at these n.
bool crit_airy_limit(std::string& detail) {
    std::vector<double> grid;
    for (double u = -2.0; u <= 3.01; u += 0.5) grid.push_back(u);
    double worst64 = 0.0;
    bool monotone = true;
    auto run = [&](double t, ScalingEdge e) {
        auto p = ModelParams::make(0.6, 0.6, t);
        const auto rep = edge_scaling_check(e, {16, 32, 64}, grid, grid, p);
        for (std::size_t i = 1; i < rep.sup_errors.size(); ++i)
            if (!(rep.sup_errors[i] < rep.sup_errors[i - 1])) monotone = false;
        worst64 = std::max(worst64, rep.sup_errors.back());
    };
    run(0.25, ScalingEdge::PlusZ1); // outer edge, two cuts
    run(0.45, ScalingEdge::PlusZ1); // outer edge, one cut
    run(0.10, ScalingEdge::PlusZ2); // inner edge, inward orientation
    detail = "sup at n=64: " + fmt(worst64) + (monotone ? ", monotone" : ", NOT monotone");
    return worst64 <= 0.08 && monotone;
}

// 11. sampled marginal law matches the exact finite-n kernel diagonal
bool crit_sampler_law(std::string& detail) {
    const double a = 0.6, b = 0.6, t = 0.45;
    auto p = ModelParams::make(a, b, t, 6);
    BiorthogonalSystem sys(p);
    const double X = 2.2;
    const int M = 1200;
    std::vector<double> cdf(M + 1, 0.0);
    const auto& [gx, gw] = gl15();
    double acc = 0.0;
    for (int i = 0; i < M; ++i) {
        const double x0 = -X + 2 * X * i / M, x1 = -X + 2 * X * (i + 1) / M;
        const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
        for (std::size_t k = 0; k < gx.size(); ++k) {
            const double s = mid + half * gx[k];
            acc += gw[k] * half * sys.kernel(s, s) / 6.0;
        }
        cdf[i + 1] = acc;
    }
    for (auto& c : cdf) c /= acc;
    auto cdf_fn = [&](double x) {
        if (x <= -X) return 0.0;
        if (x >= X) return 1.0;
        const double u = (x + X) / (2 * X) * M;
        const int j = std::min(M - 1, int(u));
        return cdf[j] + (cdf[j + 1] - cdf[j]) * (u - j);
    };

    auto ens = sample_ensemble(a, b, 6, 1000, 10000, 31415, 0);
    auto samples = marginal_samples(ens, t);
    const double d = ks_statistic(samples, cdf_fn);
    const double crit = 1.6276 / std::sqrt(double(samples.size()));
    detail = "KS = " + fmt(d) + " vs 3*crit(1%) = " + fmt(3 * crit) + ", accepted " +
             std::to_string(ens.bundles.size());
    return ens.bundles.size() >= 10000 && d <= 3 * crit;
}

// 12. manifests rerun byte-identically
bool crit_determinism(std::string& detail) {
    const fs::path tmp =
        fs::temp_directory_path() / ("nibm_acc_" + std::to_string(std::rand()));
    fs::create_directories(tmp);
    auto slurp = [](const fs::path& f) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(NIBM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    bool ok = true;
    // one stochastic and one deterministic command, both rerun from manifests
    ok &= run("simulate --a 0.6 --b 0.6 --t 0.45 --n 4 --steps 150 --count 30 --seed 5 "
              "--out " + (tmp / "s1").string()) == 0;
    ok &= run("rerun --manifest " + (tmp / "s1" / "manifest.json").string() + " --out " +
              (tmp / "s2").string()) == 0;
    ok &= run("curve --a 0.6 --b 0.6 --t 0.25 --grid 1.5,0.2:2.5,0.2:9 --out " +
              (tmp / "c1").string()) == 0;
    ok &= run("rerun --manifest " + (tmp / "c1" / "manifest.json").string() + " --out " +
              (tmp / "c2").string()) == 0;
    int compared = 0;
    for (auto [d1, d2] : {std::pair{"s1", "s2"}, {"c1", "c2"}}) {
        for (const auto& entry : fs::directory_iterator(tmp / d1)) {
            const auto name = entry.path().filename();
            if (!ok) break;
            ok &= slurp(entry.path()) == slurp(tmp / d2 / name);
            ++compared;
        }
    }
    fs::remove_all(tmp);
    detail = ok ? std::to_string(compared) + " files byte-identical" : "mismatch";
    return ok;
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    timed(1, "regime classification", 5, crit_regime_classification);
    timed(2, "critical-time formulas", 1, crit_critical_time_formulas);
    timed(3, "parametrization identity", 5, crit_parametrization);
    timed(4, "period quantization", 30, crit_periods);
    timed(5, "density mass and symmetry", 30, crit_density_mass_symmetry);
    timed(6, "edge exponents", 30, crit_edge_exponents);
    timed(7, "kernel self-consistency", 120, crit_kernel_self_consistency);
    timed(8, "global density convergence", 300, crit_global_density_convergence);
    timed(9, "bulk sine-kernel limit", 600, crit_sine_limit);
    timed(10, "edge Airy-kernel limit", 600, crit_airy_limit);
    timed(11, "sampler law check", 600, crit_sampler_law);
    timed(12, "manifest determinism", 60, crit_determinism);
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
