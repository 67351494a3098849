#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "nibm/contour.hpp"
#include "nibm/frame.hpp"
#include "nibm/quadrature.hpp"

namespace nibm {

struct DensityValue {
    double rho = 0.0;
    bool low_accuracy = false; // within tol.bp_scale * z1 of a support edge
};

/// Limiting mean density: (1/pi) Im xi_{1+}(x) for x > 0, (1/pi) Im xi_{2+}(x)
/// for x < 0; exact zero off the support and whenever the imaginary part falls
/// below the classification threshold. Above the critical separation the cut
/// geometry is unproven, so the boundary value comes from the bare maximal
/// imaginary root instead of the labeled continuation (experimental branch).
inline DensityValue density_at_ex(double x, const ModelParams& params,
                                  const BranchPointSet& bp) {
    const double tau = params.tol.bp_scale * bp.z1;
    DensityValue out;
    const double ax = std::abs(x);
    if (ax >= bp.z1 + tau) return out;
    if (params.separation == Separation::Sub && bp.regime == Regime::TwoCuts &&
        ax <= bp.z2 - tau)
        return out;

    out.low_accuracy = std::abs(ax - bp.z1) < tau ||
                       (bp.regime == Regime::TwoCuts && std::abs(ax - bp.z2) < tau);

    double x_eval = x;
    if (x == 0.0 && bp.regime == Regime::OneCut) {
        x_eval = 10 * tau; // the center is analytic; nudge off the cut crossing
        out.low_accuracy = true;
    }

    double im = 0.0;
    if (params.separation == Separation::Super) {
        const SpectralCurve curve(params);
        const double eps0 = 1e-6 * std::max(1.0, bp.z1);
        const auto w = detail::richardson3();
        for (int k = 0; k < 3; ++k) {
            const auto roots =
                solve_monic_quartic(curve.coefficients(cplx(x_eval, eps0 * std::pow(0.1, k))));
            double max_im = 0.0;
            for (auto r : roots) max_im = std::max(max_im, r.imag());
            im += w[k] * max_im;
        }
        out.low_accuracy = true; // unvalidated branch
    } else {
        const auto f = boundary_frame(x_eval, +1, params, bp);
        im = (x_eval > 0 ? f[0] : f[1]).imag();
    }
    out.rho = im > params.tol.classify ? im / M_PI : 0.0;
    return out;
}

inline double density_at(double x, const ModelParams& params) {
    const BranchPointSet bp = branch_points(params);
    return density_at_ex(x, params, bp).rho;
}

enum class Edge { z1, z2 };

struct EdgeFit {
    double c = 0.0;        // coefficient in rho ~ (c/pi) |x - edge|^{1/2}
    double exponent = 0.0; // fitted power, must be 0.5 +- 0.02
    double c_split = 0.0;  // independent estimate from the branch splitting
    double edge_x = 0.0;
};

/// Edge constant by least-squares fit of log rho against log distance over
/// distances [1e-6, 1e-3] * z1 inside the support, cross-estimated from the
/// square-root splitting of the two merging branches outside.
inline EdgeFit edge_constant(Edge edge, const ModelParams& params) {
    const BranchPointSet bp = branch_points(params);
    if (edge == Edge::z2 && bp.regime != Regime::TwoCuts)
        throw DomainError("edge_constant: z2 is not a real edge in the OneCut regime");
    const double ze = edge == Edge::z1 ? bp.z1 : bp.z2;
    const double inward = edge == Edge::z1 ? -1.0 : +1.0;

    constexpr int m = 10;
    std::vector<double> lx, ly;
    lx.reserve(m);
    ly.reserve(m);
    for (int i = 0; i < m; ++i) {
        const double delta = bp.z1 * std::pow(10.0, -6.0 + 3.0 * i / (m - 1));
        const double rho = density_at_ex(ze + inward * delta, params, bp).rho;
        if (rho <= 0.0)
            throw EdgeFitError("edge_constant: density vanished inside the support "
                               "near the edge");
        lx.push_back(std::log(delta));
        ly.push_back(std::log(rho));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;

    EdgeFit fit;
    fit.edge_x = ze;
    fit.exponent = slope;
    fit.c = M_PI * std::exp(intercept);
    if (std::abs(fit.exponent - 0.5) > 0.02)
        throw EdgeFitError("edge_constant: fitted exponent outside 0.5 +- 0.02; "
                           "mislabeled sheet or critical proximity");

    if (params.separation == Separation::Super) {
        fit.c_split = fit.c; // labeled splitting unavailable on this branch
        return fit;
    }
    // Outside the edge the two glued branches are real and split like
    // +- c sqrt(delta); two deltas give a Richardson-extrapolated c.
    auto split_at = [&](double delta) {
        const XiFrame f = xi_frame(ze - inward * delta, params);
        return std::abs(f.xi[0] - f.xi[2]) / (2.0 * std::sqrt(delta));
    };
    const double d0 = 4e-4 * bp.z1;
    const double ca = split_at(d0), cb = split_at(d0 / 4.0);
    fit.c_split = (4.0 * cb - ca) / 3.0;
    return fit;
}

/// Sampled density, support, edge constants and the rescaling function h.
struct DensityProfile {
    ModelParams params;
    BranchPointSet bp;
    std::vector<std::pair<double, double>> support;
    std::vector<double> grid;   // ascending
    std::vector<double> rho;
    std::vector<double> h_grid; // rescaling function at the grid nodes
    double c1 = 0.0;
    std::optional<double> c2;
    double mass = 0.0;

    /// h extended by zero off the support (the gauge used by the rescaled
    /// kernel; every scaling-limit comparison is invariant to it).
    double h_or_zero(double x) const {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (x >= support[i].first && x <= support[i].second) {
                // linear interpolation on the grid restricted to this interval
                const auto lo = std::lower_bound(grid.begin(), grid.end(), x);
                if (lo == grid.begin()) return h_grid.front();
                if (lo == grid.end()) return h_grid.back();
                const std::size_t j = std::size_t(lo - grid.begin());
                const double x1 = grid[j - 1], x2 = grid[j];
                if (x2 == x1) return h_grid[j];
                const double w = (x - x1) / (x2 - x1);
                return (1.0 - w) * h_grid[j - 1] + w * h_grid[j];
            }
        return 0.0;
    }
};

namespace detail {

// rho and (lambda_a, lambda_b) boundary values marched along one support
// interval at the three extrapolation heights. sheet_a/sheet_b are (1,3) on
// the positive side, (2,4) on the negative side.
struct IntervalScan {
    std::vector<double> x;   // node positions, marching order
    std::vector<double> rho;
    std::vector<double> h;
};

inline IntervalScan scan_interval(const ModelParams& params, const BranchPointSet& bp,
                                  const std::vector<double>& nodes_in_march_order,
                                  const LambdaCalculator& lam) {
    IntervalScan out;
    out.x = nodes_in_march_order;
    const std::size_t m = out.x.size();
    out.rho.assign(m, 0.0);
    out.h.assign(m, 0.0);
    if (m == 0) return out;

    const bool positive = out.x.front() > 0.0;
    const int sheet_rho = positive ? 1 : 2;
    const int sheet_b = positive ? 3 : 4;
    const double eps0 = 1e-6 * std::max(1.0, bp.z1);
    const auto w3 = detail::richardson3();

    std::vector<std::vector<cplx>> lam_a(3), lam_b(3);
    std::vector<std::vector<double>> im(3);

    const double r0 = 0.5 * std::max(1.0, bp.z1);
    for (int k = 0; k < 3; ++k) {
        const double eps = eps0 * std::pow(0.1, k);
        TrackedIntegrator integ(params, bp);
        const cplx w0(out.x.front(), r0);
        const cplx first(out.x.front(), eps);

        // head: from the sheet pair's base (z1 or -z1) to above the entry
        // node, then straight down; the entry node is a safe interior point
        ContourPath head = lam.path_to(sheet_rho, w0);
        head.push_back({w0, first});
        auto acc = integ.integrate(head);
        lam_a[k].push_back(acc[sheet_rho - 1]);
        lam_b[k].push_back(acc[sheet_b - 1]);
        im[k].push_back(integ.frame()[sheet_rho - 1].imag());

        for (std::size_t i = 1; i < m; ++i) {
            const PathLeg leg{cplx(out.x[i - 1], eps), cplx(out.x[i], eps)};
            const auto inc = integ.integrate_leg(leg, 1e-12, 1e-13, 1);
            for (int j = 0; j < 4; ++j) acc[j] += inc[j];
            lam_a[k].push_back(acc[sheet_rho - 1]);
            lam_b[k].push_back(acc[sheet_b - 1]);
            im[k].push_back(integ.frame()[sheet_rho - 1].imag());
        }
    }

    const double t = params.t;
    for (std::size_t i = 0; i < m; ++i) {
        const double imv = w3[0] * im[0][i] + w3[1] * im[1][i] + w3[2] * im[2][i];
        out.rho[i] = imv > params.tol.classify ? imv / M_PI : 0.0;
        double re_a = 0.0, re_b = 0.0;
        for (int k = 0; k < 3; ++k) {
            re_a += w3[k] * lam_a[k][i].real();
            re_b += w3[k] * lam_b[k][i].real();
        }
        out.h[i] = 0.5 * (re_a + re_b) - out.x[i] * out.x[i] / (2.0 * (1.0 - t));
    }
    return out;
}

} // namespace detail

/// Assemble the density profile on cosine-clustered nodes (nodes_per_interval
/// per support interval; mass by Clenshaw-Curtis on the same nodes).
inline DensityProfile density_profile(const ModelParams& params,
                                      int nodes_per_interval = 2048) {
    if (nodes_per_interval < 8)
        throw DomainError("density_profile: need at least 8 nodes per interval");
    DensityProfile prof;
    prof.params = params;
    prof.bp = branch_points(params);
    const BranchPointSet& bp = prof.bp;
    if (bp.regime == Regime::TwoCuts) {
        prof.support = {{-bp.z1, -bp.z2}, {bp.z2, bp.z1}};
    } else {
        prof.support = {{-bp.z1, bp.z1}};
    }

    const LambdaCalculator lam(params);
    const int N = nodes_per_interval - 1; // cosine grid over N+1 nodes
    const auto cc = clenshaw_curtis_weights(N);
    prof.mass = 0.0;

    for (const auto& [lo, hi] : prof.support) {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        // grids are exactly mirror-symmetric: negative-side nodes are the
        // negated positive-side nodes, and a straddling interval is mirrored
        // around its center
        std::vector<double> xs(nodes_per_interval);
        if (hi <= 0.0) {
            for (int k = 0; k <= N; ++k)
                xs[k] = -(-mid + half * std::cos(M_PI * (N - k) / N));
        } else {
            for (int k = 0; k <= N; ++k) xs[k] = mid + half * std::cos(M_PI * k / N);
            if (lo < 0.0 && hi > 0.0)
                for (int k = 0; k <= N; ++k)
                    if (2 * k > N) xs[k] = -xs[N - k];
        }
        // xs descends from hi to lo; interior nodes marched in two halves from
        // a safe interior entry (never across x = 0, where the vertical cut
        // crosses the axis).
        std::vector<double> rho_nodes(nodes_per_interval, 0.0);
        std::vector<double> h_nodes(nodes_per_interval, 0.0);

        auto run_scan = [&](std::vector<int> idx) {
            if (idx.empty()) return;
            std::vector<double> pts;
            pts.reserve(idx.size());
            for (int i : idx) pts.push_back(xs[i]);
            const auto scan = detail::scan_interval(params, bp, pts, lam);
            for (std::size_t j = 0; j < idx.size(); ++j) {
                rho_nodes[idx[j]] = scan.rho[j];
                h_nodes[idx[j]] = scan.h[j];
            }
        };

        if (params.separation == Separation::Super) {
            // experimental branch: pointwise bare evaluation, no rescaling
            for (int k = 1; k < N; ++k)
                rho_nodes[k] = density_at_ex(xs[k], params, bp).rho;
        } else
        // Every scan enters at a safe interior node and marches outward, so
        // the near-edge nodes are reached by continuation, never head-on.
        if (lo > 0.0 || hi < 0.0) {
            std::vector<int> toward_hi, toward_lo;
            for (int k = 1; k < N; ++k)
                (k <= N / 2 ? toward_hi : toward_lo).push_back(k);
            std::reverse(toward_hi.begin(), toward_hi.end()); // ascend from mid
            run_scan(toward_hi);
            run_scan(toward_lo); // descends from mid
        } else {
            // OneCut interval straddling 0: march each sign separately (the
            // vertical cut meets the axis at 0, so scans never cross it)
            std::vector<int> pos_desc, neg_desc;
            for (int k = 1; k < N; ++k) (xs[k] > 0.0 ? pos_desc : neg_desc).push_back(k);
            std::vector<int> pos_hi, pos_lo;
            for (int i : pos_desc) (xs[i] > 0.5 * hi ? pos_hi : pos_lo).push_back(i);
            std::reverse(pos_hi.begin(), pos_hi.end()); // ascend from hi/2 to hi
            run_scan(pos_hi);
            run_scan(pos_lo); // descend from hi/2 toward 0
            std::vector<int> neg_hi, neg_lo;
            for (int i : neg_desc) (xs[i] > 0.5 * lo ? neg_hi : neg_lo).push_back(i);
            std::reverse(neg_hi.begin(), neg_hi.end()); // ascend from lo/2 toward 0
            run_scan(neg_hi);
            run_scan(neg_lo); // descend from lo/2 to lo
        }

        // exact endpoints: rho vanishes; h extrapolated (it is analytic there)
        rho_nodes[0] = rho_nodes[N] = 0.0;
        if (params.separation == Separation::Sub) {
            if (std::abs(xs[0] - bp.z1) < 1e-12 * bp.z1)
                h_nodes[0] = -xs[0] * xs[0] / (2.0 * (1.0 - params.t));
            else
                h_nodes[0] = 3 * h_nodes[1] - 3 * h_nodes[2] + h_nodes[3];
            if (std::abs(xs[N] + bp.z1) < 1e-12 * bp.z1)
                h_nodes[N] = -xs[N] * xs[N] / (2.0 * (1.0 - params.t));
            else
                h_nodes[N] = 3 * h_nodes[N - 1] - 3 * h_nodes[N - 2] + h_nodes[N - 3];
        } // otherwise h stays zero on the unvalidated branch

        double interval_mass = 0.0;
        for (int k = 0; k <= N; ++k) interval_mass += cc[k] * rho_nodes[k];
        prof.mass += interval_mass * half;

        for (int k = N; k >= 0; --k) { // ascending x
            prof.grid.push_back(xs[k]);
            prof.rho.push_back(rho_nodes[k]);
            prof.h_grid.push_back(h_nodes[k]);
        }
    }

    prof.c1 = edge_constant(Edge::z1, params).c;
    if (bp.regime == Regime::TwoCuts) prof.c2 = edge_constant(Edge::z2, params).c;
    return prof;
}

/// h at a single point (the profile's h_grid is the grid version of this).
inline double h_function(double x, const ModelParams& params) {
    const LambdaCalculator lam(params);
    return lam.h(x);
}

} // namespace nibm
