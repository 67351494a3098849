#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nibm/biorth.hpp"
#include "nibm/density.hpp"
#include "nibm/special.hpp"

namespace nibm {

struct KernelEvaluation {
    double x = 0, y = 0;
    double K = 0;     // kernel value
    double K_hat = 0; // e^{n(h(x)-h(y))} K
    int n = 0;
};

/// Kernel plus its rescaled form. h defaults to zero (the rescaling drops out
/// of every correlation determinant, so callers that do not care may omit it).
inline KernelEvaluation kernel_eval(double x, double y, const BiorthogonalSystem& sys,
                                    const std::function<double(double)>& h = {}) {
    KernelEvaluation e;
    e.x = x;
    e.y = y;
    e.n = sys.n();
    e.K = sys.kernel(x, y);
    const double hx = h ? h(x) : 0.0;
    const double hy = h ? h(y) : 0.0;
    e.K_hat = std::exp(e.n * (hx - hy)) * e.K;
    return e;
}

enum class ScalingEdge { PlusZ1, MinusZ1, PlusZ2, MinusZ2 };

inline const char* edge_name(ScalingEdge e) {
    switch (e) {
        case ScalingEdge::PlusZ1: return "z1";
        case ScalingEdge::MinusZ1: return "-z1";
        case ScalingEdge::PlusZ2: return "z2";
        default: return "-z2";
    }
}

/// Grid comparison of the gauge-invariant pair product K(x,y) K(y,x) (which
/// equals K_hat(x,y) K_hat(y,x) identically) against the squared reference
/// kernel, across an n sweep.
struct ScalingReport {
    std::string mode; // "bulk" or "edge"
    double x0 = 0.0;  // bulk center, or the edge location
    std::string edge_id;
    double scale_constant = 0.0; // rho(x0) for bulk, c1/c2 for edge
    std::vector<int> n_list;
    std::vector<double> u_grid, v_grid;
    std::vector<std::vector<double>> measured; // per n, row-major over (u,v)
    std::vector<double> reference;             // row-major over (u,v)
    std::vector<double> sup_errors;            // per n
    double rate = 0.0; // least-squares slope of log sup_err vs log n
};

namespace detail {

inline double fit_rate(const std::vector<int>& ns, const std::vector<double>& errs) {
    const std::size_t m = ns.size();
    if (m < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(double(ns[i]));
        const double ly = std::log(std::max(errs[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline void run_pair_comparison(ScalingReport& rep, const ModelParams& params,
                                int precision_bits,
                                const std::function<double(int, double)>& x_of,
                                const std::function<double(int)>& norm_of) {
    const std::size_t nu = rep.u_grid.size(), nv = rep.v_grid.size();
    for (int n : rep.n_list) {
        ModelParams pn = params;
        pn.n = n;
        const BiorthogonalSystem sys(pn, precision_bits);
        const double norm = norm_of(n);
        std::vector<double> meas(nu * nv, 0.0);
        double sup = 0.0;
        for (std::size_t i = 0; i < nu; ++i) {
            const double xu = x_of(n, rep.u_grid[i]);
            for (std::size_t j = 0; j < nv; ++j) {
                const double xv = x_of(n, rep.v_grid[j]);
                const double prod = sys.kernel(xu, xv) * sys.kernel(xv, xu);
                const double val = prod / (norm * norm);
                meas[i * nv + j] = val;
                sup = std::max(sup, std::abs(val - rep.reference[i * nv + j]));
            }
        }
        rep.measured.push_back(std::move(meas));
        rep.sup_errors.push_back(sup);
    }
    rep.rate = fit_rate(rep.n_list, rep.sup_errors);
}

} // namespace detail

/// Bulk comparison at x0 strictly inside the support: points x0 + u/(n rho0),
/// reference sin(pi(u-v))/(pi(u-v)) squared.
inline ScalingReport bulk_scaling_check(double x0, const std::vector<int>& n_list,
                                        const std::vector<double>& u_grid,
                                        const std::vector<double>& v_grid,
                                        const ModelParams& params,
                                        int precision_bits = 0) {
    const BranchPointSet bp = branch_points(params);
    const double tau = params.tol.bp_scale * bp.z1;
    const double ax = std::abs(x0);
    const bool inside = bp.regime == Regime::TwoCuts
                            ? (ax > bp.z2 + tau && ax < bp.z1 - tau)
                            : (ax < bp.z1 - tau && ax > tau);
    if (!inside)
        throw DomainError("bulk_scaling_check: x0 must lie strictly inside the support");
    const double rho0 = density_at_ex(x0, params, bp).rho;
    if (rho0 <= 0.0)
        throw DomainError("bulk_scaling_check: density vanishes at x0");

    ScalingReport rep;
    rep.mode = "bulk";
    rep.x0 = x0;
    rep.scale_constant = rho0;
    rep.n_list = n_list;
    rep.u_grid = u_grid;
    rep.v_grid = v_grid;
    rep.reference.resize(u_grid.size() * v_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i)
        for (std::size_t j = 0; j < v_grid.size(); ++j) {
            const double s = sine_kernel(u_grid[i], v_grid[j]);
            rep.reference[i * v_grid.size() + j] = s * s;
        }
    detail::run_pair_comparison(
        rep, params, precision_bits,
        [&](int n, double u) { return x0 + u / (n * rho0); },
        [&](int n) { return n * rho0; });
    return rep;
}

/// Edge comparison: points z1 + u/(c1 n)^{2/3} at the outer edges, and the
/// inward-oriented z2 - u/(c2 n)^{2/3} at the inner ones; reference is the
/// squared Airy kernel.
inline ScalingReport edge_scaling_check(ScalingEdge edge, const std::vector<int>& n_list,
                                        const std::vector<double>& u_grid,
                                        const std::vector<double>& v_grid,
                                        const ModelParams& params,
                                        int precision_bits = 0) {
    const BranchPointSet bp = branch_points(params);
    const bool inner = edge == ScalingEdge::PlusZ2 || edge == ScalingEdge::MinusZ2;
    if (inner && bp.regime != Regime::TwoCuts)
        throw DomainError("edge_scaling_check: z2 is not a real edge in OneCut");
    const EdgeFit fit = edge_constant(inner ? Edge::z2 : Edge::z1, params);
    const double c = fit.c;

    double edge_x = inner ? bp.z2 : bp.z1;
    double orient = inner ? -1.0 : +1.0; // inward flip at the inner edges
    if (edge == ScalingEdge::MinusZ1 || edge == ScalingEdge::MinusZ2) {
        edge_x = -edge_x;
        orient = -orient;
    }

    ScalingReport rep;
    rep.mode = "edge";
    rep.x0 = edge_x;
    rep.edge_id = edge_name(edge);
    rep.scale_constant = c;
    rep.n_list = n_list;
    rep.u_grid = u_grid;
    rep.v_grid = v_grid;
    rep.reference.resize(u_grid.size() * v_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i)
        for (std::size_t j = 0; j < v_grid.size(); ++j) {
            const double k = airy_kernel(u_grid[i], v_grid[j]);
            rep.reference[i * v_grid.size() + j] = k * k;
        }
    detail::run_pair_comparison(
        rep, params, precision_bits,
        [=](int n, double u) { return edge_x + orient * u / std::pow(c * n, 2.0 / 3.0); },
        [=](int n) { return std::pow(c * n, 2.0 / 3.0); });
    return rep;
}

/// Diagonal comparison rows for (1/n) K_n(x,x) against rho(x).
struct DiagComparison {
    std::vector<double> x, k_over_n, rho, abs_err;
    double sup_err = 0.0;
};

inline DiagComparison diag_comparison(const ModelParams& params, int n,
                                      const std::vector<double>& xs,
                                      int precision_bits = 0) {
    ModelParams pn = params;
    pn.n = n;
    const BranchPointSet bp = branch_points(params);
    const BiorthogonalSystem sys(pn, precision_bits);
    DiagComparison out;
    for (double x : xs) {
        const double kd = sys.kernel(x, x) / n;
        const double rho = density_at_ex(x, params, bp).rho;
        out.x.push_back(x);
        out.k_over_n.push_back(kd);
        out.rho.push_back(rho);
        out.abs_err.push_back(std::abs(kd - rho));
        out.sup_err = std::max(out.sup_err, std::abs(kd - rho));
    }
    return out;
}

} // namespace nibm
