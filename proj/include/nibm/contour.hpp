#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nibm/frame.hpp"
#include "nibm/quadrature.hpp"

namespace nibm {

/// Straight path leg. A sqrt reparametrization at an endpoint absorbs the
/// square-root behavior of the branches at a branch point sitting there:
/// gamma(s) = p0 + s^2 (p1 - p0) keeps the integrand analytic in s.
struct PathLeg {
    cplx p0, p1;
    bool sqrt_at_p0 = false;
    bool sqrt_at_p1 = false;
};

using ContourPath = std::vector<PathLeg>;

/// Integrates the labeled branches along paths with a persistent tracked
/// frame. All four sheets accumulate simultaneously since every frame carries
/// all of them.
class TrackedIntegrator {
public:
    TrackedIntegrator(const ModelParams& params, const BranchPointSet& bp)
        : curve_(params), bp_(bp), tracker_(curve_, bp) {}

    cplx position() const { return tracker_.position(); }
    const std::array<cplx, 4>& frame() const { return tracker_.frame(); }

    /// Reposition along the straight line from the current point.
    void move_to(cplx z) { tracker_.move_to(z); }

    /// Reposition along the standard cut-avoiding route from the anchor side.
    void move_standard(cplx z) {
        for (const auto& p : detail::standard_waypoints(z, bp_)) tracker_.move_to(p);
    }

    /// Integral over one leg starting from the current tracker position, which
    /// must already be at (or safely adjacent to) the leg's start. Composite
    /// Gauss-Legendre with panel doubling; refinement re-walks the leg, which
    /// is safe because legs are straight.
    std::array<cplx, 4> integrate_leg(const PathLeg& leg, double rel_tol = 1e-12,
                                      double abs_tol = 1e-13, int start_panels = 4) {
        std::array<cplx, 4> prev{};
        bool have_prev = false;
        for (int panels = start_panels; panels <= 4096; panels *= 2) {
            std::array<double, 4> noise{};
            auto cur = leg_sum(leg, panels, noise);
            if (have_prev) {
                bool ok = true;
                for (int j = 0; j < 4; ++j) {
                    const double err = std::abs(cur[j] - prev[j]);
                    const double scale =
                        std::max({abs_tol, 4.0 * noise[j], rel_tol * std::abs(cur[j])});
                    if (err > scale) ok = false;
                }
                if (ok) {
                    end_leg(leg);
                    return cur;
                }
            }
            prev = cur;
            have_prev = true;
            if (panels >= 256) break; // uniform refinement has stalled
        }
        // a square-root point just beyond a leg end defeats uniform panels;
        // geometric grading toward both ends restores fast convergence
        have_prev = false;
        for (int levels = 20; levels <= 44; levels += 6) {
            std::array<double, 4> noise{};
            auto cur = graded_sum(leg, levels, noise);
            if (have_prev) {
                bool ok = true;
                for (int j = 0; j < 4; ++j) {
                    const double err = std::abs(cur[j] - prev[j]);
                    const double scale =
                        std::max({abs_tol, 4.0 * noise[j], rel_tol * std::abs(cur[j])});
                    if (err > scale) ok = false;
                }
                if (ok) {
                    end_leg(leg);
                    return cur;
                }
            }
            prev = cur;
            have_prev = true;
        }
        throw PathError("leg integration failed to converge; the path likely "
                        "grazes a cut or branch point");
    }

    /// Integral over a whole path. The tracker is routed to the start first:
    /// to the far end of an initial sqrt leg (its base is a branch point),
    /// otherwise to the first point directly.
    std::array<cplx, 4> integrate(const ContourPath& path, double rel_tol = 1e-11,
                                  double abs_tol = 1e-13) {
        std::array<cplx, 4> total{};
        if (path.empty()) return total;
        move_standard(path.front().sqrt_at_p0 ? path.front().p1 : path.front().p0);
        for (const auto& leg : path) {
            const auto part = integrate_leg(leg, rel_tol, abs_tol);
            for (int j = 0; j < 4; ++j) total[j] += part[j];
        }
        return total;
    }

private:
    static cplx gamma_of(const PathLeg& leg, double s, cplx& dgamma) {
        const cplx d = leg.p1 - leg.p0;
        if (leg.sqrt_at_p0) {
            dgamma = 2.0 * s * d;
            return leg.p0 + s * s * d;
        }
        if (leg.sqrt_at_p1) {
            const double u = 1.0 - s;
            dgamma = 2.0 * u * d;
            return leg.p1 - u * u * d;
        }
        dgamma = d;
        return leg.p0 + s * d;
    }

    void end_leg(const PathLeg& leg) {
        if (!leg.sqrt_at_p1) tracker_.move_to(leg.p1);
        // otherwise stay at the last interior node; p1 is a branch point
    }

    std::array<cplx, 4> graded_sum(const PathLeg& leg, int levels,
                                   std::array<double, 4>& noise) {
        // dyadic breakpoints clustering at both ends of [0,1]
        std::vector<double> bks;
        bks.push_back(0.0);
        for (int k = levels; k >= 2; --k) bks.push_back(std::ldexp(1.0, -k));
        bks.push_back(0.5);
        for (int k = 2; k <= levels; ++k) bks.push_back(1.0 - std::ldexp(1.0, -k));
        bks.push_back(1.0);
        const auto& [xs, ws] = gl15();
        std::array<cplx, 4> acc{};
        noise = {0, 0, 0, 0};
        for (std::size_t p = 0; p + 1 < bks.size(); ++p) {
            const double mid = 0.5 * (bks[p] + bks[p + 1]);
            const double half = 0.5 * (bks[p + 1] - bks[p]);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double s = mid + half * xs[i];
                cplx dg;
                const cplx zs = gamma_of(leg, s, dg);
                tracker_.move_to(zs);
                const auto& f = tracker_.frame();
                for (int j = 0; j < 4; ++j) {
                    acc[j] += ws[i] * half * f[j] * dg;
                    noise[j] += ws[i] * half * std::abs(dg) *
                                (curve_.root_noise(zs, f[j]) +
                                 16.0 * 2.2e-16 * std::abs(f[j]));
                }
            }
        }
        return acc;
    }

    // Leg quadrature plus an accumulated bound on the quadrature-sum noise:
    // per-node root uncertainty (which dominates for the fast-growing pair in
    // the far field) plus plain summation roundoff.
    std::array<cplx, 4> leg_sum(const PathLeg& leg, int panels,
                                std::array<double, 4>& noise) {
        const auto& [xs, ws] = gl15();
        std::array<cplx, 4> acc{};
        noise = {0, 0, 0, 0};
        for (int p = 0; p < panels; ++p) {
            const double s0 = double(p) / panels, s1 = double(p + 1) / panels;
            const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double s = mid + half * xs[i];
                cplx dg;
                const cplx zs = gamma_of(leg, s, dg);
                tracker_.move_to(zs);
                const auto& f = tracker_.frame();
                for (int j = 0; j < 4; ++j) {
                    acc[j] += ws[i] * half * f[j] * dg;
                    noise[j] += ws[i] * half * std::abs(dg) *
                                (curve_.root_noise(zs, f[j]) +
                                 16.0 * 2.2e-16 * std::abs(f[j]));
                }
            }
        }
        return acc;
    }

    SpectralCurve curve_;
    BranchPointSet bp_;
    FrameTracker tracker_;
};

/// (1/2 pi i) of the tracked integral of xi_sheet around a closed polyline.
/// The contour may cross cuts of other sheets (the frame follows smoothly);
/// the tracked value of the requested sheet must return to itself, otherwise
/// the loop is not closed for that sheet and there is no period.
inline double period_integral(int sheet, const std::vector<cplx>& vertices,
                              const ModelParams& params) {
    if (sheet < 1 || sheet > 4) throw DomainError("period_integral: sheet must be 1..4");
    if (vertices.size() < 3) throw DomainError("period_integral: need a closed polyline");
    const BranchPointSet bp = branch_points(params);

    TrackedIntegrator integ(params, bp);
    integ.move_standard(vertices.front());
    const cplx start_value = integ.frame()[sheet - 1];

    cplx total = 0.0;
    // per-leg absolute target: the period itself is O(1) even when the legs
    // are huge, so relative-only control is not enough
    const double leg_abs = 2.0 * M_PI * params.tol.period / (20.0 * double(vertices.size()));
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const cplx p0 = vertices[k];
        const cplx p1 = vertices[(k + 1) % vertices.size()];
        if (p0 == p1) continue;
        total += integ.integrate_leg({p0, p1}, 1e-12, leg_abs)[sheet - 1];
    }
    const double scale = std::max(1.0, bp.z1);
    if (std::abs(integ.frame()[sheet - 1] - start_value) > 1e-6 * scale)
        throw PathError("period_integral: contour is not closed for this sheet "
                        "(nontrivial monodromy)");

    const cplx value = total / (2.0 * M_PI * cplx(0.0, 1.0));
    if (std::abs(value.imag()) > 10 * params.tol.period)
        throw PathError("period_integral: non-real period; branch tracking suspect");
    return value.real();
}

inline std::vector<cplx> circle_contour(cplx center, double radius, int segments = 64) {
    std::vector<cplx> v;
    v.reserve(segments);
    for (int k = 0; k < segments; ++k)
        v.push_back(center + std::polar(radius, 2.0 * M_PI * k / segments));
    return v;
}

inline std::vector<cplx> rectangle_contour(double x_lo, double x_hi, double y_lo,
                                           double y_hi) {
    return {cplx(x_lo, y_lo), cplx(x_hi, y_lo), cplx(x_hi, y_hi), cplx(x_lo, y_hi)};
}

/// Antiderivatives of the branches: lambda_1, lambda_3 based at z1; lambda_2,
/// lambda_4 based at -z1 approached from above resp. below, both shifted by
/// the matching constant c. c glues sheets 3,4 at i z3 for t < a/(a+b) and
/// sheets 1,2 there otherwise. Paths avoid the cut cross and (-inf, -z1].
class LambdaCalculator {
public:
    explicit LambdaCalculator(const ModelParams& params)
        : params_(params), bp_(branch_points(params)) {
        r0_ = 0.5 * bp_.z1;
        rbig_ = 2.0 * std::max(bp_.z1, bp_.z3);
    }

    const BranchPointSet& bp() const { return bp_; }

    cplx constant_c() const {
        ensure_constant();
        return c_;
    }

    /// lambda_sheet(z) for z off the cuts and off (-inf, -z1].
    cplx lambda(int sheet, cplx z) const {
        check_sheet(sheet);
        if (z.imag() == 0.0 && z.real() <= -bp_.z1)
            throw DomainError("lambda: z on the excluded ray (-inf, -z1]");
        const double tau = params_.tol.bp_scale * bp_.z1;
        if (detail::dist_to_cross(z, bp_) < tau &&
            detail::dist_to_branch_points(z, bp_) >= tau)
            throw PathError("lambda: z lies on a cut; evaluate at x +- i*eps");
        TrackedIntegrator integ(params_, bp_);
        cplx v = integ.integrate(path_to(sheet, z))[sheet - 1];
        if (sheet == 2 || sheet == 4) {
            ensure_constant();
            v += c_;
        }
        return v;
    }

    /// Boundary value lambda_{sheet,+-}(x) with the same three-height
    /// extrapolation used for boundary branch values.
    cplx lambda_boundary(int sheet, double x, int side = +1) const {
        check_sheet(sheet);
        if (x == 0.0)
            throw PathError("lambda_boundary: x = 0 sits where cuts meet");
        const double eps0 = 1e-6 * std::max(1.0, bp_.z1);
        const auto pts = detail::boundary_descent(x, side, eps0, bp_);

        TrackedIntegrator integ(params_, bp_);
        ContourPath head = path_to(sheet, pts.front());
        std::array<cplx, 3> vals;
        int slot = 0;
        cplx acc = integ.integrate(head)[sheet - 1];
        for (std::size_t i = 1; i < pts.size(); ++i) {
            acc += integ.integrate_leg({pts[i - 1], pts[i]})[sheet - 1];
            if (pts[i].real() == x) vals[slot++] = acc;
        }
        const auto w = detail::richardson3();
        cplx v = w[0] * vals[0] + w[1] * vals[1] + w[2] * vals[2];
        if (sheet == 2 || sheet == 4) {
            ensure_constant();
            v += c_;
        }
        return v;
    }

    /// Rescaling function h on the open support: for x > 0 built from sheets
    /// 1 and 3, mirrored through sheets 2 and 4 for x < 0.
    double h(double x) const {
        if (x == 0.0)
            throw DomainError("h: x = 0 sits on the sheet boundary");
        if (bp_.regime == Regime::TwoCuts) {
            if (std::abs(x) <= bp_.z2 || std::abs(x) >= bp_.z1)
                throw DomainError("h: x outside the open support");
        } else if (std::abs(x) >= bp_.z1) {
            throw DomainError("h: x outside the open support");
        }
        const cplx l_a = lambda_boundary(x > 0 ? 1 : 2, x, +1);
        const cplx l_b = lambda_boundary(x > 0 ? 3 : 4, x, +1);
        return 0.5 * (l_a.real() + l_b.real()) - x * x / (2.0 * (1.0 - params_.t));
    }

    /// Path from the sheet's base point to z (z off the cuts).
    ContourPath path_to(int sheet, cplx z) const {
        ContourPath path;
        const cplx base = (sheet == 1 || sheet == 3) ? cplx(bp_.z1, 0.0)
                                                     : cplx(-bp_.z1, 0.0);
        // points close to the base are reached by one sqrt leg; routing them
        // through the ring would end with a leg grazing the branch point.
        // sheets 2 and 4 keep their prescribed departure side.
        const bool right_side = sheet == 1 || sheet == 3 ||
                                (sheet == 2 && z.imag() > 0.0) ||
                                (sheet == 4 && z.imag() < 0.0);
        if (std::abs(z - base) < 0.5 * r0_ && right_side) {
            path.push_back({base, z, /*sqrt_at_p0=*/true});
            return path;
        }
        cplx elbow;
        if (sheet == 1 || sheet == 3) {
            elbow = cplx(bp_.z1, r0_);
        } else if (sheet == 2) {
            elbow = cplx(-bp_.z1, r0_);
        } else {
            elbow = cplx(-bp_.z1, -r0_);
        }
        path.push_back({base, elbow, true});
        if (z != elbow) connect(path, elbow, z);
        return path;
    }

private:
    static void check_sheet(int sheet) {
        if (sheet < 1 || sheet > 4) throw DomainError("lambda: sheet must be 1..4");
    }

    // Route from `from` to `to` through the safe ring of radius rbig_,
    // sweeping angles directly (never across the ray arg = pi).
    void connect(ContourPath& path, cplx from, cplx to) const {
        const double th_from = std::arg(from);
        double th_to = std::arg(to);
        const double r_to = std::abs(to);
        bool dodge = false;
        const double th_final = th_to;
        if (to.imag() == 0.0 && std::abs(to.real()) < bp_.z1 && to.real() != 0.0) {
            th_to = to.real() > 0 ? M_PI / 4 : 3 * M_PI / 4;
            dodge = true;
        } else if (to.real() == 0.0 && std::abs(to.imag()) < bp_.z3) {
            th_to = (to.imag() > 0 ? 1 : -1) * M_PI / 4;
            dodge = true;
        }
        const double R = std::max(rbig_, 1.25 * r_to);
        cplx cur = from;
        auto add = [&](cplx next) {
            if (next != cur) path.push_back({cur, next});
            cur = next;
        };
        add(std::polar(R, th_from));
        const int arc_steps =
            std::max(1, int(std::ceil(std::abs(th_to - th_from) / (M_PI / 16))));
        for (int k = 1; k <= arc_steps; ++k)
            add(std::polar(R, th_from + (th_to - th_from) * k / arc_steps));
        add(std::polar(r_to, th_to));
        if (dodge) {
            const int steps =
                std::max(1, int(std::ceil(std::abs(th_final - th_to) / (M_PI / 32))));
            for (int k = 1; k <= steps; ++k)
                add(std::polar(r_to, th_to + (th_final - th_to) * k / steps));
        }
        add(to);
    }

    void ensure_constant() const {
        if (have_c_) return;
        const double t_star = params_.a / (params_.a + params_.b);
        const cplx top(0.0, bp_.z3);
        const cplx above(0.0, bp_.z3 + 0.5 * std::max(bp_.z3, bp_.z1));
        // raw integral (no constant) from the sheet's base into i z3
        auto raw_to_top = [&](int sheet) {
            TrackedIntegrator integ(params_, bp_);
            ContourPath p = path_to(sheet, above);
            p.push_back({above, top, false, /*sqrt_at_p1=*/true});
            return integ.integrate(p)[sheet - 1];
        };
        if (params_.t < t_star)
            c_ = raw_to_top(3) - raw_to_top(4);
        else
            c_ = raw_to_top(1) - raw_to_top(2);
        have_c_ = true;
    }

    ModelParams params_;
    BranchPointSet bp_;
    double r0_;
    double rbig_;
    mutable bool have_c_ = false;
    mutable cplx c_ = 0.0;
};

} // namespace nibm
