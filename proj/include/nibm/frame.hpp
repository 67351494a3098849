#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "nibm/discriminant.hpp"
#include "nibm/quartic.hpp"

namespace nibm {

/// Large-z expansion of the four branches, second order. Two branches grow
/// linearly (offset -+ a/t), two stay bounded (+- b/(1-t)); the 1/(2z) terms
/// fix the residues at infinity and hence the labeling.
inline std::array<cplx, 4> far_field_xi(const ModelParams& p, cplx z) {
    const double t = p.t, a = p.a, b = p.b;
    const cplx lin = z / p.s2();
    const cplx half = 0.5 / z;
    return {lin - a / t - half, lin + a / t - half,
            cplx(b / (1 - t)) + half, cplx(-b / (1 - t)) + half};
}

inline double anchor_radius(const BranchPointSet& bp) {
    return 1e6 * std::max(1.0, bp.z1);
}

namespace detail {

struct MatchResult {
    std::array<cplx, 4> frame;
    double max_move = 0.0;
    double min_gap = 0.0;
};

// Greedy nearest assignment of new roots to previous labels.
inline MatchResult match_frame(const std::array<cplx, 4>& prev,
                               const std::array<cplx, 4>& roots) {
    MatchResult r;
    bool used_row[4] = {false, false, false, false};
    bool used_col[4] = {false, false, false, false};
    for (int pass = 0; pass < 4; ++pass) {
        double best = 0.0;
        int bi = -1, bj = -1;
        for (int i = 0; i < 4; ++i) {
            if (used_row[i]) continue;
            for (int j = 0; j < 4; ++j) {
                if (used_col[j]) continue;
                const double d = std::abs(prev[i] - roots[j]);
                if (bi < 0 || d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        r.frame[bi] = roots[bj];
        used_row[bi] = used_col[bj] = true;
        r.max_move = std::max(r.max_move, best);
    }
    r.min_gap = std::abs(r.frame[0] - r.frame[1]);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            r.min_gap = std::min(r.min_gap, std::abs(r.frame[i] - r.frame[j]));
    return r;
}

} // namespace detail

/// Tracks the labeled four-branch frame along user-driven moves, starting from
/// the far-field anchor on the positive real axis. Steps are halved whenever
/// the smallest root gap does not dominate the frame movement by the safety
/// factor, so cut crossings are followed smoothly and label swaps cannot
/// happen silently.
class FrameTracker {
public:
    explicit FrameTracker(const SpectralCurve& curve, const BranchPointSet& bp)
        : curve_(curve), scale_(std::max(1.0, bp.z1)) {
        z_ = cplx(anchor_radius(bp), 0.0);
        const auto pred = far_field_xi(curve_.params, z_);
        const auto roots = curve_roots(curve_, z_);
        bool used[4] = {false, false, false, false};
        for (int i = 0; i < 4; ++i) {
            int best = -1;
            for (int j = 0; j < 4; ++j) {
                if (used[j]) continue;
                if (best < 0 || std::abs(roots[j] - pred[i]) < std::abs(roots[best] - pred[i]))
                    best = j;
            }
            used[best] = true;
            frame_[i] = roots[best];
        }
    }

    cplx position() const { return z_; }
    const std::array<cplx, 4>& frame() const { return frame_; }
    bool ill_conditioned() const { return ill_conditioned_; }
    int steps_taken() const { return steps_; }

    static constexpr double safety_factor = 10.0;

    void move_to(cplx target) {
        while (z_ != target) {
            double step = 1.0;
            for (;;) {
                // step == 1 must land exactly (z + (t - z) can round elsewhere)
                const cplx zt = step == 1.0 ? target : z_ + (target - z_) * step;
                const bool forced = zt == z_; // remaining gap at ulp scale
                // first-order prediction keeps steps large where the branches
                // drift fast but smoothly (the far field, most of any path)
                std::array<cplx, 4> pred = frame_;
                for (int i = 0; i < 4; ++i) {
                    cplx d;
                    if (curve_.xi_derivative(z_, frame_[i], d)) pred[i] += d * (zt - z_);
                }
                const auto roots = curve_roots(curve_, forced ? target : zt);
                const auto m = detail::match_frame(pred, roots);
                ++steps_;
                if (m.min_gap >= safety_factor * m.max_move || m.max_move == 0.0 || forced) {
                    frame_ = m.frame;
                    z_ = forced ? target : zt;
                    ill_conditioned_ = ill_conditioned_ ||
                                       (forced && m.min_gap < safety_factor * m.max_move);
                    break;
                }
                if (std::abs((target - z_) * step) < 1e-13 * scale_) {
                    // Degenerate: either a branch point sits on the path or the
                    // path runs through a cut too close to one.
                    frame_ = m.frame;
                    z_ = zt;
                    ill_conditioned_ = true;
                    if (m.min_gap < 1e-7 * scale_)
                        throw PathError("branch tracking stalled near a degenerate point");
                    break;
                }
                step *= 0.5;
            }
            if (steps_ > 2'000'000) {
                std::ostringstream os;
                os << "branch tracking exceeded the step budget near z = (" << z_.real()
                   << ", " << z_.imag() << ")";
                throw PathError(os.str());
            }
        }
    }

private:
    SpectralCurve curve_;
    double scale_;
    cplx z_ = 0.0;
    std::array<cplx, 4> frame_{};
    bool ill_conditioned_ = false;
    int steps_ = 0;
};

/// Labeled branch values at a point, with residual diagnostics.
struct XiFrame {
    cplx z;
    std::array<cplx, 4> xi;
    std::string labeling_path;
    bool ill_conditioned = false;
    double max_residual = 0.0;
};

namespace detail {

inline double dist_to_real_segment(cplx z, double lo, double hi) {
    const double x = z.real(), y = z.imag();
    if (x < lo) return std::hypot(x - lo, y);
    if (x > hi) return std::hypot(x - hi, y);
    return std::abs(y);
}

inline double dist_to_imag_segment(cplx z, double lo, double hi) {
    return dist_to_real_segment(cplx(z.imag(), z.real()), lo, hi);
}

inline double dist_to_cross(cplx z, const BranchPointSet& bp) {
    double d;
    if (bp.regime == Regime::TwoCuts) {
        d = std::min(dist_to_real_segment(z, bp.z2, bp.z1),
                     dist_to_real_segment(z, -bp.z1, -bp.z2));
    } else {
        d = dist_to_real_segment(z, -bp.z1, bp.z1);
    }
    return std::min(d, dist_to_imag_segment(z, -bp.z3, bp.z3));
}

inline double dist_to_branch_points(cplx z, const BranchPointSet& bp) {
    double d = std::min(std::abs(z - bp.z1), std::abs(z + bp.z1));
    if (bp.regime == Regime::TwoCuts) {
        d = std::min({d, std::abs(z - bp.z2), std::abs(z + bp.z2)});
    } else {
        d = std::min({d, std::abs(z - cplx(0, bp.z2)), std::abs(z + cplx(0, bp.z2))});
    }
    return std::min({d, std::abs(z - cplx(0, bp.z3)), std::abs(z + cplx(0, bp.z3))});
}

// Waypoints from the anchor to z: a far arc (polygonized), a radial ray, and
// if z sits on an axis, a final quarter-turn at radius |z|. Every waypoint
// chord stays clear of the cut cross because all cuts lie on the axes within
// radius max(z1, z3).
inline std::vector<cplx> standard_waypoints(cplx z, const BranchPointSet& bp,
                                            std::string* description = nullptr) {
    const double zfar = anchor_radius(bp);
    std::vector<cplx> pts;
    pts.emplace_back(zfar, 0.0);

    double theta = std::arg(z);
    double final_theta = theta;
    bool dodge = false;
    const double r = std::abs(z);
    if (z.imag() == 0.0 && z.real() > 0.0 && r < bp.z1) {
        theta = M_PI / 4;        // positive real axis inside the cross radius
        dodge = true;
    } else if (z.imag() == 0.0 && z.real() < 0.0 && r < bp.z1) {
        theta = 3 * M_PI / 4;
        dodge = true;
    } else if (z.real() == 0.0 && z.imag() != 0.0 && r < bp.z3) {
        theta = (z.imag() > 0 ? 1 : -1) * M_PI / 4;
        dodge = true;
    }

    const int arc_steps = std::max(1, int(std::ceil(std::abs(theta) / (M_PI / 16))));
    for (int k = 1; k <= arc_steps; ++k)
        pts.push_back(std::polar(zfar, theta * k / arc_steps));
    pts.push_back(std::polar(r, theta));
    if (dodge) {
        const int steps = std::max(1, int(std::ceil(std::abs(final_theta - theta) / (M_PI / 32))));
        for (int k = 1; k <= steps; ++k)
            pts.push_back(std::polar(r, theta + (final_theta - theta) * k / steps));
    }
    pts.push_back(z); // exact endpoint (polar round-trip is inexact)
    if (description) {
        std::ostringstream os;
        os << "anchor " << zfar << " -> arc to arg " << theta << " -> radial to |z| " << r;
        if (dodge) os << " -> arc to arg " << final_theta;
        *description = os.str();
    }
    return pts;
}

} // namespace detail

/// Labeled branch values at z, continued from the far-field anchor along a
/// cut-avoiding path. Points exactly on a cut need a side and are rejected;
/// points hugging a real cut from one side are routed through a vertical
/// descent far from the branch points.
inline XiFrame xi_frame(cplx z, const ModelParams& params) {
    const BranchPointSet bp = branch_points(params);
    const SpectralCurve curve(params);
    const double scale = std::max(1.0, bp.z1);

    const bool on_cross = detail::dist_to_cross(z, bp) < 1e-14 * scale;
    if (on_cross && detail::dist_to_branch_points(z, bp) >= 1e-14 * scale)
        throw PathError("xi_frame: z lies on a cut; evaluate at x +- i*eps instead");

    XiFrame out;
    out.z = z;
    out.ill_conditioned =
        detail::dist_to_branch_points(z, bp) < params.tol.bp_scale * bp.z1;

    FrameTracker tracker(curve, bp);
    const bool hugging = z.imag() != 0.0 && std::abs(z.imag()) < 0.05 * scale &&
                         std::abs(z.real()) > 1e-12 * scale &&
                         std::abs(z.real()) < bp.z1 + 0.25 * scale;
    if (hugging) {
        // approach from above/below through a safe vertical, then slide
        const double s = z.imag() > 0 ? 1.0 : -1.0;
        const double sgn_x = z.real() >= 0 ? 1.0 : -1.0;
        const double x_safe = sgn_x * std::max(std::abs(z.real()), 0.25 * scale);
        const cplx w0(x_safe, s * 0.5 * scale);
        for (const auto& p : detail::standard_waypoints(w0, bp)) tracker.move_to(p);
        tracker.move_to(cplx(x_safe, z.imag()));
        tracker.move_to(z);
        out.labeling_path = "anchor -> descent above Re " + std::to_string(x_safe) +
                            " -> slide to z";
    } else {
        const auto pts = detail::standard_waypoints(z, bp, &out.labeling_path);
        for (const auto& p : pts) tracker.move_to(p);
    }
    out.xi = tracker.frame();
    out.ill_conditioned = out.ill_conditioned || tracker.ill_conditioned();
    for (const auto& xi : out.xi)
        out.max_residual = std::max(out.max_residual, curve.relative_residual(z, xi));
    return out;
}

/// Frames at a sequence of points marched continuously (the path is the
/// polyline through the points, starting from the standard path to points[0]).
inline std::vector<XiFrame> march_frames(const std::vector<cplx>& points,
                                         const ModelParams& params,
                                         const BranchPointSet& bp) {
    std::vector<XiFrame> out;
    if (points.empty()) return out;
    const SpectralCurve curve(params);
    FrameTracker tracker(curve, bp);
    for (const auto& p : detail::standard_waypoints(points[0], bp))
        tracker.move_to(p);
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        tracker.move_to(points[i]);
        XiFrame f;
        f.z = points[i];
        f.xi = tracker.frame();
        f.ill_conditioned = tracker.ill_conditioned();
        out.push_back(std::move(f));
    }
    return out;
}

namespace detail {

/// Waypoints that approach x + i*side*eps without grazing any branch point:
/// descend far from the imaginary axis, then slide horizontally at the final
/// height. Requires x != 0.
inline std::vector<cplx> boundary_descent(double x, int side, double eps0,
                                          const BranchPointSet& bp) {
    const double scale = std::max(1.0, bp.z1);
    const double r0 = 0.5 * scale;
    const double sgn_x = x >= 0 ? 1.0 : -1.0;
    const double x_safe = sgn_x * std::max(std::abs(x), 0.25 * scale);
    const double s = side >= 0 ? 1.0 : -1.0;
    std::vector<cplx> pts;
    pts.emplace_back(x_safe, s * r0);
    pts.emplace_back(x_safe, s * eps0);
    if (x_safe != x) pts.emplace_back(x, s * eps0);
    pts.emplace_back(x, s * eps0 / 10.0);
    pts.emplace_back(x, s * eps0 / 100.0);
    return pts;
}

// Extrapolation weights to eps = 0 for samples at eps * {1, 1/10, 1/100}.
inline std::array<double, 3> richardson3() {
    const double x0 = 1.0, x1 = 0.1, x2 = 0.01;
    return {(x1 * x2) / ((x0 - x1) * (x0 - x2)),
            (x0 * x2) / ((x1 - x0) * (x1 - x2)),
            (x0 * x1) / ((x2 - x0) * (x2 - x1))};
}

} // namespace detail

/// Boundary values xi_j(x +- i0) by evaluating at three heights
/// eps * {1, 1/10, 1/100}, eps = 1e-6 * max(1, z1), and extrapolating the
/// quadratic through them to 0.
inline std::array<cplx, 4> boundary_frame(double x, int side, const ModelParams& params,
                                          const BranchPointSet& bp) {
    if (x == 0.0)
        throw PathError("boundary_frame: x = 0 sits where cuts meet; use x != 0");
    const SpectralCurve curve(params);
    const double eps0 = 1e-6 * std::max(1.0, bp.z1);
    const auto pts = detail::boundary_descent(x, side, eps0, bp);

    FrameTracker tracker(curve, bp);
    for (const auto& p : detail::standard_waypoints(pts.front(), bp)) tracker.move_to(p);
    std::array<std::array<cplx, 4>, 3> vals;
    int slot = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        tracker.move_to(pts[i]);
        if (std::abs(pts[i].real() - x) == 0.0) vals[slot++] = tracker.frame();
    }
    const auto w = detail::richardson3();
    std::array<cplx, 4> out;
    for (int j = 0; j < 4; ++j)
        out[j] = w[0] * vals[0][j] + w[1] * vals[1][j] + w[2] * vals[2][j];
    return out;
}

} // namespace nibm
