#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace nibm {

/// Gauss-Legendre nodes and weights on [-1,1], any order, any real type.
/// Newton iteration on the three-term recurrence, seeded by the Chebyshev
/// angle approximation.
template <class Real>
std::pair<std::vector<Real>, std::vector<Real>> gauss_legendre(int m) {
    std::vector<Real> x(m), w(m);
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int i = 0; i < (m + 1) / 2; ++i) {
        Real xi = Real(-std::cos(M_PI * (i + 0.75) / (m + 0.5)));
        Real dp = 0;
        for (int it = 0; it < 200; ++it) {
            Real p0 = 1, p1 = xi;
            for (int k = 2; k <= m; ++k) {
                Real p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (xi * p1 - p0) / (xi * xi - 1);
            const Real dx = p1 / dp;
            xi -= dx;
            if (abs(dx) <= 4 * eps * (1 + abs(xi))) break;
        }
        x[i] = xi;
        x[m - 1 - i] = -xi;
        const Real wi = 2 / ((1 - xi * xi) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    return {x, w};
}

inline const std::pair<std::vector<double>, std::vector<double>>& gl15() {
    static const auto rule = gauss_legendre<double>(15);
    return rule;
}

namespace detail {

template <class F>
double gl_panel(const F& f, double a, double b) {
    const auto& [x, w] = gl15();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(mid + half * x[i]);
    return s * half;
}

template <class F>
double adaptive_gl_rec(const F& f, double a, double b, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gl_panel(f, a, mid);
    const double right = gl_panel(f, mid, b);
    const double delta = left + right - whole;
    if (std::abs(delta) <= tol || depth >= 48) return left + right;
    return adaptive_gl_rec(f, a, mid, left, tol * 0.5, depth + 1) +
           adaptive_gl_rec(f, mid, b, right, tol * 0.5, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Legendre on [a,b] with mixed absolute/relative target.
template <class F>
double adaptive_gl(const F& f, double a, double b, double abs_tol = 1e-12,
                   double rel_tol = 1e-12) {
    const double whole = detail::gl_panel(f, a, b);
    const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    return detail::adaptive_gl_rec(f, a, b, whole, tol, 0);
}

/// Clenshaw-Curtis weights for the N+1 nodes x_k = cos(k pi / N), k = 0..N.
/// Classic cosine-sum formula, O(N^2); exact for polynomials of degree N
/// (odd N) resp. N+1.
inline std::vector<double> clenshaw_curtis_weights(int N) {
    std::vector<double> w(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) {
        const double theta = M_PI * k / N;
        double s = 1.0;
        for (int j = 1; j <= N / 2; ++j) {
            const double bj = (2 * j == N) ? 1.0 : 2.0;
            s -= bj * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
        }
        const double ck = (k == 0 || k == N) ? 1.0 : 2.0;
        w[k] = ck * s / N;
    }
    return w;
}

} // namespace nibm
