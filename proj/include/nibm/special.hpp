#pragma once

#include <cmath>

namespace nibm {

/// sin(pi(u-v)) / (pi(u-v)) with the removable singularity handled.
inline double sine_kernel(double u, double v) {
    const double d = M_PI * (u - v);
    if (std::abs(d) < 1e-4) {
        const double d2 = d * d;
        return 1.0 - d2 / 6.0 * (1.0 - d2 / 20.0);
    }
    return std::sin(d) / d;
}

namespace detail {

// Maclaurin solutions of y'' = x y:  f(0)=1, f'(0)=0  and  g(0)=0, g'(0)=1.
inline void airy_series(double x, double& f, double& fp, double& g, double& gp) {
    const double x3 = x * x * x;
    double tf = 1.0, tg = x;
    f = tf;
    fp = 0.0;
    g = tg;
    gp = 1.0;
    for (int m = 0; m < 80; ++m) {
        const int pf = 3 * m;     // current power in f
        const int pg = 3 * m + 1; // current power in g
        tf *= x3 / ((pf + 3) * (pf + 2));
        tg *= x3 / ((pg + 3) * (pg + 2));
        f += tf;
        g += tg;
        if (x != 0.0) {
            fp += tf * (pf + 3) / x;
            gp += tg * (pg + 3) / x;
        }
        if (std::abs(tf) < 1e-18 * std::abs(f) && std::abs(tg) < 1e-18 * std::abs(g))
            break;
    }
}

// u_k, v_k coefficients of the large-|x| expansions.
inline void airy_uv(int k_max, double* u, double* v) {
    u[0] = v[0] = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 1.0) / (72.0 * k);
        v[k] = u[k] * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
    }
}

} // namespace detail

/// Airy Ai and Ai' for real argument: Maclaurin series up to |x| = 4.8 matched
/// to the standard large-|x| expansions beyond. Series constants come from
/// Gamma(1/3), Gamma(2/3).
inline void airy_ai(double x, double& ai, double& aip) {
    static const double c1 = 1.0 / (std::pow(3.0, 2.0 / 3.0) * std::tgamma(2.0 / 3.0));
    static const double c2 = 1.0 / (std::pow(3.0, 1.0 / 3.0) * std::tgamma(1.0 / 3.0));
    const double ax = std::abs(x);
    if (ax <= 4.8) {
        double f, fp, g, gp;
        detail::airy_series(x, f, fp, g, gp);
        ai = c1 * f - c2 * g;
        aip = c1 * fp - c2 * gp;
        return;
    }
    constexpr int K = 14;
    double u[K + 1], v[K + 1];
    detail::airy_uv(K, u, v);
    const double zeta = 2.0 / 3.0 * ax * std::sqrt(ax);
    const double q = std::pow(ax, 0.25);
    if (x > 0) {
        double su = 0.0, sv = 0.0, pw = 1.0;
        double prev = 1e300;
        for (int k = 0; k <= K; ++k) {
            const double term = u[k] * pw;
            if (std::abs(term) > prev) break; // divergence onset
            su += (k % 2 ? -term : term);
            sv += (k % 2 ? -v[k] * pw : v[k] * pw);
            prev = std::abs(term);
            pw /= zeta;
        }
        const double e = std::exp(-zeta) / (2.0 * std::sqrt(M_PI));
        ai = e / q * su;
        aip = -e * q * sv;
        return;
    }
    // oscillatory regime
    double se_u = 0.0, so_u = 0.0, se_v = 0.0, so_v = 0.0;
    double pw = 1.0;
    for (int k = 0; 2 * k <= K; ++k) {
        const double sgn = (k % 2 ? -1.0 : 1.0);
        se_u += sgn * u[2 * k] * pw;
        se_v += sgn * v[2 * k] * pw;
        if (2 * k + 1 <= K) {
            so_u += sgn * u[2 * k + 1] * pw / zeta;
            so_v += sgn * v[2 * k + 1] * pw / zeta;
        }
        pw /= zeta * zeta;
    }
    const double c = std::cos(zeta - M_PI / 4.0), s = std::sin(zeta - M_PI / 4.0);
    ai = (c * se_u + s * so_u) / (std::sqrt(M_PI) * q);
    aip = (s * se_v - c * so_v) * q / std::sqrt(M_PI);
}

inline double airy_Ai(double x) {
    double ai, aip;
    airy_ai(x, ai, aip);
    return ai;
}

inline double airy_Aip(double x) {
    double ai, aip;
    airy_ai(x, ai, aip);
    return aip;
}

/// (Ai(u)Ai'(v) - Ai'(u)Ai(v)) / (u - v), with the confluent diagonal limit
/// Ai'(u)^2 - u Ai(u)^2.
inline double airy_kernel(double u, double v) {
    if (std::abs(u - v) < 1e-7) {
        const double m = 0.5 * (u + v);
        double ai, aip;
        airy_ai(m, ai, aip);
        return aip * aip - m * ai * ai;
    }
    double aiu, aipu, aiv, aipv;
    airy_ai(u, aiu, aipu);
    airy_ai(v, aiv, aipv);
    return (aiu * aipv - aipu * aiv) / (u - v);
}

} // namespace nibm
