#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nibm/errors.hpp"
#include "nibm/model.hpp"
#include "nibm/parallel.hpp"
#include "nibm/quartic.hpp"
#include "nibm/rng.hpp"

namespace nibm {

/// Ensembles of non-intersecting bridges. Within each pinned group the
/// conditioned paths are produced exactly as the ordered eigenvalues of a
/// matrix-valued Brownian bridge (the confluent-endpoint conditioning has
/// zero acceptance under naive rejection once groups have two or more paths);
/// the interaction BETWEEN the groups is enforced by rejection at the grid
/// times. Strict ordering therefore holds at every interior grid time.
struct PathEnsemble {
    double a = 0, b = 0;
    int n = 0;
    int m = 0; // steps; grid has m+1 times
    std::uint64_t seed = 0;
    std::vector<double> times;
    // bundle -> path-major positions: bundle[p * (m+1) + j], paths ordered
    // bottom to top (1..n/2 lower group, n/2+1..n upper group)
    std::vector<std::vector<double>> bundles;
    long long proposals = 0;
    double acceptance_rate = 0.0;
};

namespace detail_sim {

// Ascending eigenvalues of a k x k Hermitian matrix, k <= 4.
inline void hermitian_eigenvalues(const Eigen::MatrixXcd& H, int k, double* out) {
    if (k == 1) {
        out[0] = H(0, 0).real();
        return;
    }
    if (k == 2) {
        const double a = H(0, 0).real(), d = H(1, 1).real();
        const double s = 0.5 * (a + d);
        const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(H(0, 1)));
        out[0] = s - r;
        out[1] = s + r;
        return;
    }
    if (k == 3) {
        const double a = H(0, 0).real(), b = H(1, 1).real(), c = H(2, 2).real();
        const double p = std::norm(H(0, 1)), q = std::norm(H(0, 2)), r = std::norm(H(1, 2));
        const double c2 = -(a + b + c);
        const double c1 = a * b + a * c + b * c - p - q - r;
        const double c0 = -(a * b * c + 2.0 * (H(0, 1) * H(1, 2) * std::conj(H(0, 2))).real() -
                            a * r - b * q - c * p);
        int n_real = 0;
        auto roots = solve_cubic_real(1.0, c2, c1, c0, n_real, 1e-12);
        std::sort(roots.begin(), roots.end());
        out[0] = roots[0];
        out[1] = roots[1];
        out[2] = roots[2];
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    for (int i = 0; i < k; ++i) out[i] = es.eigenvalues()(i);
}

// One group's Hermitian bridge, sampled step by step on the grid.
struct GroupBridge {
    int k;
    double inv_n;
    Eigen::MatrixXcd H;

    explicit GroupBridge(int k_, int n) : k(k_), inv_n(1.0 / n), H(k_, k_) {
        H.setZero();
    }

    // advance all entries from grid time t0 to t1 (bridge pinned to 0 at 1)
    void step(double t0, double t1, GaussianRng& g) {
        const double dt = t1 - t0;
        const double shrink = 1.0 - dt / (1.0 - t0);
        const double var = dt * (1.0 - t1) / (1.0 - t0) * inv_n;
        const double sd = std::sqrt(var), sd_off = std::sqrt(0.5 * var);
        for (int i = 0; i < k; ++i) {
            H(i, i) = H(i, i).real() * shrink + sd * g();
            for (int j = i + 1; j < k; ++j) {
                const cplx prev = H(i, j);
                const cplx next(prev.real() * shrink + sd_off * g(),
                                prev.imag() * shrink + sd_off * g());
                H(i, j) = next;
                H(j, i) = std::conj(next);
            }
        }
    }
};

// Propose one bundle; returns true (and fills positions) iff the two groups
// stay strictly separated at every interior grid time.
inline bool propose_bundle(double a, double b, int n, const std::vector<double>& times,
                           std::uint64_t seed, std::uint64_t bundle_id,
                           std::vector<double>& positions) {
    const int k = n / 2;
    const int m = int(times.size()) - 1;
    GaussianRng g(SplitMix64::stream(seed, bundle_id));
    GroupBridge up(k, n), dn(k, n);
    std::vector<double> eig_up(std::size_t(k) * (m + 1), 0.0);
    std::vector<double> eig_dn(std::size_t(k) * (m + 1), 0.0);
    double buf_u[4], buf_d[4];

    for (int j = 1; j < m; ++j) {
        up.step(times[j - 1], times[j], g);
        dn.step(times[j - 1], times[j], g);
        hermitian_eigenvalues(up.H, k, buf_u);
        hermitian_eigenvalues(dn.H, k, buf_d);
        const double line = a * (1.0 - times[j]) + b * times[j];
        // groups are mirrored: upper sits at +line, lower at -line
        if (-line + buf_d[k - 1] >= line + buf_u[0]) return false;
        for (int i = 1; i < k; ++i) // degenerate eigenvalue ties are rejected
            if (buf_u[i] <= buf_u[i - 1] || buf_d[i] <= buf_d[i - 1]) return false;
        for (int i = 0; i < k; ++i) {
            eig_up[std::size_t(i) * (m + 1) + j] = buf_u[i];
            eig_dn[std::size_t(i) * (m + 1) + j] = buf_d[i];
        }
    }

    positions.assign(std::size_t(n) * (m + 1), 0.0);
    for (int j = 0; j <= m; ++j) {
        const double line = a * (1.0 - times[j]) + b * times[j];
        for (int i = 0; i < k; ++i) {
            positions[std::size_t(i) * (m + 1) + j] =
                -line + eig_dn[std::size_t(i) * (m + 1) + j];
            positions[std::size_t(k + i) * (m + 1) + j] =
                line + eig_up[std::size_t(i) * (m + 1) + j];
        }
    }
    return true;
}

} // namespace detail_sim

/// Draw `count` accepted bundles. Bundles are proposed under per-bundle
/// derived seeds and collected in bundle-index order, so the result is
/// byte-identical for any thread count.
inline PathEnsemble sample_ensemble(double a, double b, int n, int m, int count,
                                    std::uint64_t seed, int threads = 0) {
    if (!(a > 0) || !(b > 0)) throw DomainError("sample_ensemble: a, b must be positive");
    if (n <= 0 || n % 2 != 0) throw DomainError("sample_ensemble: n must be even, positive");
    if (n > 8) throw DomainError("sample_ensemble: n > 8 is infeasible for rejection");
    if (m < 50) throw DomainError("sample_ensemble: need m >= 50 grid steps");

    PathEnsemble ens;
    ens.a = a;
    ens.b = b;
    ens.n = n;
    ens.m = m;
    ens.seed = seed;
    ens.times.resize(m + 1);
    for (int j = 0; j <= m; ++j) ens.times[j] = double(j) / m;

    constexpr long long probe_limit = 1'000'000;
    const std::size_t wave = std::max<std::size_t>(256, std::size_t(count));
    std::uint64_t next_id = 0;
    long long proposals = 0, accepted = 0;

    while (int(ens.bundles.size()) < count) {
        std::vector<std::vector<double>> results(wave);
        std::vector<char> ok(wave, 0);
        parallel_for(wave, threads, [&](std::size_t i) {
            ok[i] = detail_sim::propose_bundle(a, b, n, ens.times, seed, next_id + i,
                                               results[i])
                        ? 1
                        : 0;
        });
        for (std::size_t i = 0; i < wave; ++i)
            if (ok[i]) {
                ++accepted;
                if (int(ens.bundles.size()) < count)
                    ens.bundles.push_back(std::move(results[i]));
            }
        next_id += wave;
        proposals += (long long)wave;
        if (accepted == 0 && proposals >= probe_limit)
            throw InfeasibleError("sample_ensemble: acceptance below ~1e-6 over the probe "
                                  "batch; reduce n or increase the a*b separation");
    }
    ens.proposals = proposals;
    ens.acceptance_rate = double(accepted) / double(proposals);
    return ens;
}

struct Histogram {
    double t_snapped = 0.0;
    std::vector<double> edges; // bins+1
    std::vector<double> mass;  // bins, sums to 1
};

/// Normalized histogram of all n positions at the grid time nearest to t.
inline Histogram marginal_histogram(const PathEnsemble& ens, double t, int bins,
                                    double x_lo, double x_hi) {
    if (bins < 1) throw DomainError("marginal_histogram: bins >= 1");
    int j_best = 0;
    for (int j = 0; j <= ens.m; ++j)
        if (std::abs(ens.times[j] - t) < std::abs(ens.times[j_best] - t)) j_best = j;
    Histogram h;
    h.t_snapped = ens.times[j_best];
    h.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.edges[i] = x_lo + (x_hi - x_lo) * i / bins;
    h.mass.assign(bins, 0.0);
    double total = 0.0;
    for (const auto& bundle : ens.bundles)
        for (int p = 0; p < ens.n; ++p) {
            const double x = bundle[std::size_t(p) * (ens.m + 1) + j_best];
            total += 1.0;
            if (x < x_lo || x >= x_hi) continue;
            const int bin = std::min(bins - 1, int((x - x_lo) / (x_hi - x_lo) * bins));
            h.mass[bin] += 1.0;
        }
    for (auto& v : h.mass) v /= total;
    return h;
}

/// Positions of all paths at the grid time nearest to t (for KS tests).
inline std::vector<double> marginal_samples(const PathEnsemble& ens, double t) {
    int j_best = 0;
    for (int j = 0; j <= ens.m; ++j)
        if (std::abs(ens.times[j] - t) < std::abs(ens.times[j_best] - t)) j_best = j;
    std::vector<double> xs;
    xs.reserve(ens.bundles.size() * ens.n);
    for (const auto& bundle : ens.bundles)
        for (int p = 0; p < ens.n; ++p)
            xs.push_back(bundle[std::size_t(p) * (ens.m + 1) + j_best]);
    return xs;
}

/// Exact non-crossing probability of the two-path ensemble (n = 2) in
/// continuous time: 1 - exp(-4 n a b) with n = 2.
inline double crossing_free_probability_n2(double a, double b) {
    return 1.0 - std::exp(-8.0 * a * b);
}

// --- Kolmogorov-Smirnov utilities -----------------------------------------

inline double kolmogorov_q(double lambda) {
    if (lambda <= 0) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * s));
}

/// One-sample KS statistic against a CDF given as sorted (x, F(x)) samples
/// (piecewise-linear interpolation).
template <class CdfFn>
double ks_statistic(std::vector<double> xs, const CdfFn& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max(d, std::abs(F - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - F));
    }
    return d;
}

/// Two-sample KS p-value (asymptotic).
inline double two_sample_ks_p(std::vector<double> xs, std::vector<double> ys) {
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double nx = double(xs.size()), ny = double(ys.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
        if (xs[i] <= ys[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) / nx - double(j) / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

} // namespace nibm
