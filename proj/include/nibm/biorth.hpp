#pragma once

#include <array>
#include <memory>
#include <vector>

#include "nibm/bigfloat.hpp"
#include "nibm/quadrature.hpp"
#include "nibm/weights.hpp"

namespace nibm {

template <class Real>
struct LUFullPivot {
    int n = 0;
    std::vector<Real> lu;      // L strictly below the diagonal (unit), U on/above
    std::vector<int> perm_row; // position k holds the original row index
    std::vector<int> perm_col;
};

/// LU with full pivoting. Throws PrecisionError when a pivot collapses to the
/// noise floor of the working precision (numerically rank-deficient input).
template <class Real>
LUFullPivot<Real> lu_full_pivot(std::vector<Real> m, int n) {
    LUFullPivot<Real> f;
    f.n = n;
    f.perm_row.resize(n);
    f.perm_col.resize(n);
    for (int i = 0; i < n; ++i) f.perm_row[i] = f.perm_col[i] = i;

    Real max0 = 0;
    for (const auto& v : m) max0 = std::max(max0, Real(abs(v)));
    const Real floor = max0 * std::numeric_limits<Real>::epsilon() * (16 * n);

    auto at = [&](int i, int j) -> Real& { return m[std::size_t(i) * n + j]; };
    for (int k = 0; k < n; ++k) {
        int pi = k, pj = k;
        Real best = abs(at(k, k));
        for (int i = k; i < n; ++i)
            for (int j = k; j < n; ++j)
                if (abs(at(i, j)) > best) {
                    best = abs(at(i, j));
                    pi = i;
                    pj = j;
                }
        if (best <= floor)
            throw PrecisionError("lu_full_pivot: pivot collapse; raise precision_bits");
        if (pi != k) {
            for (int j = 0; j < n; ++j) std::swap(at(k, j), at(pi, j));
            std::swap(f.perm_row[k], f.perm_row[pi]);
        }
        if (pj != k) {
            for (int i = 0; i < n; ++i) std::swap(at(i, k), at(i, pj));
            std::swap(f.perm_col[k], f.perm_col[pj]);
        }
        const Real piv = at(k, k);
        for (int i = k + 1; i < n; ++i) {
            const Real l = at(i, k) / piv;
            at(i, k) = l;
            for (int j = k + 1; j < n; ++j) at(i, j) -= l * at(k, j);
        }
    }
    f.lu = std::move(m);
    return f;
}

/// Fixed-precision core of the biorthogonal system. Left basis functions are
/// x^p w_{1,i}(x), right basis y^q w_{2,k}(y), 0 <= p,q < n/2, families
/// blocked (all of w_{.,1} first). The kernel is K(x,y) = f(x)^T C g(y) with
/// C = G^{-T}; the phi/psi coefficient rows come from the LU factors.
template <class Real>
class BiorthCore {
public:
    explicit BiorthCore(const ModelParams& params)
        : params_(params), weights_(params), n_(params.n_value()) {
        build();
    }

    int n() const { return n_; }
    const std::vector<Real>& gram() const { return G_; }
    const std::vector<Real>& phi_coefficients() const { return A_; }
    const std::vector<Real>& psi_coefficients() const { return B_; }

    void eval_left(const Real& x, std::vector<Real>& f) const {
        eval_basis(x, f, /*left=*/true);
    }
    void eval_right(const Real& y, std::vector<Real>& g) const {
        eval_basis(y, g, /*left=*/false);
    }

    Real kernel(const Real& x, const Real& y) const {
        std::vector<Real> f, g;
        eval_left(x, f);
        eval_right(y, g);
        Real acc = 0;
        for (int p = 0; p < n_; ++p) {
            Real row = 0;
            const Real* c = &C_[std::size_t(p) * n_];
            for (int q = 0; q < n_; ++q) row += c[q] * g[q];
            acc += f[p] * row;
        }
        return acc;
    }

    double kernel_d(double x, double y) const {
        return static_cast<double>(kernel(Real(x), Real(y)));
    }

    double phi_d(int j, double x) const {
        std::vector<Real> f;
        eval_left(Real(x), f);
        Real acc = 0;
        for (int p = 0; p < n_; ++p) acc += A_[std::size_t(j) * n_ + p] * f[p];
        return static_cast<double>(acc);
    }
    double psi_d(int j, double y) const {
        std::vector<Real> g;
        eval_right(Real(y), g);
        Real acc = 0;
        for (int q = 0; q < n_; ++q) acc += B_[std::size_t(j) * n_ + q] * g[q];
        return static_cast<double>(acc);
    }

    double construction_residual() const { return construction_residual_; }

    /// Independent check: rebuild the Gram matrix by composite Gauss-Legendre
    /// quadrature and measure max |(A Ghat B^T)_{jk} - delta_{jk}|.
    double biorthogonality_residual_quadrature() const {
        const Real sigma = sqrt(Real(params_.s2()) / n_);
        const int digits0 = std::numeric_limits<Real>::digits;
        Real lo = 0, hi = 0;
        for (int i = 1; i <= 2; ++i)
            for (int k = 1; k <= 2; ++k) {
                const auto gf = weights_.combined(i, k);
                // window wide enough that the highest moment's tail sits below
                // the working precision
                const Real spread =
                    sigma * (0.1 * digits0 + sqrt(Real(2.0 * std::max(0, n_ - 2))));
                lo = std::min(lo, Real(gf.mu) - spread);
                hi = std::max(hi, Real(gf.mu) + spread);
            }
        // quadrature density scales with the working precision: the identity
        // check is only as sharp as this independent integration
        const int digits = std::numeric_limits<Real>::digits;
        const double per_sigma = 2.0 * digits / 256.0;
        const int panels = std::max(16, int(per_sigma * double((hi - lo) / sigma)) + 1);
        static const auto rule = gauss_legendre<Real>(digits > 256 ? 48 : 32);
        const auto& [xs, ws] = rule;

        std::vector<Real> ghat(std::size_t(n_) * n_, Real(0));
        std::vector<Real> f, g;
        for (int p = 0; p < panels; ++p) {
            const Real a = lo + (hi - lo) * p / panels;
            const Real b = lo + (hi - lo) * (p + 1) / panels;
            const Real mid = (a + b) / 2, half = (b - a) / 2;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const Real x = mid + half * xs[i];
                const Real w = ws[i] * half;
                eval_left(x, f);
                eval_right(x, g);
                for (int r = 0; r < n_; ++r) {
                    const Real fw = f[r] * w;
                    Real* row = &ghat[std::size_t(r) * n_];
                    for (int c = 0; c < n_; ++c) row[c] += fw * g[c];
                }
            }
        }
        return residual_vs_identity(ghat);
    }

private:
    void eval_basis(const Real& x, std::vector<Real>& out, bool left) const {
        out.resize(n_);
        const int half = n_ / 2;
        const Real nn = n_;
        const Real t = params_.t;
        Real e1, e2;
        if (left) {
            const Real a = params_.a;
            e1 = exp(-(nn / (2 * t)) * (x * x - 2 * a * x));
            e2 = exp(-(nn / (2 * t)) * (x * x + 2 * a * x));
        } else {
            const Real b = params_.b;
            e1 = exp(-(nn / (2 * (1 - t))) * (x * x - 2 * b * x));
            e2 = exp(-(nn / (2 * (1 - t))) * (x * x + 2 * b * x));
        }
        Real pw = 1;
        for (int d = 0; d < half; ++d) {
            out[d] = pw * e1;
            out[half + d] = pw * e2;
            pw *= x;
        }
    }

    void build() {
        const int half = n_ / 2;
        // closed-form moments per weight pair via the Gaussian recurrence
        std::array<std::array<std::vector<Real>, 2>, 2> M;
        const Real t = params_.t, nn = n_;
        const Real sigma2 = t * (1 - t) / nn;
        const Real pi_full = 4 * atan(Real(1));
        const Real amp0 = sqrt(2 * pi_full * sigma2);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) {
                const Real sa = i == 0 ? Real(params_.a) : Real(-params_.a);
                const Real sb = k == 0 ? Real(params_.b) : Real(-params_.b);
                const Real mu = sa * (1 - t) + sb * t;
                const Real amp = amp0 * exp(mu * mu / (2 * sigma2));
                auto& mm = M[i][k];
                mm.resize(std::size_t(n_) - 1);
                mm[0] = amp;
                if (mm.size() >= 2) mm[1] = mu * amp;
                for (std::size_t m = 2; m < mm.size(); ++m)
                    mm[m] = mu * mm[m - 1] + Real(double(m - 1)) * sigma2 * mm[m - 2];
            }

        G_.assign(std::size_t(n_) * n_, Real(0));
        for (int p = 0; p < n_; ++p) {
            const int fi = p < half ? 0 : 1, dp = p % half;
            for (int q = 0; q < n_; ++q) {
                const int fk = q < half ? 0 : 1, dq = q % half;
                G_[std::size_t(p) * n_ + q] = M[fi][fk][std::size_t(dp) + dq];
            }
        }

        const auto f = lu_full_pivot(G_, n_);
        const auto& lu = f.lu;
        auto LU = [&](int i, int j) { return lu[std::size_t(i) * n_ + j]; };

        // A = L^{-1} P : row j of A holds phi_j in the left basis
        A_.assign(std::size_t(n_) * n_, Real(0));
        std::vector<Real> X(std::size_t(n_) * n_, Real(0));
        for (int j = 0; j < n_; ++j) {
            X[std::size_t(j) * n_ + j] = 1;
            for (int m = j - 1; m >= 0; --m) {
                // entries fill left of the diagonal via forward substitution
                Real s = 0;
                for (int k = m; k < j; ++k) s += LU(j, k) * X[std::size_t(k) * n_ + m];
                X[std::size_t(j) * n_ + m] = -s;
            }
            for (int m = 0; m <= j; ++m)
                A_[std::size_t(j) * n_ + f.perm_row[m]] = X[std::size_t(j) * n_ + m];
        }

        // B = U^{-T} Q^T : row j of B holds psi_j in the right basis
        B_.assign(std::size_t(n_) * n_, Real(0));
        std::vector<Real> Y(std::size_t(n_) * n_, Real(0));
        for (int j = 0; j < n_; ++j) {
            Y[std::size_t(j) * n_ + j] = 1 / LU(j, j);
            for (int m = j - 1; m >= 0; --m) {
                Real s = 0;
                for (int k = m; k < j; ++k) s += LU(k, j) * Y[std::size_t(k) * n_ + m];
                Y[std::size_t(j) * n_ + m] = -s / LU(j, j);
            }
            for (int m = 0; m <= j; ++m)
                B_[std::size_t(j) * n_ + f.perm_col[m]] = Y[std::size_t(j) * n_ + m];
        }

        C_.assign(std::size_t(n_) * n_, Real(0));
        for (int j = 0; j < n_; ++j)
            for (int p = 0; p < n_; ++p) {
                const Real ajp = A_[std::size_t(j) * n_ + p];
                if (ajp == 0) continue;
                const Real* brow = &B_[std::size_t(j) * n_];
                Real* crow = &C_[std::size_t(p) * n_];
                for (int q = 0; q < n_; ++q) crow[q] += ajp * brow[q];
            }

        construction_residual_ = residual_vs_identity(G_);
        const double bound =
            std::pow(2.0, -0.25 * std::numeric_limits<Real>::digits);
        if (construction_residual_ > bound)
            throw PrecisionError("biorthogonalization residual too large; raise "
                                 "precision_bits");
    }

    // max |(A M B^T)_{jk} - delta_{jk}|
    double residual_vs_identity(const std::vector<Real>& Mmat) const {
        std::vector<Real> MB(std::size_t(n_) * n_, Real(0)); // M B^T
        for (int p = 0; p < n_; ++p)
            for (int k = 0; k < n_; ++k) {
                Real s = 0;
                const Real* mrow = &Mmat[std::size_t(p) * n_];
                const Real* brow = &B_[std::size_t(k) * n_];
                for (int q = 0; q < n_; ++q) s += mrow[q] * brow[q];
                MB[std::size_t(p) * n_ + k] = s;
            }
        Real worst = 0;
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k) {
                Real s = 0;
                const Real* arow = &A_[std::size_t(j) * n_];
                for (int p = 0; p < n_; ++p) s += arow[p] * MB[std::size_t(p) * n_ + k];
                if (j == k) s -= 1;
                worst = std::max(worst, Real(abs(s)));
            }
        return static_cast<double>(worst);
    }

    ModelParams params_;
    WeightSystem weights_;
    int n_;
    std::vector<Real> G_, A_, B_, C_;
    double construction_residual_ = 0.0;
};

/// Runtime-precision front end. precision_bits rounds up to a compiled
/// mantissa size. The default is 256 bits up to n = 32 and 512 beyond: the
/// Gram condition number grows like ~10^(0.7 n), which already eats ~46
/// digits at n = 64.
class BiorthogonalSystem {
public:
    explicit BiorthogonalSystem(const ModelParams& params, int precision_bits = 0) {
        const int n = params.n_value();
        if (n > 128) throw DomainError("BiorthogonalSystem: n exceeds n_max = 128");
        if (precision_bits <= 0) precision_bits = n <= 32 ? 256 : 512;
        bits_ = effective_precision_bits(precision_bits);
        switch (bits_) {
            case 128: c128_ = std::make_shared<BiorthCore<Big128>>(params); break;
            case 256: c256_ = std::make_shared<BiorthCore<Big256>>(params); break;
            default: c512_ = std::make_shared<BiorthCore<Big512>>(params); break;
        }
        n_ = n;
    }

    int n() const { return n_; }
    int precision_bits() const { return bits_; }

    double kernel(double x, double y) const {
        if (c128_) return c128_->kernel_d(x, y);
        if (c256_) return c256_->kernel_d(x, y);
        return c512_->kernel_d(x, y);
    }

    double phi(int j, double x) const {
        if (c128_) return c128_->phi_d(j, x);
        if (c256_) return c256_->phi_d(j, x);
        return c512_->phi_d(j, x);
    }
    double psi(int j, double y) const {
        if (c128_) return c128_->psi_d(j, y);
        if (c256_) return c256_->psi_d(j, y);
        return c512_->psi_d(j, y);
    }

    double construction_residual() const {
        if (c128_) return c128_->construction_residual();
        if (c256_) return c256_->construction_residual();
        return c512_->construction_residual();
    }

    double biorthogonality_residual() const {
        if (c128_) return c128_->biorthogonality_residual_quadrature();
        if (c256_) return c256_->biorthogonality_residual_quadrature();
        return c512_->biorthogonality_residual_quadrature();
    }

    double gram_entry(int p, int q) const {
        if (c128_) return static_cast<double>(c128_->gram()[std::size_t(p) * n_ + q]);
        if (c256_) return static_cast<double>(c256_->gram()[std::size_t(p) * n_ + q]);
        return static_cast<double>(c512_->gram()[std::size_t(p) * n_ + q]);
    }

private:
    int n_ = 0;
    int bits_ = 0;
    std::shared_ptr<BiorthCore<Big128>> c128_;
    std::shared_ptr<BiorthCore<Big256>> c256_;
    std::shared_ptr<BiorthCore<Big512>> c512_;
};

/// Conventional name for assembling the moment matrix and its factorization.
inline BiorthogonalSystem gram_matrix(const ModelParams& params, int precision_bits = 0) {
    return BiorthogonalSystem(params, precision_bits);
}

} // namespace nibm
