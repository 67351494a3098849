#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "nibm/errors.hpp"
#include "nibm/tolerances.hpp"

namespace nibm {

enum class Regime { TwoCuts, OneCut };

enum class Separation { Sub, Super }; // ab < 1/2 vs ab > 1/2

/// Critical times at which the two groups of paths merge / split.
/// Defined for ab < 1/2 only; both lie in (0,1) and straddle a/(a+b).
inline std::pair<double, double> critical_times(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw DomainError("critical_times: a and b must be positive");
    const double d = 1.0 - 4.0 * a * a * b * b;
    if (d < 0.0)
        throw DomainError("critical_times: requires ab < 1/2");
    const double s = std::sqrt(d);
    const double den = 2.0 * (1.0 + a * a + b * b);
    return {(1.0 + 2.0 * a * a - s) / den, (1.0 + 2.0 * a * a + s) / den};
}

/// Physical parameters of the ensemble: n/2 paths pinned a -> b and n/2
/// pinned -a -> -b, observed at time t. n is optional for curve-only work.
struct ModelParams {
    double a = 0.0;
    double b = 0.0;
    double t = 0.0;
    std::optional<int> n;
    Separation separation = Separation::Sub;
    double t_c1 = 0.0; // populated when ab < 1/2
    double t_c2 = 0.0;
    Tolerances tol;

    static ModelParams make(double a, double b, double t,
                            std::optional<int> n = std::nullopt,
                            Tolerances tol = {}) {
        if (!(a > 0.0) || !(b > 0.0))
            throw DomainError("ModelParams: a and b must be positive");
        if (!(t > 0.0) || !(t < 1.0))
            throw DomainError("ModelParams: t must lie in (0,1)");
        if (n) {
            if (*n <= 0 || *n % 2 != 0)
                throw DomainError("ModelParams: n must be a positive even integer");
        }
        ModelParams p;
        p.a = a;
        p.b = b;
        p.t = t;
        p.n = n;
        p.tol = tol;
        const double ab = a * b;
        if (std::abs(ab - 0.5) <= tol.critical)
            throw CriticalSeparationError("ModelParams: ab = 1/2 is the excluded critical separation");
        p.separation = ab < 0.5 ? Separation::Sub : Separation::Super;
        if (p.separation == Separation::Sub) {
            auto [tc1, tc2] = critical_times(a, b);
            p.t_c1 = tc1;
            p.t_c2 = tc2;
            if (std::abs(t - tc1) <= tol.critical || std::abs(t - tc2) <= tol.critical)
                throw CriticalTimeError("ModelParams: t coincides with a critical time");
        }
        return p;
    }

    Regime regime() const {
        if (separation == Separation::Super)
            return Regime::TwoCuts; // groups never merge
        return (t > t_c1 && t < t_c2) ? Regime::OneCut : Regime::TwoCuts;
    }

    int n_value() const {
        if (!n) throw DomainError("ModelParams: n required for this operation");
        return *n;
    }

    double s2() const { return t * (1.0 - t); } // shorthand t(1-t)
};

inline const char* regime_name(Regime r) {
    return r == Regime::TwoCuts ? "TwoCuts" : "OneCut";
}

} // namespace nibm
