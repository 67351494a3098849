#pragma once

#include <cmath>

#include "nibm/model.hpp"

namespace nibm {

/// Transition density of the driving motion (variance 1/n per unit time).
inline double transition_density(double t, double a, double x, int n) {
    if (!(t > 0.0)) throw DomainError("transition_density: t must be positive");
    const double d = x - a;
    return std::sqrt(n / (2.0 * M_PI * t)) * std::exp(-n * d * d / (2.0 * t));
}

/// Product weight w_{1,i} w_{2,k} collapsed to a single Gaussian:
///   exp(log_amp) * exp(-(x - mu)^2 / (2 sigma2)).
struct GaussianFactor {
    double mu = 0.0;
    double sigma2 = 0.0;
    double log_amp = 0.0;
};

/// The four exponential weights of the ensemble. Family 1 carries the start
/// points (time slice t), family 2 the end points (time slice 1-t); index 1
/// uses +a resp. +b, index 2 the mirrored sign.
struct WeightSystem {
    ModelParams params; // requires n

    explicit WeightSystem(const ModelParams& p) : params(p) { (void)p.n_value(); }

    // exponent of w_{family,index}(x) (the weights are exp of these)
    double log_w1(int index, double x) const {
        const double n = params.n_value(), t = params.t, a = params.a;
        const double sa = index == 1 ? a : -a;
        return -(n / (2.0 * t)) * (x * x - 2.0 * sa * x);
    }
    double log_w2(int index, double x) const {
        const double n = params.n_value(), t = params.t, b = params.b;
        const double sb = index == 1 ? b : -b;
        return -(n / (2.0 * (1.0 - t))) * (x * x - 2.0 * sb * x);
    }
    double w1(int index, double x) const { return std::exp(log_w1(index, x)); }
    double w2(int index, double x) const { return std::exp(log_w2(index, x)); }

    /// Combined Gaussian of w_{1,i}(x) w_{2,k}(x). The quadratic coefficient
    /// is -n/(2 t (1-t)) < 0, so every product is integrable.
    GaussianFactor combined(int i, int k) const {
        const double n = params.n_value(), t = params.t;
        const double sa = i == 1 ? params.a : -params.a;
        const double sb = k == 1 ? params.b : -params.b;
        GaussianFactor g;
        g.sigma2 = t * (1.0 - t) / n;
        g.mu = sa * (1.0 - t) + sb * t;
        g.log_amp = g.mu * g.mu / (2.0 * g.sigma2);
        return g;
    }
};

} // namespace nibm
