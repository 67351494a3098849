#pragma once

namespace nibm {

/// Numerical thresholds used across the library. All overridable; the defaults
/// assume double precision with well-conditioned closed forms.
struct Tolerances {
    double resid = 1e-9;       // relative residual accepted for curve identities
    double bp_scale = 1e-6;    // branch-point exclusion radius, in units of z1
    double classify = 1e-8;    // |Im| threshold below which a root counts as real
    double critical = 1e-6;    // |t - t_c| (and |ab - 1/2|) rejection window
    double period = 1e-6;      // distance to the nearest half-integer for periods
    double pole = 1e-8;        // pole exclusion radius in the v-plane
    double mass = 1e-8;        // density normalization check
};

} // namespace nibm
