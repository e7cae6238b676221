#ifndef OBLIQUE_NUMERICS_HPP
#define OBLIQUE_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oblique {

using ScalarFn = std::function<double(double)>;

/// Integer power by squaring; k may be negative.
double ipow(double x, long long k);

struct QuadTols {
    double rel = 1e-8;
    double abs = 1e-12;
};

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    bool converged = false;
    long evaluations = 0;
};

/// Adaptive quadrature on [lo, hi]: Gauss(7)/Kronrod(15) panels, worst panel
/// bisected first, until the summed error estimate meets
/// max(abs_tol, rel_tol * |value|) or the panel budget runs out.
QuadResult integrate_finite(const ScalarFn& h, double lo, double hi,
                            double rel_tol = 1e-8, double abs_tol = 1e-12,
                            int max_panels = 4000);

/// Improper-integral verdict on [lo, +inf). Convergence of a tail is not
/// decidable from finitely many samples, so the verdict is three-valued and
/// the evidence (accumulated value per horizon) is kept for reporting.
struct TailVerdict {
    enum class Kind { Convergent, Divergent, Inconclusive };
    Kind kind = Kind::Inconclusive;
    double value = 0.0;          // accumulated integral up to the last horizon
    double error_estimate = 0.0; // quadrature + truncation proxy (Convergent only)
    std::vector<std::pair<double, double>> evidence; // (T_k, accumulated)
};

struct TailConfig {
    int k_max = 40;              // horizons T_k = lo * 2^k, k = 1..k_max
    double divergence_cap = 1e12;
    double decay_factor = 1.1;   // an increment "decays" if it shrinks by >= this
    int stall_window = 5;        // trailing non-decaying doublings => divergent
    int settle_window = 3;       // consecutive below-tolerance increments => convergent
};

/// Integrate h over [lo, T_k] at doubling horizons.
///   convergent:   the last settle_window increments each fall below
///                 max(abs_tol, rel_tol * |accumulated|)
///   divergent:    |accumulated| exceeded the cap, or the trailing
///                 stall_window doublings all failed to decay by decay_factor
///   inconclusive: otherwise
TailVerdict integrate_tail(const ScalarFn& h, double lo,
                           double rel_tol = 1e-8, double abs_tol = 1e-12,
                           const TailConfig& cfg = {});

struct TailLimit {
    double limit = 0.0;  // mean of the last `window` values
    double spread = 0.0; // max - min over that window
};

/// Limit of an ordered sample sequence, judged on its trailing window.
/// The caller interprets `spread` against its own tolerance.
TailLimit tail_limit(const std::vector<std::pair<double, double>>& samples,
                     std::size_t window);

/// Central difference (h(at+d) - h(at-d)) / 2d with d = eps^(1/3) * max(scale, |at|).
double central_diff(const ScalarFn& h, double at, double scale = 1.0);

} // namespace oblique

#endif
