#ifndef OBLIQUE_LYAPUNOV_HPP
#define OBLIQUE_LYAPUNOV_HPP

#include <cstddef>
#include <vector>

#include "oblique/integrator.hpp"
#include "oblique/numerics.hpp"
#include "oblique/problem.hpp"
#include "oblique/transform.hpp"

namespace oblique {

struct LyapunovSample {
    double t = 0.0;
    double value = 0.0;
    double quad_error = 0.0;
};

/// V1(t, u, v) = u^2/2 + u * integral_{t0}^{t} s f(s, v) ds, v held fixed.
/// The inner integral is recomputed per call by adaptive quadrature.
LyapunovSample v1(const Nonlinearity& nl, double t0, const UvState& s,
                  const QuadTols& tols = {});

/// V2(t, u, v) = u^2/2 + t^3 * integral_0^v f(t, s) ds (signed for v < 0).
LyapunovSample v2(const Nonlinearity& nl, const UvState& s,
                  const QuadTols& tols = {});

struct MonotonicityViolation {
    double t_prev = 0.0;
    double t_next = 0.0;
    double increase = 0.0;
    double allowed_slack = 0.0;
};

/// Discrete nonincrease check. Exact nonincrease holds only in the
/// continuum; each step is granted an explicit error budget:
///   slack = quad_err_prev + quad_err_next
///         + 10 * (1 + max|u| + max|v|) * (sum of local integration error
///           estimates between the two monitored samples)
/// The 10x factor absorbs interpolation noise; genuinely increasing V
/// (sign-flipped coefficients) exceeds it by orders of magnitude.
struct MonotonicityReport {
    std::vector<LyapunovSample> samples;
    std::vector<MonotonicityViolation> violations;
    double max_increase = 0.0;       // largest V step increase observed
    double max_excess = 0.0;         // largest (increase - slack), <= 0 when passed
    bool passed = true;
};

/// Cap on monitored points; beyond it the grid thins uniformly in log t.
inline constexpr std::size_t kMonitorPointCap = 2000;

MonotonicityReport monitor_v1(const Nonlinearity& nl, const IvpSpec& ivp,
                              const Trajectory& traj, const QuadTols& tols = {},
                              std::size_t max_points = kMonitorPointCap);

MonotonicityReport monitor_v2(const Nonlinearity& nl, const Trajectory& traj,
                              const QuadTols& tols = {},
                              std::size_t max_points = kMonitorPointCap);

struct BoundChainSample {
    double t = 0.0;
    double abs_u = 0.0;
    double y = 0.0;         // prefix integral of s a(s) times g(|v(t)|)
    double z = 0.0;         // 1 + |v0| + cumulative trapezoid of |u|/s^2
    double bound_4yc = 0.0; // 4 (y + c)
};

/// The explicit u-bound chain: |u(t)| < 4 (y(t) + c) at every monitored
/// sample (passed), plus the envelope bound y(t) <= K g(z(t)) when the
/// tail integral K converges (envelope_bound_passed).
struct BoundChainReport {
    std::vector<BoundChainSample> samples;
    bool passed = false;
    bool envelope_bound_passed = false;
    bool K_available = false;
    double K = 0.0;
    double K_error = 0.0;
    double c = 0.0;
    double max_u_over_bound = 0.0; // max |u| / (4 (y + c))
};

/// Requires the envelope pair; throws std::invalid_argument without it.
BoundChainReport bound_chain(const Nonlinearity& nl, const IvpSpec& ivp,
                             const Trajectory& traj, const QuadTols& tols = {},
                             std::size_t max_points = kMonitorPointCap);

} // namespace oblique

#endif
