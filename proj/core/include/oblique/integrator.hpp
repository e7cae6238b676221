#ifndef OBLIQUE_INTEGRATOR_HPP
#define OBLIQUE_INTEGRATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "oblique/problem.hpp"
#include "oblique/transform.hpp"

namespace oblique {

struct IntegrationConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double t_end = 0.0;             // horizon, required; may be < t0 (backward run)
    double blowup_threshold = 1e8;  // on |x| + |x'|
    double h_min_factor = 1e-12;    // step collapse when accepted |h| < h_min_factor * t
    long max_steps = 10'000'000;    // accepted-step budget
    int sample_stride = 1;          // keep every k-th accepted step (first/last always)

    /// Times the controller lands on exactly. Needed to preserve order
    /// across merely-continuous coefficient kinks (piecewise A).
    std::vector<double> breakpoints;
};

enum class TerminationKind {
    ReachedHorizon,
    Blowup,
    StepCollapse,
    StepBudgetExhausted,
    EvalError,
};

const char* to_string(TerminationKind k);

struct Termination {
    TerminationKind kind = TerminationKind::ReachedHorizon;
    double t_last = 0.0;
    // Blowup only: singularity estimate from the geometric step collapse,
    // with a +- uncertainty of 10 * (last accepted step).
    std::optional<double> t_singularity;
    std::optional<double> t_singularity_uncertainty;
    std::string message;
};

struct Event {
    enum class Kind { Blowup, Horizon };
    Kind kind = Kind::Horizon;
    double t = 0.0;
    UvState state;
};

/// One accepted step endpoint: state, its derivative (for cubic Hermite
/// dense output), and the embedded local error estimate of that step.
struct TrajectorySample {
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
    double du = 0.0;
    double dv = 0.0;
    double err_est = 0.0; // embedded estimate, unscaled 2-norm on (u, v)

    UvState state() const { return UvState{t, u, v}; }
};

struct Trajectory {
    std::vector<TrajectorySample> samples; // strictly monotone in t; first at t0
    Termination termination;
    std::vector<Event> events;
    double t0 = 0.0;
    long n_accepted = 0;
    long n_rejected = 0;
    long n_rhs_evals = 0;

    bool reached_horizon() const {
        return termination.kind == TerminationKind::ReachedHorizon;
    }
};

/// Integrate the (u, v) system with an explicit Dormand-Prince 5(4) pair
/// and PI step-size control. Terminates at the horizon, on blowup
/// (threshold on |x|+|x'| or step collapse in a growing solution), on
/// budget exhaustion, or on an f evaluation error (partial trajectory with
/// an error mark).
Trajectory integrate(const Nonlinearity& nl, const IvpSpec& ivp,
                     const IntegrationConfig& cfg);

/// Dense output at the requested times via cubic Hermite interpolation on
/// the stored samples (order 3, consistent with the stored derivative
/// data). Times must lie within [t0, t_last]; throws std::out_of_range
/// otherwise.
std::vector<UvState> resample(const Trajectory& traj, const std::vector<double>& times);

/// Single-time convenience overload.
UvState resample_at(const Trajectory& traj, double time);

} // namespace oblique

#endif
