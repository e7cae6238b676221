#ifndef OBLIQUE_PROBLEM_HPP
#define OBLIQUE_PROBLEM_HPP

#include <functional>
#include <optional>

#include "oblique/numerics.hpp"

namespace oblique {

/// Right-hand nonlinearity of x'' + f(t, x/t) = 0, t >= t0 >= 1.
///
/// Partials and the envelope pair are optional; leave the std::function
/// empty when unknown. |f(t,v)| <= envelope_a(t) * envelope_g(|v|) is the
/// contract the envelope asserts; envelope_g must be nondecreasing and
/// positive for positive arguments. Violations are detected by sampling
/// (hypotheses module), never silently ignored.
///
/// All members are immutable after construction; instances may be shared
/// across concurrent runs.
struct Nonlinearity {
    std::function<double(double, double)> f;     // (t, v)
    std::function<double(double, double)> df_dv; // optional
    std::function<double(double, double)> df_dt; // optional
    std::function<double(double)> envelope_a;    // optional, a(t) >= 0
    std::function<double(double)> envelope_g;    // optional, g(xi) >= 0 on xi >= 0

    bool has_envelope() const { return envelope_a != nullptr && envelope_g != nullptr; }

    /// Partial in v; falls back to a central difference with step
    /// eps^(1/3) * max(1, |v|) when no closed form was supplied.
    double dfdv_or_fd(double t, double v) const;

    /// Partial in t; same fallback policy with step scale max(1, |t|).
    double dfdt_or_fd(double t, double v) const;
};

/// Coefficient data of the model equation x'' + A(t) x^(2n-1) = 0.
struct EmdenFowlerCoeff {
    int n = 1;                            // n >= 1
    std::function<double(double)> A;
    std::function<double(double)> dA_dt;  // optional
};

/// f(t,v) = t^(2n-1) A(t) v^(2n-1), with the exact envelope
/// a(t) = t^(2n-1) |A(t)|, g(xi) = xi^(2n-1) and closed-form partials.
Nonlinearity to_nonlinearity(const EmdenFowlerCoeff& ef);

/// Initial data x(t0), x'(t0) at t0 >= 1.
struct IvpSpec {
    double t0 = 1.0;
    double x0 = 0.0;
    double xp0 = 0.0;
};

/// u0 = t0 x'(t0) - x(t0), v0 = x(t0)/t0, c = 1 + u0^2/2.
struct DerivedConstants {
    double u0 = 0.0;
    double v0 = 0.0;
    double c = 1.0;
};

/// Throws std::invalid_argument when t0 < 1.
DerivedConstants derived_constants(const IvpSpec& ivp);

} // namespace oblique

#endif
