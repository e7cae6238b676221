#ifndef OBLIQUE_TRANSFORM_HPP
#define OBLIQUE_TRANSFORM_HPP

#include "oblique/problem.hpp"

namespace oblique {

/// State in the integration coordinates u = t x' - x, v = x/t.
struct UvState {
    double t = 1.0;
    double u = 0.0;
    double v = 0.0;
};

/// State in the classical coordinates (x, x').
struct XState {
    double t = 1.0;
    double x = 0.0;
    double xp = 0.0;
};

UvState to_uv(const XState& s);
XState from_uv(const UvState& s);

struct UvDerivative {
    double du = 0.0;
    double dv = 0.0;
};

/// First-order system: u' = -t f(t, v), v' = u / t^2.
UvDerivative uv_rhs(const Nonlinearity& nl, const UvState& s);

} // namespace oblique

#endif
