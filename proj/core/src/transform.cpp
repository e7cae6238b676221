#include "oblique/transform.hpp"

namespace oblique {

UvState to_uv(const XState& s) {
    return UvState{s.t, s.t * s.xp - s.x, s.x / s.t};
}

XState from_uv(const UvState& s) {
    const double x = s.t * s.v;
    return XState{s.t, x, s.v + s.u / s.t};
}

UvDerivative uv_rhs(const Nonlinearity& nl, const UvState& s) {
    return UvDerivative{-s.t * nl.f(s.t, s.v), s.u / (s.t * s.t)};
}

} // namespace oblique
