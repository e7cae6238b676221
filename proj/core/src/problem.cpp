#include "oblique/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace oblique {

double Nonlinearity::dfdv_or_fd(double t, double v) const {
    if (df_dv) return df_dv(t, v);
    return central_diff([&](double s) { return f(t, s); }, v, 1.0);
}

double Nonlinearity::dfdt_or_fd(double t, double v) const {
    if (df_dt) return df_dt(t, v);
    return central_diff([&](double s) { return f(s, v); }, t, 1.0);
}

Nonlinearity to_nonlinearity(const EmdenFowlerCoeff& ef) {
    if (ef.n < 1) throw std::invalid_argument("EmdenFowlerCoeff: n must be >= 1");
    if (!ef.A) throw std::invalid_argument("EmdenFowlerCoeff: A missing");

    const long long p = 2LL * ef.n - 1;
    const auto A = ef.A;
    const auto dA = ef.dA_dt;

    Nonlinearity nl;
    nl.f = [A, p](double t, double v) { return ipow(t, p) * A(t) * ipow(v, p); };
    nl.df_dv = [A, p](double t, double v) {
        return static_cast<double>(p) * ipow(t, p) * A(t) * ipow(v, p - 1);
    };
    if (dA) {
        nl.df_dt = [A, dA, p](double t, double v) {
            return (static_cast<double>(p) * ipow(t, p - 1) * A(t) +
                    ipow(t, p) * dA(t)) * ipow(v, p);
        };
    }
    nl.envelope_a = [A, p](double t) { return ipow(t, p) * std::abs(A(t)); };
    nl.envelope_g = [p](double xi) { return ipow(xi, p); };
    return nl;
}

DerivedConstants derived_constants(const IvpSpec& ivp) {
    if (!(ivp.t0 >= 1.0)) throw std::invalid_argument("IvpSpec: t0 must be >= 1");
    DerivedConstants d;
    d.u0 = ivp.t0 * ivp.xp0 - ivp.x0;
    d.v0 = ivp.x0 / ivp.t0;
    d.c = 1.0 + 0.5 * d.u0 * d.u0;
    return d;
}

} // namespace oblique
