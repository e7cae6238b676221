#include "oblique/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oblique {

namespace {

// max_points indices thinned uniformly in log t; first and last always kept.
std::vector<std::size_t> monitor_indices(const Trajectory& traj, std::size_t max_points) {
    const std::size_t n = traj.samples.size();
    std::vector<std::size_t> idx;
    if (n == 0) return idx;
    const bool forward = n < 2 || traj.samples.back().t > traj.samples.front().t;
    if (n <= max_points || max_points < 2 || !forward) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    const double lt0 = std::log(traj.samples.front().t);
    const double lt1 = std::log(traj.samples.back().t);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < max_points; ++k) {
        const double target =
            lt0 + (lt1 - lt0) * static_cast<double>(k) / static_cast<double>(max_points - 1);
        while (cursor + 1 < n && std::log(traj.samples[cursor].t) < target) ++cursor;
        if (idx.empty() || idx.back() != cursor) idx.push_back(cursor);
    }
    if (idx.back() != n - 1) idx.push_back(n - 1);
    return idx;
}

MonotonicityReport monitor_common(const Trajectory& traj, std::size_t max_points,
                                  const std::function<LyapunovSample(const UvState&)>& eval) {
    MonotonicityReport rep;
    const auto idx = monitor_indices(traj, max_points);
    rep.samples.reserve(idx.size());
    for (std::size_t i : idx) rep.samples.push_back(eval(traj.samples[i].state()));

    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const auto& sa = traj.samples[idx[k]];
        const auto& sb = traj.samples[idx[k + 1]];
        double local_err = 0.0;
        for (std::size_t j = idx[k] + 1; j <= idx[k + 1]; ++j)
            local_err += traj.samples[j].err_est;
        const double scale = 1.0 + std::max(std::abs(sa.u), std::abs(sb.u)) +
                             std::max(std::abs(sa.v), std::abs(sb.v));
        const double slack = rep.samples[k].quad_error + rep.samples[k + 1].quad_error +
                             10.0 * scale * local_err;
        const double increase = rep.samples[k + 1].value - rep.samples[k].value;
        rep.max_increase = std::max(rep.max_increase, increase);
        rep.max_excess = std::max(rep.max_excess, increase - slack);
        if (increase > slack) {
            rep.violations.push_back({sa.t, sb.t, increase, slack});
            rep.passed = false;
        }
    }
    return rep;
}

} // namespace

LyapunovSample v1(const Nonlinearity& nl, double t0, const UvState& s,
                  const QuadTols& tols) {
    if (!(s.t >= t0)) throw std::invalid_argument("v1: state precedes t0");
    LyapunovSample out{s.t, 0.5 * s.u * s.u, 0.0};
    if (s.u == 0.0) {
        out.value = 0.0; // both terms carry a factor u
        return out;
    }
    const double v_fixed = s.v;
    QuadResult q = integrate_finite(
        [&](double ss) { return ss * nl.f(ss, v_fixed); }, t0, s.t, tols.rel, tols.abs);
    out.value += s.u * q.value;
    // non-convergence simply leaves a large estimate here; callers compare
    // against it rather than against the requested tolerance
    out.quad_error = std::abs(s.u) * q.abs_error_estimate;
    return out;
}

LyapunovSample v2(const Nonlinearity& nl, const UvState& s, const QuadTols& tols) {
    LyapunovSample out{s.t, 0.5 * s.u * s.u, 0.0};
    if (s.v == 0.0) return out;
    const double t_fixed = s.t;
    const double lo = std::min(0.0, s.v);
    const double hi = std::max(0.0, s.v);
    QuadResult q = integrate_finite(
        [&](double ss) { return nl.f(t_fixed, ss); }, lo, hi, tols.rel, tols.abs);
    const double signed_value = (s.v >= 0.0) ? q.value : -q.value;
    const double t3 = s.t * s.t * s.t;
    out.value += t3 * signed_value;
    out.quad_error = t3 * q.abs_error_estimate;
    return out;
}

MonotonicityReport monitor_v1(const Nonlinearity& nl, const IvpSpec& ivp,
                              const Trajectory& traj, const QuadTols& tols,
                              std::size_t max_points) {
    return monitor_common(traj, max_points, [&](const UvState& s) {
        return v1(nl, ivp.t0, s, tols);
    });
}

MonotonicityReport monitor_v2(const Nonlinearity& nl, const Trajectory& traj,
                              const QuadTols& tols, std::size_t max_points) {
    return monitor_common(traj, max_points, [&](const UvState& s) {
        return v2(nl, s, tols);
    });
}

BoundChainReport bound_chain(const Nonlinearity& nl, const IvpSpec& ivp,
                             const Trajectory& traj, const QuadTols& tols,
                             std::size_t max_points) {
    if (!nl.has_envelope())
        throw std::invalid_argument("bound_chain: envelope pair (a, g) required");
    if (traj.samples.empty())
        throw std::invalid_argument("bound_chain: empty trajectory");

    const DerivedConstants dc = derived_constants(ivp);
    BoundChainReport rep;
    rep.c = dc.c;

    // cumulative trapezoid of |u|/s^2 over every stored sample
    const auto& ss = traj.samples;
    std::vector<double> zint(ss.size(), 0.0);
    for (std::size_t i = 1; i < ss.size(); ++i) {
        const double fa = std::abs(ss[i - 1].u) / (ss[i - 1].t * ss[i - 1].t);
        const double fb = std::abs(ss[i].u) / (ss[i].t * ss[i].t);
        zint[i] = zint[i - 1] + 0.5 * (fa + fb) * (ss[i].t - ss[i - 1].t);
    }

    TailVerdict K = integrate_tail(
        [&](double s) { return s * nl.envelope_a(s); }, ivp.t0, tols.rel, tols.abs);
    rep.K_available = K.kind == TailVerdict::Kind::Convergent;
    rep.K = K.value;
    rep.K_error = K.error_estimate;

    const auto idx = monitor_indices(traj, max_points);
    rep.samples.reserve(idx.size());
    rep.passed = true;
    rep.envelope_bound_passed = rep.K_available;

    double prefix_a = 0.0; // integral of s a(s) over [t0, t_k]
    double prefix_a_err = 0.0;
    double prev_t = ivp.t0;
    for (std::size_t i : idx) {
        const auto& smp = ss[i];
        QuadResult q = integrate_finite(
            [&](double s) { return s * nl.envelope_a(s); }, prev_t, smp.t, tols.rel,
            tols.abs);
        prefix_a += q.value;
        prefix_a_err += q.abs_error_estimate;
        prev_t = smp.t;

        BoundChainSample bs;
        bs.t = smp.t;
        bs.abs_u = std::abs(smp.u);
        bs.y = prefix_a * nl.envelope_g(std::abs(smp.v));
        bs.z = 1.0 + std::abs(dc.v0) + zint[i];
        bs.bound_4yc = 4.0 * (bs.y + dc.c);
        rep.samples.push_back(bs);

        if (!(bs.abs_u < bs.bound_4yc)) rep.passed = false;
        if (bs.bound_4yc > 0.0)
            rep.max_u_over_bound = std::max(rep.max_u_over_bound, bs.abs_u / bs.bound_4yc);

        if (rep.K_available) {
            const double gz = nl.envelope_g(bs.z);
            const double slack = (rep.K_error + prefix_a_err) * std::max(gz, 1.0) +
                                 1e-12 * (1.0 + std::abs(rep.K) * gz);
            if (bs.y > rep.K * gz + slack) rep.envelope_bound_passed = false;
        }
    }
    return rep;
}

} // namespace oblique
