#include "oblique/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "oblique/detail/format.hpp"

namespace oblique {

using detail::fmt;

const char* to_string(ConditionStatus s) {
    switch (s) {
    case ConditionStatus::Holds:        return "holds";
    case ConditionStatus::Fails:        return "fails";
    case ConditionStatus::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

SamplingGrid SamplingGrid::defaults(double t0) {
    SamplingGrid g;
    g.t_lo = t0;
    g.t_hi = 1e6 * t0;
    return g;
}

void SamplingGrid::validate() const {
    if (t_count < 16 || v_count < 16)
        throw std::invalid_argument("SamplingGrid: counts must be >= 16");
    if (!(t_lo >= 1.0) || !(t_hi > t_lo))
        throw std::invalid_argument("SamplingGrid: need 1 <= t_lo < t_hi");
    if (!(v_max > 0.0)) throw std::invalid_argument("SamplingGrid: v_max must be positive");
}

std::vector<double> SamplingGrid::t_points() const {
    validate();
    std::vector<double> ts(static_cast<std::size_t>(t_count));
    if (log_t) {
        const double l0 = std::log(t_lo), l1 = std::log(t_hi);
        for (int i = 0; i < t_count; ++i)
            ts[static_cast<std::size_t>(i)] =
                std::exp(l0 + (l1 - l0) * i / static_cast<double>(t_count - 1));
        ts.front() = t_lo;
        ts.back() = t_hi;
    } else {
        for (int i = 0; i < t_count; ++i)
            ts[static_cast<std::size_t>(i)] =
                t_lo + (t_hi - t_lo) * i / static_cast<double>(t_count - 1);
    }
    return ts;
}

std::vector<double> SamplingGrid::v_points() const {
    validate();
    std::vector<double> vs(static_cast<std::size_t>(v_count));
    for (int i = 0; i < v_count; ++i)
        vs[static_cast<std::size_t>(i)] =
            -v_max + 2.0 * v_max * i / static_cast<double>(v_count - 1);
    return vs;
}

std::string SamplingGrid::describe() const {
    return std::to_string(t_count) + (log_t ? " log-spaced t in [" : " linear t in [") +
           fmt(t_lo) + ", " + fmt(t_hi) + "] x " + std::to_string(v_count) +
           " linear v in [-" + fmt(v_max) + ", " + fmt(v_max) + "]";
}

namespace {

// Sampled check of "value(t, v) <= 0" over the full grid. The violation
// floor keeps rounding at an exact-equality boundary from producing a
// spurious witness. Reports the worst violating point.
ConditionVerdict sampled_sign_tv(std::string name,
                                 const std::function<double(double, double)>& value,
                                 const SamplingGrid& grid, bool skip_v_zero,
                                 double slack_rel, const std::string& what) {
    ConditionVerdict out;
    out.name = std::move(name);
    out.status = ConditionStatus::Holds;
    double worst = 0.0;
    for (double t : grid.t_points()) {
        for (double v : grid.v_points()) {
            if (skip_v_zero && v == 0.0) continue;
            const double val = value(t, v);
            const double floor_ = slack_rel * (1.0 + std::abs(val));
            if (val > floor_ && val - floor_ > worst) {
                worst = val - floor_;
                out.status = ConditionStatus::Fails;
                Witness w;
                w.t = t;
                w.v = v;
                w.values = {{"violation", val}};
                out.witness = w;
            }
        }
    }
    if (out.status == ConditionStatus::Holds) {
        out.note = what + ": no violation on " + grid.describe();
    } else {
        out.note = what + ": violated on " + grid.describe();
        out.computed["max_violation"] = worst;
    }
    return out;
}

// Same for t-only conditions.
ConditionVerdict sampled_sign_t(std::string name,
                                const std::function<double(double)>& value,
                                const SamplingGrid& grid, double slack_rel,
                                const std::string& what) {
    ConditionVerdict out;
    out.name = std::move(name);
    out.status = ConditionStatus::Holds;
    double worst = 0.0;
    for (double t : grid.t_points()) {
        const double val = value(t);
        const double floor_ = slack_rel * (1.0 + std::abs(val));
        if (val > floor_ && val - floor_ > worst) {
            worst = val - floor_;
            out.status = ConditionStatus::Fails;
            Witness w;
            w.t = t;
            w.values = {{"violation", val}};
            out.witness = w;
        }
    }
    if (out.status == ConditionStatus::Holds) {
        out.note = what + ": no violation on " + grid.describe();
    } else {
        out.note = what + ": violated on " + grid.describe();
        out.computed["max_violation"] = worst;
    }
    return out;
}

ConditionVerdict tail_verdict(std::string name, const TailVerdict& tv,
                              const std::string& quantity) {
    ConditionVerdict out;
    out.name = std::move(name);
    out.computed["accumulated"] = tv.value;
    switch (tv.kind) {
    case TailVerdict::Kind::Convergent:
        out.status = ConditionStatus::Holds;
        out.computed["value"] = tv.value;
        out.computed["quad_error"] = tv.error_estimate;
        out.note = quantity + " converges";
        break;
    case TailVerdict::Kind::Divergent: {
        out.status = ConditionStatus::Fails;
        Witness w;
        w.t = tv.evidence.empty() ? 0.0 : tv.evidence.back().first;
        w.values = {{"accumulated", tv.value}};
        out.witness = w;
        out.note = quantity + " diverges over the doubling schedule";
        break;
    }
    case TailVerdict::Kind::Inconclusive:
        out.status = ConditionStatus::Inconclusive;
        out.note = quantity + ": tail behavior inconclusive on the doubling schedule";
        break;
    }
    return out;
}

// margin = rhs - lhs; either way the call only counts when it clears the
// quadrature noise by margin_factor.
ConditionVerdict threshold_verdict(std::string name, double lhs, double rhs,
                                   double quad_err, const CheckTols& tols,
                                   double witness_t, double witness_v,
                                   std::map<std::string, double> computed,
                                   const std::string& strictness) {
    ConditionVerdict out;
    out.name = std::move(name);
    const double margin = rhs - lhs;
    computed["lhs"] = lhs;
    computed["rhs"] = rhs;
    computed["margin"] = margin;
    computed["quad_error"] = quad_err;
    out.computed = std::move(computed);
    if (margin > tols.margin_factor * quad_err) {
        out.status = ConditionStatus::Holds;
    } else if (margin < -tols.margin_factor * quad_err) {
        out.status = ConditionStatus::Fails;
        Witness w;
        w.t = witness_t;
        w.v = witness_v;
        w.values = {{"lhs", lhs}, {"rhs", rhs}};
        out.witness = w;
    } else {
        out.status = ConditionStatus::Inconclusive;
        out.note = "margin " + fmt(margin) + " within quadrature noise";
        return out;
    }
    out.note = "threshold compared " + strictness + "; margin = " + fmt(margin);
    return out;
}

ConditionVerdict inconclusive(std::string name, std::string why) {
    ConditionVerdict out;
    out.name = std::move(name);
    out.status = ConditionStatus::Inconclusive;
    out.note = std::move(why);
    return out;
}

} // namespace

std::vector<ConditionVerdict> check_theorem1(const Nonlinearity& nl, const IvpSpec& ivp,
                                             const SamplingGrid& grid,
                                             const CheckTols& tols) {
    grid.validate();
    const DerivedConstants dc = derived_constants(ivp);
    std::vector<ConditionVerdict> out;

    out.push_back(sampled_sign_tv(
        "sign_vf", [&](double t, double v) { return v * nl.f(t, v); }, grid, false,
        tols.sign_rel, "v f(t,v) <= 0"));

    const double dfdv_slack = nl.df_dv ? tols.sign_rel : tols.fd_slack;
    out.push_back(sampled_sign_tv(
        "sign_dfdv", [&](double t, double v) { return nl.dfdv_or_fd(t, v); }, grid,
        false, dfdv_slack, nl.df_dv ? "df/dv <= 0" : "df/dv <= 0 (finite differences)"));

    if (!nl.has_envelope()) {
        const char* why = "no envelope pair (a, g) supplied";
        out.push_back(inconclusive("envelope", why));
        out.push_back(inconclusive("K_finite", why));
        out.push_back(inconclusive("g_tail", why));
        out.push_back(inconclusive("threshold_10", why));
        return out;
    }

    // |f| <= a g(|v|), plus g nondecreasing and positive away from 0 on the
    // sampled ray.
    {
        ConditionVerdict env = sampled_sign_tv(
            "envelope",
            [&](double t, double v) {
                return std::abs(nl.f(t, v)) - nl.envelope_a(t) * nl.envelope_g(std::abs(v));
            },
            grid, false, 1e-12, "|f| <= a(t) g(|v|)");
        double prev_g = 0.0;
        bool first = true;
        for (double v : grid.v_points()) {
            const double xi = std::abs(v);
            if (xi == 0.0) continue;
            const double gv = nl.envelope_g(xi);
            if (gv <= 0.0 && env.status != ConditionStatus::Fails) {
                env.status = ConditionStatus::Fails;
                Witness w;
                w.t = grid.t_lo;
                w.v = xi;
                w.values = {{"g", gv}};
                env.witness = w;
                env.note = "g must be positive for xi > 0";
            }
            if (!first && gv < prev_g * (1.0 - 1e-12) &&
                env.status != ConditionStatus::Fails) {
                env.status = ConditionStatus::Fails;
                Witness w;
                w.t = grid.t_lo;
                w.v = xi;
                w.values = {{"g", gv}, {"g_prev", prev_g}};
                env.witness = w;
                env.note = "g must be nondecreasing";
            }
            prev_g = std::max(prev_g, gv);
            first = false;
        }
        out.push_back(std::move(env));
    }

    TailVerdict K = integrate_tail([&](double t) { return t * nl.envelope_a(t); },
                                   ivp.t0, tols.quad_rel, tols.quad_abs);
    out.push_back(tail_verdict("K_finite", K, "K = integral of t a(t)"));

    TailVerdict g1 = integrate_tail([&](double xi) { return 1.0 / nl.envelope_g(xi); },
                                    1.0, tols.quad_rel, tols.quad_abs);
    out.push_back(tail_verdict("g_tail", g1, "integral of 1/g from 1"));

    if (K.kind != TailVerdict::Kind::Convergent) {
        out.push_back(inconclusive("threshold_10", "K not available (tail not convergent)"));
        return out;
    }
    TailVerdict rhs_tail =
        integrate_tail([&](double xi) { return 1.0 / nl.envelope_g(xi); },
                       1.0 + std::abs(dc.v0), tols.quad_rel, tols.quad_abs);
    if (rhs_tail.kind != TailVerdict::Kind::Convergent) {
        ConditionVerdict v = inconclusive(
            "threshold_10", "right side integral of 1/g not convergent");
        if (rhs_tail.kind == TailVerdict::Kind::Divergent) {
            // a divergent right side can never be beaten by a finite lhs...
            // it holds vacuously with infinite margin
            v.status = ConditionStatus::Holds;
            v.note = "right side integral of 1/g diverges; condition holds with "
                     "unbounded margin";
        }
        out.push_back(std::move(v));
        return out;
    }

    const double g_at_1 = nl.envelope_g(1.0);
    const double lhs = (4.0 / ivp.t0) * (K.value + dc.c / g_at_1);
    const double err = (4.0 / ivp.t0) * K.error_estimate + rhs_tail.error_estimate;
    out.push_back(threshold_verdict(
        "threshold_10", lhs, rhs_tail.value, err, tols, ivp.t0, dc.v0,
        {{"K", K.value}, {"c", dc.c}, {"g1", g_at_1}}, "strictly (<)"));
    return out;
}

std::vector<ConditionVerdict> check_theorem2(const Nonlinearity& nl,
                                             const SamplingGrid& grid,
                                             const CheckTols& tols) {
    grid.validate();
    std::vector<ConditionVerdict> out;
    out.push_back(sampled_sign_tv(
        "sign_vf_nonneg", [&](double t, double v) { return -(v * nl.f(t, v)); }, grid,
        true, tols.sign_rel, "v f(t,v) >= 0 (v != 0)"));

    const double slack = nl.df_dt ? tols.sign_rel : tols.fd_slack;
    out.push_back(sampled_sign_tv(
        "sign_3f_tdfdt",
        [&](double t, double v) {
            return v * (3.0 * nl.f(t, v) + t * nl.dfdt_or_fd(t, v));
        },
        grid, true, slack,
        nl.df_dt ? "v [3f + t df/dt] <= 0 (v != 0)"
                 : "v [3f + t df/dt] <= 0 (v != 0, finite differences)"));
    return out;
}

std::vector<ConditionVerdict> check_ef_negative(const EmdenFowlerCoeff& ef,
                                                const IvpSpec& ivp,
                                                const CheckTols& tols,
                                                std::optional<SamplingGrid> grid) {
    if (ef.n < 1) throw std::invalid_argument("check_ef_negative: n must be >= 1");
    const DerivedConstants dc = derived_constants(ivp);
    const SamplingGrid g = grid ? *grid : SamplingGrid::defaults(ivp.t0);
    std::vector<ConditionVerdict> out;

    out.push_back(sampled_sign_t(
        "A_nonpositive", [&](double t) { return ef.A(t); }, g, tols.sign_rel,
        "A(t) <= 0"));

    const long long p2n = 2LL * ef.n;
    TailVerdict I = integrate_tail(
        [&](double t) { return ipow(t, p2n) * std::abs(ef.A(t)); }, ivp.t0,
        tols.quad_rel, tols.quad_abs);
    if (I.kind != TailVerdict::Kind::Convergent) {
        out.push_back(inconclusive(
            "threshold_15",
            I.kind == TailVerdict::Kind::Divergent
                ? "integral of t^(2n) |A| diverges; the theorem does not apply"
                : "integral of t^(2n) |A| inconclusive on the doubling schedule"));
        return out;
    }

    const double lhs = (4.0 / ivp.t0) * (dc.c + I.value);
    const double rhs =
        1.0 / (2.0 * ef.n * ipow(1.0 + std::abs(dc.v0), p2n));
    const double err = (4.0 / ivp.t0) * I.error_estimate;
    out.push_back(threshold_verdict(
        "threshold_15", lhs, rhs, err, tols, ivp.t0, dc.v0,
        {{"I_t2nA", I.value}, {"c", dc.c}, {"n", static_cast<double>(ef.n)}},
        "non-strictly (<=)"));
    return out;
}

std::vector<ConditionVerdict> check_caligo(const EmdenFowlerCoeff& ef,
                                           const SamplingGrid& grid,
                                           const CheckTols& tols) {
    if (ef.n < 1) throw std::invalid_argument("check_caligo: n must be >= 1");
    grid.validate();
    std::vector<ConditionVerdict> out;

    out.push_back(sampled_sign_t(
        "A_nonnegative", [&](double t) { return -ef.A(t); }, grid, tols.sign_rel,
        "A(t) >= 0"));

    const double m = 2.0 * ef.n + 2.0;
    auto dA = [&](double t) {
        return ef.dA_dt ? ef.dA_dt(t) : central_diff(ef.A, t, 1.0);
    };
    const double slack = ef.dA_dt ? tols.sign_rel : tols.fd_slack;
    out.push_back(sampled_sign_t(
        "caligo_16", [&](double t) { return m * ef.A(t) + t * dA(t); }, grid, slack,
        ef.dA_dt ? "(2n+2) A + t A' <= 0" : "(2n+2) A + t A' <= 0 (finite differences)"));

    // implied decay envelope, calibrated at the grid's left edge
    const double c_cal = ef.A(grid.t_lo) * ipow(grid.t_lo, static_cast<long long>(m));
    ConditionVerdict env = sampled_sign_t(
        "caligo_envelope",
        [&](double t) { return ef.A(t) - c_cal * std::pow(t, -m); }, grid, 1e-12,
        "0 <= A(t) <= c t^-(2n+2) with c = A(t_lo) t_lo^(2n+2)");
    env.computed["c_envelope"] = c_cal;
    out.push_back(std::move(env));
    return out;
}

std::vector<ConditionVerdict> check_comparisons(const EmdenFowlerCoeff& ef, double t0,
                                                const CheckTols& tols,
                                                std::optional<SamplingGrid> grid) {
    if (ef.n < 1) throw std::invalid_argument("check_comparisons: n must be >= 1");
    if (!(t0 >= 1.0)) throw std::invalid_argument("check_comparisons: t0 must be >= 1");
    const SamplingGrid g = grid ? *grid : SamplingGrid::defaults(t0);
    std::vector<ConditionVerdict> out;

    TailVerdict waltman = integrate_tail(
        [&](double s) { return ipow(s, 2LL * ef.n) * ef.A(s); }, t0, tols.quad_rel,
        tols.quad_abs);
    out.push_back(tail_verdict("waltman_18", waltman, "integral of s^(2n) A(s)"));

    auto dA = [&](double t) {
        return ef.dA_dt ? ef.dA_dt(t) : central_diff(ef.A, t, 1.0);
    };
    out.push_back(sampled_sign_t(
        "potter_19", dA, g, ef.dA_dt ? tols.sign_rel : tols.fd_slack,
        ef.dA_dt ? "A'(t) <= 0" : "A'(t) <= 0 (finite differences)"));

    TailVerdict star = integrate_tail(
        [&](double s) { return ipow(s, 2LL * ef.n - 1) * ef.A(s); }, t0, tols.quad_rel,
        tols.quad_abs);
    out.push_back(tail_verdict("star_20", star, "integral of s^(2n-1) A(s)"));
    return out;
}

long count_sign_changes(const Trajectory& traj) {
    if (traj.samples.empty())
        throw std::invalid_argument("count_sign_changes: empty trajectory");
    long count = 0;
    int last_sign = 0;
    for (const auto& s : traj.samples) {
        const double x = s.t * s.v;
        const int sign = (x > 0.0) - (x < 0.0);
        if (sign != 0) {
            if (last_sign != 0 && sign != last_sign) ++count;
            last_sign = sign;
        }
    }
    return count;
}

} // namespace oblique
