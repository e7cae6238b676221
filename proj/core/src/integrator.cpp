#include "oblique/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oblique {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
// 5th-order weights minus the embedded 4th-order weights.
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

struct Vec2 {
    double u = 0.0, v = 0.0;
};

struct RhsError {
    double t;
    std::string message;
};

class Stepper {
public:
    Stepper(const Nonlinearity& nl, long& evals) : nl_(nl), evals_(&evals) {}

    Vec2 rhs(double t, Vec2 y) const {
        ++*evals_;
        UvDerivative d = uv_rhs(nl_, UvState{t, y.u, y.v});
        return Vec2{d.du, d.dv};
    }

    // One DOPRI5 step from (t, y, k1). Returns the advanced state, the FSAL
    // derivative (stage 7), and the scaled error norm.
    void step(double t, double h, const Vec2& y, const Vec2& k1, double rel_tol,
              double abs_tol, Vec2& y_out, Vec2& k_fsal, double& err_scaled,
              double& err_unscaled) const {
        auto fma2 = [](const Vec2& base, double hh, double a1, const Vec2& v1,
                       double a2 = 0, const Vec2& v2 = {}, double a3 = 0,
                       const Vec2& v3 = {}, double a4 = 0, const Vec2& v4 = {},
                       double a5 = 0, const Vec2& v5 = {}, double a6 = 0,
                       const Vec2& v6 = {}) {
            Vec2 r;
            r.u = base.u + hh * (a1 * v1.u + a2 * v2.u + a3 * v3.u + a4 * v4.u +
                                 a5 * v5.u + a6 * v6.u);
            r.v = base.v + hh * (a1 * v1.v + a2 * v2.v + a3 * v3.v + a4 * v4.v +
                                 a5 * v5.v + a6 * v6.v);
            return r;
        };

        Vec2 k2 = rhs(t + kC2 * h, fma2(y, h, kA21, k1));
        Vec2 k3 = rhs(t + kC3 * h, fma2(y, h, kA31, k1, kA32, k2));
        Vec2 k4 = rhs(t + kC4 * h, fma2(y, h, kA41, k1, kA42, k2, kA43, k3));
        Vec2 k5 = rhs(t + kC5 * h, fma2(y, h, kA51, k1, kA52, k2, kA53, k3, kA54, k4));
        Vec2 k6 = rhs(t + h, fma2(y, h, kA61, k1, kA62, k2, kA63, k3, kA64, k4, kA65, k5));
        y_out = fma2(y, h, kB1, k1, kB3, k3, kB4, k4, kB5, k5, kB6, k6);
        k_fsal = rhs(t + h, y_out);

        const double eu = h * (kE1 * k1.u + kE3 * k3.u + kE4 * k4.u + kE5 * k5.u +
                               kE6 * k6.u + kE7 * k_fsal.u);
        const double ev = h * (kE1 * k1.v + kE3 * k3.v + kE4 * k4.v + kE5 * k5.v +
                               kE6 * k6.v + kE7 * k_fsal.v);
        const double su = abs_tol + rel_tol * std::max(std::abs(y.u), std::abs(y_out.u));
        const double sv = abs_tol + rel_tol * std::max(std::abs(y.v), std::abs(y_out.v));
        err_scaled = std::sqrt(0.5 * ((eu / su) * (eu / su) + (ev / sv) * (ev / sv)));
        err_unscaled = std::sqrt(eu * eu + ev * ev);
    }

private:
    const Nonlinearity& nl_;
    long* evals_;
};

// Classic starting-step heuristic (order 5).
double initial_step(const Stepper& st, double t0, const Vec2& y0, const Vec2& f0,
                    double dir, double rel_tol, double abs_tol, double span) {
    const double su = abs_tol + rel_tol * std::abs(y0.u);
    const double sv = abs_tol + rel_tol * std::abs(y0.v);
    const double d0 = std::sqrt(0.5 * ((y0.u / su) * (y0.u / su) + (y0.v / sv) * (y0.v / sv)));
    const double d1 = std::sqrt(0.5 * ((f0.u / su) * (f0.u / su) + (f0.v / sv) * (f0.v / sv)));
    double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, span);
    double h1 = h0;
    try {
        Vec2 y1{y0.u + dir * h0 * f0.u, y0.v + dir * h0 * f0.v};
        Vec2 f1 = st.rhs(t0 + dir * h0, y1);
        const double d2 = std::sqrt(0.5 * (((f1.u - f0.u) / su) * ((f1.u - f0.u) / su) +
                                           ((f1.v - f0.v) / sv) * ((f1.v - f0.v) / sv))) / h0;
        const double dm = std::max(d1, d2);
        h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                           : std::pow(0.01 / dm, 0.2);
    } catch (const std::exception&) {
        h1 = h0 * 1e-3; // probe failed; start conservatively
    }
    return std::min({100.0 * h0, h1, span});
}

double sum_abs_x_xp(const UvState& s) {
    XState xs = from_uv(s);
    return std::abs(xs.x) + std::abs(xs.xp);
}

// Geometric extrapolation of the step collapse onto the singularity.
void estimate_singularity(const std::vector<TrajectorySample>& samples, double dir,
                          Termination& term) {
    const std::size_t n = samples.size();
    term.t_last = samples.back().t;
    if (n < 3) {
        term.t_singularity = samples.back().t;
        term.t_singularity_uncertainty =
            n >= 2 ? 10.0 * std::abs(samples[n - 1].t - samples[n - 2].t) : 0.0;
        return;
    }
    const std::size_t m = std::min<std::size_t>(n, 6); // up to 5 trailing steps
    std::vector<double> hs;
    for (std::size_t i = n - m + 1; i < n; ++i)
        hs.push_back(std::abs(samples[i].t - samples[i - 1].t));
    std::vector<double> ratios;
    for (std::size_t i = 1; i < hs.size(); ++i)
        if (hs[i - 1] > 0.0) ratios.push_back(hs[i] / hs[i - 1]);
    double r = 1.0;
    if (!ratios.empty()) {
        std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
        r = ratios[ratios.size() / 2];
    }
    const double h_last = hs.back();
    double t_inf = samples.back().t;
    if (r < 0.999) t_inf += dir * h_last * r / (1.0 - r);
    term.t_singularity = t_inf;
    term.t_singularity_uncertainty = 10.0 * h_last;
}

} // namespace

const char* to_string(TerminationKind k) {
    switch (k) {
    case TerminationKind::ReachedHorizon:      return "reached_horizon";
    case TerminationKind::Blowup:              return "blowup";
    case TerminationKind::StepCollapse:        return "step_collapse";
    case TerminationKind::StepBudgetExhausted: return "step_budget_exhausted";
    case TerminationKind::EvalError:           return "eval_error";
    }
    return "unknown";
}

Trajectory integrate(const Nonlinearity& nl, const IvpSpec& ivp,
                     const IntegrationConfig& cfg) {
    if (!nl.f) throw std::invalid_argument("integrate: nonlinearity has no f");
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
        throw std::invalid_argument("integrate: tolerances must be positive");
    if (!(cfg.blowup_threshold > 0.0))
        throw std::invalid_argument("integrate: blowup_threshold must be positive");
    if (cfg.max_steps <= 0 || cfg.sample_stride < 1)
        throw std::invalid_argument("integrate: bad step budget or stride");
    if (!(std::min(ivp.t0, cfg.t_end) >= 1.0))
        throw std::invalid_argument("integrate: domain requires t >= 1");

    const DerivedConstants dc = derived_constants(ivp);
    const double dir = (cfg.t_end >= ivp.t0) ? 1.0 : -1.0;

    Trajectory traj;
    traj.t0 = ivp.t0;

    // Landing targets: in-range breakpoints (direction order), then the horizon.
    std::vector<double> targets;
    for (double b : cfg.breakpoints) {
        if (dir > 0 ? (b > ivp.t0 && b < cfg.t_end) : (b < ivp.t0 && b > cfg.t_end))
            targets.push_back(b);
    }
    std::sort(targets.begin(), targets.end());
    if (dir < 0) std::reverse(targets.begin(), targets.end());
    targets.push_back(cfg.t_end);
    std::size_t next_target = 0;

    Stepper st(nl, traj.n_rhs_evals);

    double t = ivp.t0;
    Vec2 y{dc.u0, dc.v0};
    Vec2 k1;
    try {
        k1 = st.rhs(t, y);
    } catch (const std::exception& e) {
        traj.samples.push_back({t, y.u, y.v, 0.0, 0.0, 0.0});
        traj.termination = {TerminationKind::EvalError, t, {}, {}, e.what()};
        return traj;
    }
    traj.samples.push_back({t, y.u, y.v, k1.u, k1.v, 0.0});

    if (cfg.t_end == ivp.t0) {
        traj.termination = {TerminationKind::ReachedHorizon, t, {}, {}, ""};
        traj.events.push_back({Event::Kind::Horizon, t, UvState{t, y.u, y.v}});
        return traj;
    }

    // immediate blowup at the initial state
    if (sum_abs_x_xp(UvState{t, y.u, y.v}) >= cfg.blowup_threshold) {
        traj.termination = {TerminationKind::Blowup, t, t, 0.0,
                            "initial state beyond blowup threshold"};
        traj.events.push_back({Event::Kind::Blowup, t, UvState{t, y.u, y.v}});
        return traj;
    }

    double h = initial_step(st, t, y, k1, dir, cfg.rel_tol, cfg.abs_tol,
                            std::abs(targets[0] - t));

    // PI controller constants (stabilized step control).
    constexpr double kBeta = 0.04;
    constexpr double kExpo1 = 0.2 - kBeta * 0.75;
    constexpr double kSafe = 0.9;
    constexpr double kFacc1 = 5.0;  // max shrink 1/5
    constexpr double kFacc2 = 0.1;  // max growth 10x
    double facold = 1e-4;
    bool last_rejected = false;

    const double initial_growth = sum_abs_x_xp(UvState{ivp.t0, dc.u0, dc.v0});
    long attempts = 0;
    const long attempt_budget = 10 * cfg.max_steps;
    long pending_since_stored = 0;

    auto store_sample = [&](const TrajectorySample& s, bool force) {
        ++pending_since_stored;
        if (force || pending_since_stored >= cfg.sample_stride) {
            traj.samples.push_back(s);
            pending_since_stored = 0;
        }
    };
    auto force_last_sample = [&](const TrajectorySample& s) {
        if (traj.samples.back().t != s.t) traj.samples.push_back(s);
    };

    TrajectorySample last_accepted = traj.samples.back();
    std::vector<TrajectorySample> tail; // trailing accepted steps for T_inf fits
    tail.push_back(last_accepted);

    while (true) {
        const double target = targets[next_target];
        bool clamped = false;
        if (std::abs(h) >= std::abs(target - t)) {
            h = std::abs(target - t);
            clamped = true;
        }
        const double h_signed = dir * std::abs(h);

        if (++attempts > attempt_budget) {
            traj.termination = {TerminationKind::StepBudgetExhausted, t, {}, {},
                                "attempt budget exhausted"};
            force_last_sample(last_accepted);
            return traj;
        }

        Vec2 y1, k_fsal;
        double err = 0.0, err_unscaled = 0.0;
        bool eval_failed = false;
        std::string eval_msg;
        try {
            st.step(t, h_signed, y, k1, cfg.rel_tol, cfg.abs_tol, y1, k_fsal, err,
                    err_unscaled);
        } catch (const std::exception& e) {
            eval_failed = true;
            eval_msg = e.what();
        }
        if (eval_failed || !std::isfinite(err)) {
            // shrink and retry; a persistent failure collapses the step below
            // the floor and terminates through the collapse path
            err = 1e10;
        }

        if (err <= 1.0) {
            // accepted
            t = (clamped ? target : t + h_signed);
            y = y1;
            k1 = k_fsal;
            ++traj.n_accepted;
            facold = std::max(err, 1e-4);

            last_accepted = {t, y.u, y.v, k1.u, k1.v, err_unscaled};
            tail.push_back(last_accepted);
            if (tail.size() > 6) tail.erase(tail.begin());

            const double growth = sum_abs_x_xp(UvState{t, y.u, y.v});
            if (growth >= cfg.blowup_threshold) {
                store_sample(last_accepted, true);
                traj.termination.kind = TerminationKind::Blowup;
                traj.termination.message = "|x| + |x'| crossed the blowup threshold";
                estimate_singularity(tail, dir, traj.termination);
                traj.termination.t_last = t;
                traj.events.push_back({Event::Kind::Blowup, t, UvState{t, y.u, y.v}});
                return traj;
            }

            if (clamped && target == cfg.t_end) {
                store_sample(last_accepted, true);
                traj.termination = {TerminationKind::ReachedHorizon, t, {}, {}, ""};
                traj.events.push_back({Event::Kind::Horizon, t, UvState{t, y.u, y.v}});
                return traj;
            }
            if (clamped) {
                ++next_target;
                store_sample(last_accepted, true); // breakpoints always kept
            } else {
                store_sample(last_accepted, false);
            }

            if (traj.n_accepted >= cfg.max_steps) {
                force_last_sample(last_accepted);
                traj.termination = {TerminationKind::StepBudgetExhausted, t, {}, {},
                                    "accepted-step budget exhausted"};
                return traj;
            }

            // step collapse check (genuine steps only, not target landings)
            if (!clamped && std::abs(h_signed) < cfg.h_min_factor * std::abs(t)) {
                force_last_sample(last_accepted);
                if (growth >= 1e-3 * cfg.blowup_threshold ||
                    growth >= 100.0 * std::max(1.0, initial_growth)) {
                    traj.termination.kind = TerminationKind::Blowup;
                    traj.termination.message = "step collapse in a growing solution";
                    estimate_singularity(tail, dir, traj.termination);
                    traj.termination.t_last = t;
                    traj.events.push_back({Event::Kind::Blowup, t, UvState{t, y.u, y.v}});
                } else if (eval_failed) {
                    traj.termination = {TerminationKind::EvalError, t, {}, {}, eval_msg};
                } else {
                    traj.termination = {TerminationKind::StepCollapse, t, {}, {},
                                        "step size collapsed without growth"};
                }
                return traj;
            }

            const double fac11 = std::pow(err, kExpo1);
            double fac = fac11 / std::pow(facold, kBeta);
            fac = std::max(kFacc2, std::min(kFacc1, fac / kSafe));
            double hnew = std::abs(h) / fac;
            if (last_rejected) hnew = std::min(hnew, std::abs(h));
            last_rejected = false;
            h = hnew;
        } else {
            // rejected
            ++traj.n_rejected;
            const double fac11 = std::pow(err, kExpo1);
            h = std::abs(h) / std::min(kFacc1, fac11 / kSafe);
            last_rejected = true;

            if (std::abs(h) < cfg.h_min_factor * std::abs(t) ||
                t + dir * std::abs(h) == t) {
                force_last_sample(last_accepted);
                const double growth = sum_abs_x_xp(UvState{t, y.u, y.v});
                if (growth >= 1e-3 * cfg.blowup_threshold ||
                    growth >= 100.0 * std::max(1.0, initial_growth)) {
                    traj.termination.kind = TerminationKind::Blowup;
                    traj.termination.message =
                        "step collapse under repeated rejection in a growing solution";
                    estimate_singularity(tail, dir, traj.termination);
                    traj.termination.t_last = t;
                    traj.events.push_back({Event::Kind::Blowup, t, UvState{t, y.u, y.v}});
                } else if (eval_failed) {
                    traj.termination = {TerminationKind::EvalError, t, {}, {}, eval_msg};
                } else {
                    traj.termination = {TerminationKind::StepCollapse, t, {}, {},
                                        "step size collapsed without growth"};
                }
                return traj;
            }
        }
    }
}

namespace {

UvState hermite(const TrajectorySample& a, const TrajectorySample& b, double t) {
    const double h = b.t - a.t;
    const double th = (t - a.t) / h;
    const double th2 = th * th, th3 = th2 * th;
    const double h00 = 2 * th3 - 3 * th2 + 1;
    const double h10 = th3 - 2 * th2 + th;
    const double h01 = -2 * th3 + 3 * th2;
    const double h11 = th3 - th2;
    UvState s;
    s.t = t;
    s.u = h00 * a.u + h * h10 * a.du + h01 * b.u + h * h11 * b.du;
    s.v = h00 * a.v + h * h10 * a.dv + h01 * b.v + h * h11 * b.dv;
    return s;
}

} // namespace

std::vector<UvState> resample(const Trajectory& traj, const std::vector<double>& times) {
    if (traj.samples.empty()) throw std::out_of_range("resample: empty trajectory");
    const double t_first = traj.samples.front().t;
    const double t_last = traj.samples.back().t;
    const double dir = (t_last >= t_first) ? 1.0 : -1.0;

    std::vector<UvState> out;
    out.reserve(times.size());
    for (double t : times) {
        if (dir * t < dir * t_first || dir * t > dir * t_last)
            throw std::out_of_range("resample: time outside the trajectory span");
        auto it = std::lower_bound(
            traj.samples.begin(), traj.samples.end(), t,
            [dir](const TrajectorySample& s, double tt) { return dir * s.t < dir * tt; });
        if (it != traj.samples.end() && it->t == t) {
            out.push_back(it->state());
            continue;
        }
        const TrajectorySample& b = *it;
        const TrajectorySample& a = *(it - 1);
        out.push_back(hermite(a, b, t));
    }
    return out;
}

UvState resample_at(const Trajectory& traj, double time) {
    return resample(traj, {time}).front();
}

} // namespace oblique
