#include "oblique/asymptote.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oblique/numerics.hpp"

namespace oblique {

const char* to_string(ClassificationKind k) {
    switch (k) {
    case ClassificationKind::Blowup:               return "blowup";
    case ClassificationKind::Sublinear:            return "sublinear";
    case ClassificationKind::AsymptoticallyLinear: return "asymptotically_linear";
    case ClassificationKind::Unbounded:            return "unbounded";
    case ClassificationKind::Undetermined:         return "undetermined";
    }
    return "unknown";
}

AsymptoteEstimate estimate(const Trajectory& traj, std::size_t window) {
    if (!traj.reached_horizon())
        throw std::invalid_argument("estimate: trajectory did not reach the horizon");
    const auto& ss = traj.samples;
    if (ss.size() < 3)
        throw std::invalid_argument("estimate: trajectory too short");

    window = std::clamp<std::size_t>(window, 3, ss.size());
    const std::size_t begin = ss.size() - window;

    std::vector<std::pair<double, double>> w_seq, u_seq;
    w_seq.reserve(window);
    u_seq.reserve(window);
    for (std::size_t i = begin; i < ss.size(); ++i) {
        w_seq.emplace_back(ss[i].t, ss[i].v + ss[i].u / ss[i].t);
        u_seq.emplace_back(ss[i].t, ss[i].u);
    }
    const TailLimit x1_lim = tail_limit(w_seq, window);
    const TailLimit u_lim = tail_limit(u_seq, window);

    std::vector<std::pair<double, double>> icpt_seq;
    icpt_seq.reserve(window);
    for (std::size_t i = begin; i < ss.size(); ++i)
        icpt_seq.emplace_back(ss[i].t, ss[i].t * (ss[i].v - x1_lim.limit));
    const TailLimit x2_alt_lim = tail_limit(icpt_seq, window);

    AsymptoteEstimate est;
    est.x1 = x1_lim.limit;
    est.x1_spread = x1_lim.spread;
    est.u_limit = u_lim.limit;
    est.u_spread = u_lim.spread;
    est.x2 = -u_lim.limit;
    est.x2_alt = x2_alt_lim.limit;
    est.x2_alt_spread = x2_alt_lim.spread;
    est.consistency_residual = std::abs(x2_alt_lim.limit + u_lim.limit);
    est.window_used = window;
    est.window_t_lo = ss[begin].t;
    est.window_t_hi = ss.back().t;
    return est;
}

Classification classify(const Trajectory& traj,
                        const std::optional<AsymptoteEstimate>& est,
                        const ClassifyConfig& cfg) {
    Classification out;
    out.horizon = traj.samples.empty() ? 0.0 : traj.samples.back().t;

    if (traj.termination.kind == TerminationKind::Blowup) {
        out.kind = ClassificationKind::Blowup;
        out.t_singularity = traj.termination.t_singularity;
        out.t_singularity_uncertainty = traj.termination.t_singularity_uncertainty;
        out.note = traj.termination.message;
        return out;
    }
    if (traj.termination.kind != TerminationKind::ReachedHorizon) {
        out.note = std::string("integration ended early: ") +
                   to_string(traj.termination.kind) +
                   (traj.termination.message.empty() ? "" :
                    " (" + traj.termination.message + ")");
        return out;
    }

    // growth between the log-t halves of the run
    const double t0 = traj.samples.front().t;
    const double t1 = traj.samples.back().t;
    if (t1 > t0) {
        const double t_mid = std::sqrt(t0 * t1);
        double m1 = 0.0, m2 = 0.0;
        for (const auto& s : traj.samples)
            (s.t <= t_mid ? m1 : m2) = std::max(s.t <= t_mid ? m1 : m2, std::abs(s.u));
        if (m1 == 0.0)
            out.growth_ratio = (m2 == 0.0) ? 1.0
                                           : std::numeric_limits<double>::infinity();
        else
            out.growth_ratio = m2 / m1;
        if (out.growth_ratio >= cfg.growth_factor) {
            out.kind = ClassificationKind::Unbounded;
            out.note = "max |u| grew by " + std::to_string(out.growth_ratio) +
                       "x between the log-t halves";
            return out;
        }
    }

    if (!est) {
        out.note = "no asymptote estimate supplied";
        return out;
    }

    out.u_spread = est->u_spread;
    out.limit_tol = cfg.limit_tol_rel * (1.0 + std::abs(est->u_limit));
    if (est->u_spread <= out.limit_tol) {
        if (std::abs(est->x1) > cfg.slope_floor) {
            out.kind = ClassificationKind::AsymptoticallyLinear;
            out.x1 = est->x1;
            out.x2 = est->x2;
        } else {
            out.kind = ClassificationKind::Sublinear;
        }
        return out;
    }
    out.note = "u limit not settled: spread " + std::to_string(est->u_spread) +
               " above tolerance " + std::to_string(out.limit_tol);
    return out;
}

} // namespace oblique
