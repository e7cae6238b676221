#ifndef OBLIQUE_HYPOTHESES_HPP
#define OBLIQUE_HYPOTHESES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oblique/integrator.hpp"
#include "oblique/numerics.hpp"
#include "oblique/problem.hpp"

namespace oblique {

enum class ConditionStatus { Holds, Fails, Inconclusive };

const char* to_string(ConditionStatus s);

/// A failing sample point together with the values that witnessed the
/// violation; re-evaluating the condition there reproduces them.
struct Witness {
    double t = 0.0;
    std::optional<double> v;
    std::map<std::string, double> values;
};

/// Verdict for one named condition. Sign conditions over unbounded domains
/// are only ever sampled, so "holds" means "no violation on the declared
/// grid" and the note records that grid. Threshold verdicts carry their
/// computed quantities (K, c, lhs, rhs, margin) and require the margin to
/// clear the quadrature noise by a factor before declaring either way.
struct ConditionVerdict {
    std::string name;
    ConditionStatus status = ConditionStatus::Inconclusive;
    std::optional<Witness> witness; // present for every Fails
    std::map<std::string, double> computed;
    std::string note;
};

struct SamplingGrid {
    double t_lo = 1.0;
    double t_hi = 1e6;
    int t_count = 256;
    bool log_t = true;
    double v_max = 10.0;
    int v_count = 128;

    static SamplingGrid defaults(double t0);

    std::vector<double> t_points() const;
    std::vector<double> v_points() const;
    void validate() const; // counts >= 16, ordered ranges
    std::string describe() const;
};

struct CheckTols {
    double quad_rel = 1e-9;
    double quad_abs = 1e-13;
    double margin_factor = 10.0; // threshold |margin| must exceed factor * quad error
    double sign_rel = 1e-14;     // sampled-sign violation floor (relative)
    double fd_slack = 1e-8;      // extra absolute+relative slack for FD partials
};

/// Conditions of the general negative-coefficient theorem:
///   sign_vf       v f(t,v) <= 0                      (sampled)
///   sign_dfdv     df/dv <= 0                         (sampled, FD fallback)
///   envelope      |f| <= a g(|v|), g nondecreasing   (sampled)
///   K_finite      integral of t a(t) converges       (tail quadrature)
///   g_tail        integral of 1/g from 1 converges   (tail quadrature)
///   threshold_10  (4/t0)(K + c/g(1)) < integral_{1+|v0|}^inf dxi/g(xi)
/// The envelope-dependent verdicts are Inconclusive when no envelope was
/// supplied.
std::vector<ConditionVerdict> check_theorem1(const Nonlinearity& nl, const IvpSpec& ivp,
                                             const SamplingGrid& grid,
                                             const CheckTols& tols = {});

/// Sign conditions of the nonnegative-coefficient theorem, sampled away
/// from v = 0:
///   sign_vf_nonneg     v f(t,v) >= 0
///   sign_3f_tdfdt      v [3 f + t df/dt] <= 0
std::vector<ConditionVerdict> check_theorem2(const Nonlinearity& nl,
                                             const SamplingGrid& grid,
                                             const CheckTols& tols = {});

/// Emden-Fowler specialization with A <= 0:
///   A_nonpositive, threshold_15 (non-strict <=, unlike threshold_10).
std::vector<ConditionVerdict> check_ef_negative(const EmdenFowlerCoeff& ef,
                                                const IvpSpec& ivp,
                                                const CheckTols& tols = {},
                                                std::optional<SamplingGrid> grid = {});

/// Emden-Fowler specialization with A >= 0:
///   A_nonnegative, caligo_16 ((2n+2)A + tA' <= 0), and the implied decay
///   envelope caligo_envelope (A(t) <= A(t_lo) t_lo^(2n+2) t^-(2n+2)).
std::vector<ConditionVerdict> check_caligo(const EmdenFowlerCoeff& ef,
                                           const SamplingGrid& grid,
                                           const CheckTols& tols = {});

/// Nonoscillation-literature diagnostics for A >= 0:
///   waltman_18  integral of s^(2n) A(s) converges
///   potter_19   A'(t) <= 0 (sampled)
///   star_20     integral of s^(2n-1) A(s) converges
std::vector<ConditionVerdict> check_comparisons(const EmdenFowlerCoeff& ef, double t0,
                                                const CheckTols& tols = {},
                                                std::optional<SamplingGrid> grid = {});

/// Strict sign changes of x(t) = t v(t) along the stored samples; exact
/// zeros do not reset the running sign.
long count_sign_changes(const Trajectory& traj);

} // namespace oblique

#endif
