#ifndef OBLIQUE_ASYMPTOTE_HPP
#define OBLIQUE_ASYMPTOTE_HPP

#include <cstddef>
#include <optional>
#include <string>

#include "oblique/integrator.hpp"

namespace oblique {

/// Tail estimates of the asymptote x1 t + x2 from a horizon trajectory.
///
/// x1 is read from the corrected sequence v(t) + u(t)/t, which closes the
/// representation x1 = v(t) + integral_t^inf u/s^2 ds under a settling u
/// and converges much faster than raw v (whose bias is O(1/t)). x2 comes
/// from the limit route -u_inf; the independent intercept route reads the
/// tail of t (v(t) - x1), and the residual between the two routes is the
/// numerical form of "u tends to -x2".
struct AsymptoteEstimate {
    double x1 = 0.0;
    double x1_spread = 0.0;
    double u_limit = 0.0;
    double u_spread = 0.0;
    double x2 = 0.0; // -u_limit
    double x2_alt = 0.0;
    double x2_alt_spread = 0.0;
    double consistency_residual = 0.0; // |x2_alt + u_limit|
    std::size_t window_used = 0;
    double window_t_lo = 0.0;
    double window_t_hi = 0.0;
};

/// Requires a horizon trajectory (throws std::invalid_argument on blowup
/// or other early termination). `window` counts trailing stored samples;
/// clamped to [3, sample count].
AsymptoteEstimate estimate(const Trajectory& traj, std::size_t window = 16);

enum class ClassificationKind {
    Blowup,
    Sublinear,
    AsymptoticallyLinear,
    Unbounded,
    Undetermined,
};

const char* to_string(ClassificationKind k);

struct ClassifyConfig {
    double slope_floor = 1e-7;   // |x1| boundary between o(t) and a real slope
    double limit_tol_rel = 1e-6; // u-limit accepted when spread <= rel * (1 + |u_inf|)
    double growth_factor = 10.0; // max|u| half-to-half growth declaring Unbounded
};

struct Classification {
    ClassificationKind kind = ClassificationKind::Undetermined;
    std::optional<double> x1;
    std::optional<double> x2;
    std::optional<double> t_singularity;
    std::optional<double> t_singularity_uncertainty;
    double u_spread = 0.0;
    double limit_tol = 0.0;
    double growth_ratio = 0.0;
    double horizon = 0.0;
    std::string note;
};

/// Decision cascade: blowup termination; then unbounded u growth between
/// the log-t halves of the run; then the u-limit dichotomy (slope above or
/// below slope_floor); Undetermined otherwise. Never AsymptoticallyLinear
/// without a converged estimate.
Classification classify(const Trajectory& traj,
                        const std::optional<AsymptoteEstimate>& est,
                        const ClassifyConfig& cfg = {});

} // namespace oblique

#endif
