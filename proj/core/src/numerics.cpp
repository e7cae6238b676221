#include "oblique/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace oblique {

double ipow(double x, long long k) {
    if (k < 0) return 1.0 / ipow(x, -k);
    double acc = 1.0, base = x;
    while (k > 0) {
        if (k & 1) acc *= base;
        base *= base;
        k >>= 1;
    }
    return acc;
}

namespace {

// Gauss(7)/Kronrod(15) abscissae and weights on [-1, 1] (QUADPACK qk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Panel {
    double lo, hi;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// One GK15 evaluation on [lo, hi]; error scaled QUADPACK-style so that
// near-exact panels are not flagged just by Gauss/Kronrod disagreement noise.
Panel gk15(const ScalarFn& h, double lo, double hi, long& evals) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);

    double fv1[7], fv2[7];
    const double fc = h(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = h(center - dx);
        fv2[j] = h(center + dx);
        const double sum = fv1[j] + fv2[j];
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    }
    evals += 15;

    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    double err = std::abs((resk - resg) * half);
    resasc *= std::abs(half);
    resabs *= std::abs(half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double tiny = std::numeric_limits<double>::min();
    if (resabs > tiny / (50.0 * eps))
        err = std::max(eps * 50.0 * resabs, err);

    return Panel{lo, hi, resk * half, err};
}

} // namespace

QuadResult integrate_finite(const ScalarFn& h, double lo, double hi,
                            double rel_tol, double abs_tol, int max_panels) {
    if (lo > hi) throw std::invalid_argument("integrate_finite: lo > hi");
    QuadResult out;
    if (lo == hi) {
        out.converged = true;
        return out;
    }

    long evals = 0;
    std::priority_queue<Panel> panels;
    Panel first = gk15(h, lo, hi, evals);
    double total = first.value;
    double total_err = first.error;
    panels.push(first);

    int n_panels = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           n_panels < max_panels) {
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) {
            // interval exhausted at machine resolution; put it back and stop
            panels.push(worst);
            break;
        }
        Panel left = gk15(h, worst.lo, mid, evals);
        Panel right = gk15(h, mid, worst.hi, evals);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++n_panels;
    }

    out.value = total;
    out.abs_error_estimate = total_err;
    out.evaluations = evals;
    out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

TailVerdict integrate_tail(const ScalarFn& h, double lo,
                           double rel_tol, double abs_tol, const TailConfig& cfg) {
    if (lo < 1.0) throw std::invalid_argument("integrate_tail: lo must be >= 1");

    TailVerdict out;
    double acc = 0.0;
    double quad_err = 0.0;
    std::vector<double> increments;
    double prev_horizon = lo;

    int settled = 0;
    for (int k = 1; k <= cfg.k_max; ++k) {
        const double horizon = lo * std::ldexp(1.0, k);
        QuadResult q = integrate_finite(h, prev_horizon, horizon, rel_tol, abs_tol);
        acc += q.value;
        quad_err += q.abs_error_estimate;
        increments.push_back(q.value);
        out.evidence.emplace_back(horizon, acc);
        prev_horizon = horizon;

        if (std::abs(acc) > cfg.divergence_cap) {
            out.kind = TailVerdict::Kind::Divergent;
            out.value = acc;
            return out;
        }

        if (std::abs(q.value) <= std::max(abs_tol, rel_tol * std::abs(acc)))
            ++settled;
        else
            settled = 0;

        if (settled >= cfg.settle_window) {
            out.kind = TailVerdict::Kind::Convergent;
            out.value = acc;
            // truncation proxy: geometric continuation of the last increment
            double trunc = std::abs(increments.back());
            if (increments.size() >= 2 && increments[increments.size() - 2] != 0.0) {
                double r = std::abs(increments.back() / increments[increments.size() - 2]);
                r = std::min(r, 0.9);
                trunc = std::abs(increments.back()) * r / (1.0 - r);
            }
            out.error_estimate = quad_err + trunc;
            return out;
        }
    }

    // schedule exhausted: divergent only if the trailing doublings never decayed
    int stalled = 0;
    for (std::size_t i = increments.size(); i-- > 1;) {
        const double prev = std::abs(increments[i - 1]);
        const double cur = std::abs(increments[i]);
        if (prev == 0.0 || cur * cfg.decay_factor >= prev)
            ++stalled;
        else
            break;
    }
    out.value = acc;
    out.kind = (stalled >= cfg.stall_window) ? TailVerdict::Kind::Divergent
                                             : TailVerdict::Kind::Inconclusive;
    return out;
}

TailLimit tail_limit(const std::vector<std::pair<double, double>>& samples,
                     std::size_t window) {
    if (window == 0) throw std::invalid_argument("tail_limit: window must be positive");
    if (samples.size() < window)
        throw std::invalid_argument("tail_limit: fewer samples than window");
    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (std::size_t i = samples.size() - window; i < samples.size(); ++i) {
        const double y = samples[i].second;
        sum += y;
        mn = std::min(mn, y);
        mx = std::max(mx, y);
    }
    return TailLimit{sum / static_cast<double>(window), mx - mn};
}

double central_diff(const ScalarFn& h, double at, double scale) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double d = std::cbrt(eps) * std::max(scale, std::abs(at));
    return (h(at + d) - h(at - d)) / (2.0 * d);
}

} // namespace oblique
