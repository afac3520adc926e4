#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace netpot {

enum class ScalingRole { volume, walk };

// Power-law scaling c * r^beta. Serves as both the volume scaling Phi
// (exponent = Hausdorff dimension) and the walk scaling Psi (exponent =
// p-walk dimension). In power-law mode the lower and upper scaling
// exponents coincide with `exponent`.
struct PowerScaling {
    double exponent = 1.0;
    double coeff = 1.0;
    ScalingRole role = ScalingRole::walk;

    double operator()(double r) const {
        if (r < 0.0) throw std::domain_error("PowerScaling: negative radius");
        if (r == 0.0) return 0.0;
        return coeff * std::pow(r, exponent);
    }
    double doubling_constant() const { return std::pow(2.0, exponent); }
};

inline double eval_scaling(const PowerScaling& s, double r) { return s(r); }

// Volume-growth regime flags for a (d_h, beta_p, p) triple.
struct RegimeReport {
    double d_h = 0.0;
    double beta_p = 0.0;
    double p = 0.0;
    double tau = 0.0;   // d_h - beta_p
    bool fvr = false;   // fast volume regular: d_h >= beta_p
    bool rsvr = false;  // relatively slow: beta_p > d_h - 1
    bool svr = false;   // slow: beta_p > d_h
    bool window_ok = false;  // p <= beta_p <= d_h + (p - 1)
};

inline RegimeReport regime(double d_h, double beta_p, double p) {
    if (!(d_h > 0.0) || !(beta_p > 0.0) || !(p > 1.0))
        throw std::domain_error("regime: need d_h > 0, beta_p > 0, p > 1");
    RegimeReport r;
    r.d_h = d_h;
    r.beta_p = beta_p;
    r.p = p;
    r.tau = d_h - beta_p;
    r.fvr = d_h >= beta_p;
    r.rsvr = beta_p > d_h - 1.0;
    r.svr = beta_p > d_h;
    r.window_ok = p <= beta_p && beta_p <= d_h + (p - 1.0);
    return r;
}

// Trajectory of A_{j+1} = c0 * b^j * A_j^{1+beta}, together with the
// checked conclusion A_j <= b^{-j/beta} A_0 whenever A_0 is at or below
// the threshold c0^{-1/beta} b^{-1/beta^2}.
struct IterationTrace {
    std::vector<double> values;  // A_0 .. A_jmax (possibly truncated on overflow)
    double threshold = 0.0;
    bool below_threshold = false;
    bool satisfied = false;  // below_threshold and every A_j <= b^{-j/beta} A_0 (checked)
    bool overflowed = false;
};

inline IterationTrace iterate_bound(double A0, double c0, double b, double beta,
                                    int jmax) {
    if (!(A0 > 0.0) || !(c0 > 0.0) || !(b > 1.0) || !(beta > 0.0) || jmax < 0)
        throw std::domain_error("iterate_bound: need A0, c0, beta > 0, b > 1, jmax >= 0");
    IterationTrace t;
    t.threshold = std::pow(c0, -1.0 / beta) * std::pow(b, -1.0 / (beta * beta));
    t.below_threshold = A0 <= t.threshold * (1.0 + 1e-15);

    // The threshold is an unstable fixed point: relative errors grow like
    // (1+beta)^j. Track the trajectory in long double and widen the check
    // tolerance by the matching forward-error bound.
    const long double eps = std::numeric_limits<long double>::epsilon();
    long double a = A0;
    long double bj = 1.0L;  // b^j
    t.values.push_back(static_cast<double>(a));
    bool ok = t.below_threshold;
    long double amp = 0.0L;  // ((1+beta)^j - 1)/beta
    for (int j = 1; j <= jmax; ++j) {
        a = static_cast<long double>(c0) * bj * std::pow(a, 1.0L + static_cast<long double>(beta));
        bj *= static_cast<long double>(b);
        if (!std::isfinite(static_cast<double>(a)) || a > 1e300L) {
            t.overflowed = true;
            t.satisfied = false;
            return t;
        }
        t.values.push_back(static_cast<double>(a));
        amp = (amp * (1.0L + static_cast<long double>(beta))) + 1.0L;
        const long double bound =
            std::pow(static_cast<long double>(b), -static_cast<long double>(j) / beta) *
            static_cast<long double>(A0);
        // A0 given as a double may sit a few ulp above the true threshold;
        // that offset amplifies like (1+beta)^j and is part of the
        // comparison's forward error, not a failure of the lemma.
        const long double start_amp =
            std::pow(1.0L + static_cast<long double>(beta), static_cast<long double>(j));
        const long double slack = std::max(
            {1e-12L, 16.0L * eps * amp,
             4.0L * static_cast<long double>(std::numeric_limits<double>::epsilon()) * start_amp});
        if (a > bound * (1.0L + slack)) ok = false;
    }
    t.satisfied = ok;
    return t;
}

// Ordinary least squares on (log r, log y).
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
    std::vector<std::pair<double, double>> points;  // (log r, log y)
};

inline LogLogFit loglog_fit(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("loglog_fit: need >= 2 points");
    LogLogFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (auto [r, y] : pairs) {
        if (!(r > 0.0) || !(y > 0.0))
            throw std::invalid_argument("loglog_fit: nonpositive value");
        double lx = std::log(r), ly = std::log(y);
        fit.points.emplace_back(lx, ly);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; n += 1;
    }
    double det = n * sxx - sx * sx;
    if (det <= 0.0) throw std::invalid_argument("loglog_fit: need >= 2 distinct r");
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ym = sy / n;
    for (auto [lx, ly] : fit.points) {
        double e = ly - (fit.slope * lx + fit.intercept);
        ss_res += e * e;
        ss_tot += (ly - ym) * (ly - ym);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace netpot
