#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "penergy.hpp"
#include "scaling.hpp"

namespace netpot {

// Condenser (A0, A1, A2): potential 1 on A0 (the compact "K"), grounded
// A1, ambient A2 (empty = whole graph). One plate orientation everywhere.
struct CondenserSpec {
    VertexSet A0, A1;
    VertexSet A2;  // empty = all
};

struct CapacityResult {
    double value = 0.0;
    VertexFn potential;  // 1 on A0, 0 on A1, 0 outside A2
    double kkt_residual = 0.0;
    bool plates_linked = false;  // false iff no A2-path joins the plates
};

namespace detail {
inline VertexSet full_set(int n) {
    VertexSet s(std::size_t(n));
    for (int i = 0; i < n; ++i) s[std::size_t(i)] = i;
    return s;
}
}  // namespace detail

// Minimal p-energy over A2-edges among functions 1 on A0, 0 on A1.
inline CapacityResult capacity(const NetGraph& g, const CondenserSpec& spec, double p,
                               const SolverOptions& opts = {}) {
    if (spec.A0.empty() || spec.A1.empty())
        throw std::invalid_argument("capacity: empty plate");
    const int n = g.n();
    auto in0 = mask_of(n, spec.A0);
    auto in1 = mask_of(n, spec.A1);
    for (int v : spec.A0)
        if (in1[std::size_t(v)]) throw std::invalid_argument("capacity: plates intersect");
    VertexSet A2 = spec.A2.empty() ? detail::full_set(n) : spec.A2;
    auto in2 = mask_of(n, A2);
    for (int v : spec.A0)
        if (!in2[std::size_t(v)]) throw std::invalid_argument("capacity: A0 not inside A2");
    for (int v : spec.A1)
        if (!in2[std::size_t(v)]) throw std::invalid_argument("capacity: A1 not inside A2");

    VertexSet U;
    for (int v : A2)
        if (!in0[std::size_t(v)] && !in1[std::size_t(v)]) U.push_back(v);

    CapacityResult res;
    res.potential.assign(std::size_t(n), 0.0);
    for (int v : spec.A0) res.potential[std::size_t(v)] = 1.0;

    bool ring_nonempty = false;
    for (const auto& e : g.edges) {
        if (!in2[std::size_t(e.a)] || !in2[std::size_t(e.b)]) continue;
        const bool ua = !in0[std::size_t(e.a)] && !in1[std::size_t(e.a)];
        const bool ub = !in0[std::size_t(e.b)] && !in1[std::size_t(e.b)];
        if (ua != ub) { ring_nonempty = true; break; }
    }
    if (!U.empty() && ring_nonempty) {
        VertexFn bdry(std::size_t(n), 0.0);
        for (int v : spec.A0) bdry[std::size_t(v)] = 1.0;
        DirichletSolver solver(g, U, p, 0.0, A2);
        auto sol = solver.solve(bdry, {}, opts);
        res.potential = sol.u;
        for (int v : spec.A0) res.potential[std::size_t(v)] = 1.0;  // A0 beyond the ring
        res.kkt_residual = sol.kkt_residual;
    }
    res.value = energy(g, res.potential, p, A2);
    res.plates_linked = res.value > 0.0;
    return res;
}

struct EquilibriumReport {
    double interior_max_abs = 0.0;  // max |mu[e]| off the plates
    bool support_on_plates = false;
    double pairing_value = 0.0;  // mu[e](A0)
    double pairing_relerr = 0.0;
    int competitors_checked = 0;
    bool competitors_ok = true;  // sup-characterization: mu[u](A0) <= cap
    double competitor_worst_excess = 0.0;
    int supersolutions_checked = 0;
    bool supersolutions_ok = true;  // inf-characterization: mu[v](A2 \ A1) >= cap
    double supersolution_worst_deficit = 0.0;
};

// Discrete forms of the equilibrium-potential identities: the Riesz
// measure of e lives on the plates, pairs to the capacity on A0, and the
// sup/inf variational characterizations hold against random competitors.
inline EquilibriumReport check_equilibrium_identities(const NetGraph& g,
                                                      const CapacityResult& result,
                                                      const CondenserSpec& spec, double p,
                                                      std::uint64_t seed = 1,
                                                      int n_random = 10,
                                                      double support_tol = 1e-8,
                                                      const SolverOptions& opts = {}) {
    const int n = g.n();
    VertexSet A2 = spec.A2.empty() ? detail::full_set(n) : spec.A2;
    auto in0 = mask_of(n, spec.A0);
    auto in1 = mask_of(n, spec.A1);
    auto in2 = mask_of(n, A2);

    // p-laplacian restricted to the induced A2 subgraph
    VertexFn lap(std::size_t(n), 0.0);
    for (const auto& e : g.edges) {
        if (!in2[std::size_t(e.a)] || !in2[std::size_t(e.b)]) continue;
        const double d = result.potential[std::size_t(e.b)] - result.potential[std::size_t(e.a)];
        const double flux = signed_pow(d, p - 1.0);
        lap[std::size_t(e.a)] += flux;
        lap[std::size_t(e.b)] -= flux;
    }
    for (auto& v : lap) v *= g.conductance_factor;

    EquilibriumReport rep;
    for (int v : A2) {
        if (in0[std::size_t(v)] || in1[std::size_t(v)]) continue;
        rep.interior_max_abs = std::max(rep.interior_max_abs, std::abs(lap[std::size_t(v)]));
    }
    rep.support_on_plates = rep.interior_max_abs <= support_tol;
    for (int v : spec.A0) rep.pairing_value += -lap[std::size_t(v)];
    const double denom = std::max(std::abs(result.value), 1e-300);
    rep.pairing_relerr = std::abs(rep.pairing_value - result.value) / denom;

    if (n_random <= 0 || !result.plates_linked) return rep;

    // U' = A2 \ A1 hosts both characterizations
    VertexSet Uprime;
    for (int v : A2)
        if (!in1[std::size_t(v)]) Uprime.push_back(v);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);

    auto riesz_on = [&](const VertexFn& u) {
        VertexFn out(std::size_t(n), 0.0);
        for (const auto& e : g.edges) {
            if (!in2[std::size_t(e.a)] || !in2[std::size_t(e.b)]) continue;
            const double d = u[std::size_t(e.b)] - u[std::size_t(e.a)];
            const double flux = signed_pow(d, p - 1.0);
            out[std::size_t(e.a)] -= flux;
            out[std::size_t(e.b)] += flux;
        }
        for (auto& v : out) v *= g.conductance_factor;
        return out;  // -Delta_p u
    };

    DirichletSolver solver(g, Uprime, p, 0.0, A2);
    for (int t = 0; t < n_random; ++t) {
        // (iii) admissible competitor: superharmonic in U', Riesz mass on A0, u <= 1
        VertexFn f(std::size_t(n), 0.0);
        for (int v : spec.A0) f[std::size_t(v)] = unif(rng) / g.vertex_mass;
        auto sol = solver.solve({}, f, opts);
        double mx = 0.0;
        for (int v : Uprime) mx = std::max(mx, sol.u[std::size_t(v)]);
        if (mx > 0.0) {
            VertexFn unorm(std::size_t(n), 0.0);
            for (int v : Uprime) unorm[std::size_t(v)] = sol.u[std::size_t(v)] / mx;
            auto mu = riesz_on(unorm);
            double mass0 = 0.0;
            for (int v : spec.A0) mass0 += mu[std::size_t(v)];
            ++rep.competitors_checked;
            const double excess = (mass0 - result.value) / denom;
            rep.competitor_worst_excess = std::max(rep.competitor_worst_excess, excess);
            if (excess > 1e-6) rep.competitors_ok = false;
        }

        // (iv) supersolution: >= 1 on A0 after scaling, Riesz mass anywhere in U'
        VertexFn f2(std::size_t(n), 0.0);
        for (int v : spec.A0) f2[std::size_t(v)] = unif(rng) / g.vertex_mass;
        std::uniform_int_distribution<std::size_t> pick(0, Uprime.size() - 1);
        for (int k = 0; k < 3; ++k)
            f2[std::size_t(Uprime[pick(rng)])] += unif(rng) / g.vertex_mass;
        auto sol2 = solver.solve({}, f2, opts);
        double mn = kInf;
        for (int v : spec.A0) mn = std::min(mn, sol2.u[std::size_t(v)]);
        if (mn > 0.0) {
            double sigma_total = 0.0;
            for (int v : Uprime) sigma_total += f2[std::size_t(v)] * g.vertex_mass;
            const double mass = sigma_total / std::pow(mn, p - 1.0);
            ++rep.supersolutions_checked;
            const double deficit = (result.value - mass) / denom;
            rep.supersolution_worst_deficit = std::max(rep.supersolution_worst_deficit, deficit);
            if (deficit > 1e-6) rep.supersolutions_ok = false;
        }
    }
    return rep;
}

struct SweepRow {
    double r = 0.0;
    double cap = 0.0;
    double mu_ball = 0.0;     // m^(eps)(B(x,r))
    double wolff_term = 0.0;  // (mu_ball/cap)^{1/(p-1)}
    bool skipped = false;
    std::string note;
};

struct ScalingSweep {
    std::vector<SweepRow> rows;
    double slope = 0.0;     // of log cap vs log r
    double beta_hat = 0.0;  // d_h - slope
    double r_squared = 0.0;
};

// cap(B(x,r), complement of B(x, A r)) across radii; under V(d_h) the
// capacity scales like r^{d_h - beta_p}, so beta_hat = d_h - slope.
inline ScalingSweep capacity_scaling_sweep(const NetGraph& g, int center,
                                           const std::vector<double>& radii, double A,
                                           double p, const SolverOptions& opts = {}) {
    if (!(A > 1.0)) throw std::invalid_argument("capacity_scaling_sweep: A <= 1");
    ScalingSweep sweep;
    // ball containment limit: distance from the center to the bounding box
    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (const auto& c : g.coords) {
        xmin = std::min(xmin, c[0]); xmax = std::max(xmax, c[0]);
        ymin = std::min(ymin, c[1]); ymax = std::max(ymax, c[1]);
    }
    const auto& cc = g.coords[std::size_t(center)];
    double limit = std::min({cc[0] - xmin, xmax - cc[0], ymax - cc[1], cc[1] - ymin});
    if (ymax == ymin) limit = std::min(cc[0] - xmin, xmax - cc[0]);  // interval cloud

    auto dist = graph_metric(g, center);
    std::vector<std::pair<double, double>> pts;
    for (double r : radii) {
        SweepRow row;
        row.r = r;
        if (A * r > limit) {
            row.skipped = true;
            row.note = "outer ball escapes the cloud";
            sweep.rows.push_back(row);
            continue;
        }
        VertexSet inner, outer_comp;
        for (int v = 0; v < g.n(); ++v) {
            if (dist[std::size_t(v)] < r) inner.push_back(v);
            if (dist[std::size_t(v)] >= A * r) outer_comp.push_back(v);
        }
        if (inner.empty() || outer_comp.empty()) {
            row.skipped = true;
            row.note = "degenerate plates";
            sweep.rows.push_back(row);
            continue;
        }
        auto cap = capacity(g, {inner, outer_comp, {}}, p, opts);
        row.cap = cap.value;
        row.mu_ball = g.mass(inner);
        row.wolff_term = cap.value > 0.0 ? std::pow(row.mu_ball / cap.value, 1.0 / (p - 1.0)) : kInf;
        sweep.rows.push_back(row);
        if (cap.value > 0.0) pts.emplace_back(r, cap.value);
    }
    if (pts.size() >= 2) {
        auto fit = loglog_fit(pts);
        sweep.slope = fit.slope;
        sweep.r_squared = fit.r_squared;
        sweep.beta_hat = g.phi.exponent - fit.slope;
    }
    return sweep;
}

struct WolffTerm {
    int n = 0;
    double mu_ball = 0.0;
    double cap_annulus = 0.0;
    double value = 0.0;  // (mu/cap)^{1/(p-1)}
};

struct WolffResult {
    int center = 0;
    double radius = 0.0;
    std::vector<WolffTerm> terms;
    double total = 0.0;
    int n_max = 0;
    bool infinite = false;  // some term had positive mass against zero capacity
};

// Dyadic Wolff potential W^mu(x,R), truncated at the net scale:
// n_max = floor(log2(R/eps)).
inline WolffResult wolff_potential(const NetGraph& g, const VertexMeasure& mu, int x,
                                   double R, double p, const SolverOptions& opts = {}) {
    if (!(R > g.epsilon)) throw std::invalid_argument("wolff_potential: R <= epsilon");
    WolffResult res;
    res.center = x;
    res.radius = R;
    res.n_max = int(std::floor(std::log2(R / g.epsilon)));
    auto dist = graph_metric(g, x);
    for (int n = 0; n <= res.n_max; ++n) {
        const double r_out = R / std::pow(2.0, n);
        const double r_in = r_out / 2.0;
        WolffTerm term;
        term.n = n;
        VertexSet inner, outer_comp;
        for (int v = 0; v < g.n(); ++v) {
            if (dist[std::size_t(v)] < r_out) {
                term.mu_ball += mu[std::size_t(v)];
                if (dist[std::size_t(v)] < r_in) inner.push_back(v);
            } else {
                outer_comp.push_back(v);
            }
        }
        if (!inner.empty() && !outer_comp.empty())
            term.cap_annulus = capacity(g, {inner, outer_comp, {}}, p, opts).value;
        if (term.cap_annulus > 0.0) {
            term.value = std::pow(term.mu_ball / term.cap_annulus, 1.0 / (p - 1.0));
        } else if (term.mu_ball > 0.0) {
            term.value = kInf;
            res.infinite = true;
        }
        res.total += term.value;
        res.terms.push_back(term);
    }
    return res;
}

struct WolffBoundsReport {
    double u_x0 = 0.0;
    double wolff_R = 0.0;
    double wolff_2R = 0.0;
    double min_ball_u = 0.0;
    double lower_ratio = 0.0;  // u(x0) / W(x0,R)
    double upper_ratio = 0.0;  // u(x0) / (min_{B(x0,R)} u + W(x0,2R))
    bool degenerate = false;
    bool hypothesis_violated = false;  // B(x0,4R) not inside U
};

// Solves -Delta_p u = f m in U (zero ring data), takes mu = f m, and
// reports the two Wolff ratios of the pointwise estimate.
inline WolffBoundsReport verify_wolff_bounds(const NetGraph& g, const VertexSet& U, int x0,
                                             double R, const VertexFn& f, double p,
                                             const SolverOptions& opts = {}) {
    WolffBoundsReport rep;
    auto inU = mask_of(g.n(), U);
    auto dist = graph_metric(g, x0);
    for (int v = 0; v < g.n(); ++v)
        if (dist[std::size_t(v)] < 4.0 * R && !inU[std::size_t(v)]) {
            rep.hypothesis_violated = true;
            break;
        }
    auto sol = solve_poisson(g, U, f, 0.0, p, opts);
    rep.u_x0 = sol.u[std::size_t(x0)];
    VertexMeasure mu(std::size_t(g.n()), 0.0);
    for (int v : U) mu[std::size_t(v)] = f[std::size_t(v)] * g.vertex_mass;
    rep.wolff_R = wolff_potential(g, mu, x0, R, p, opts).total;
    rep.wolff_2R = wolff_potential(g, mu, x0, 2.0 * R, p, opts).total;
    rep.min_ball_u = kInf;
    for (int v = 0; v < g.n(); ++v)
        if (dist[std::size_t(v)] < R) rep.min_ball_u = std::min(rep.min_ball_u, sol.u[std::size_t(v)]);
    if (rep.wolff_R <= 0.0 || rep.min_ball_u + rep.wolff_2R <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.lower_ratio = rep.u_x0 / rep.wolff_R;
    rep.upper_ratio = rep.u_x0 / (rep.min_ball_u + rep.wolff_2R);
    return rep;
}

struct CutoffResult {
    VertexFn phi;  // 1 on the inner ball, 0 outside the outer ball
    int center = 0;
    double r_inner = 0.0;
    double r_outer = 0.0;
    double c3 = 0.0;  // measured mid-annulus min of u / psi_hat^{1/(p-1)}
    double energy_phi = 0.0;
    double psi_hat_gap = 0.0;
};

// Cutoff function for B(x0,R_in) inside B(x0,R_out) via the lambda-perturbed
// annulus problem: solve -Delta_p u + (1/psi_hat) |u|^{p-2} u = 1 on the
// open annulus, rescale by the measured mid-annulus minimum, clamp at 1
// inside the mid radius and paste.
inline CutoffResult build_cutoff(const NetGraph& g, int x0, double r_in, double r_out,
                                 double psi_hat_gap, double p,
                                 const SolverOptions& opts = {}) {
    if (!(r_out > r_in) || !(r_in > 0.0))
        throw std::invalid_argument("build_cutoff: need 0 < r_in < r_out");
    if (!(psi_hat_gap > 0.0)) throw std::invalid_argument("build_cutoff: psi_hat <= 0");
    const double gap = r_out - r_in;
    auto dist = graph_metric(g, x0);
    VertexSet omega;
    for (int v = 0; v < g.n(); ++v)
        if (dist[std::size_t(v)] > r_in && dist[std::size_t(v)] < r_out) omega.push_back(v);
    if (omega.empty()) throw std::runtime_error("build_cutoff: empty annulus");
    const double mid_lo = r_in + gap / 4.0, mid_hi = r_in + gap / 2.0;
    bool mid_nonempty = false;
    for (int v : omega)
        if (dist[std::size_t(v)] > mid_lo && dist[std::size_t(v)] < mid_hi) mid_nonempty = true;
    if (!mid_nonempty) throw std::runtime_error("build_cutoff: empty mid-annulus");

    VertexFn f(std::size_t(g.n()), 0.0);
    for (int v : omega) f[std::size_t(v)] = 1.0;
    auto sol = solve_poisson(g, omega, f, 1.0 / psi_hat_gap, p, opts);

    double mid_min = kInf;
    for (int v : omega)
        if (dist[std::size_t(v)] > mid_lo && dist[std::size_t(v)] < mid_hi)
            mid_min = std::min(mid_min, sol.u[std::size_t(v)]);
    if (!(mid_min > 0.0)) throw std::runtime_error("build_cutoff: vanishing mid-annulus minimum");

    CutoffResult res;
    res.center = x0;
    res.r_inner = r_in;
    res.r_outer = r_out;
    res.psi_hat_gap = psi_hat_gap;
    res.c3 = mid_min / std::pow(psi_hat_gap, 1.0 / (p - 1.0));
    res.phi.assign(std::size_t(g.n()), 0.0);
    for (int v = 0; v < g.n(); ++v) {
        if (dist[std::size_t(v)] < mid_hi)
            res.phi[std::size_t(v)] = 1.0;
        else
            res.phi[std::size_t(v)] = std::min(1.0, sol.u[std::size_t(v)] / mid_min);
    }
    res.energy_phi = energy(g, res.phi, p);
    return res;
}

struct CsFit {
    double c1 = 0.0, c2 = 0.0;
    std::vector<double> slack;  // per probe: c1*a_i + c2*b_i - lhs_i
    int probes_used = 0;
};

// Fits the cutoff Sobolev inequality
//   sum |f|^p dGamma(phi) <= c1 * E_{2B}(f) + (c2/psi_hat) * sum_{2B} m |f|^p
// over the probe family; dGamma(phi) charges half of each edge's energy to
// each endpoint. Returns the smallest symmetric point c1 = c2 on the
// feasible frontier.
inline CsFit check_cutoff_sobolev(const NetGraph& g, const CutoffResult& cutoff,
                                  const std::vector<VertexFn>& probes, double psi_hat_R,
                                  double p) {
    auto gphi = gamma_vertex(g, cutoff.phi, p);
    auto dist = graph_metric(g, cutoff.center);
    VertexSet twoB;
    for (int v = 0; v < g.n(); ++v)
        if (dist[std::size_t(v)] < cutoff.r_outer) twoB.push_back(v);
    CsFit fit;
    std::vector<std::pair<double, double>> rows;  // (lhs, a + b)
    for (const auto& f : probes) {
        double lhs = 0.0;
        for (int v = 0; v < g.n(); ++v)
            lhs += std::pow(std::abs(f[std::size_t(v)]), p) * gphi[std::size_t(v)];
        const double a = energy(g, f, p, twoB);
        double mass = 0.0;
        for (int v : twoB) mass += g.vertex_mass * std::pow(std::abs(f[std::size_t(v)]), p);
        const double b = mass / psi_hat_R;
        if (a + b <= 0.0) continue;
        rows.emplace_back(lhs, a + b);
        ++fit.probes_used;
    }
    double c = 0.0;
    for (auto& [lhs, ab] : rows) c = std::max(c, lhs / ab);
    fit.c1 = fit.c2 = c;
    for (auto& [lhs, ab] : rows) fit.slack.push_back(c * ab - lhs);
    return fit;
}

}  // namespace netpot
