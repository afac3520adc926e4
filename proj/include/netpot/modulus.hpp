#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "capacity.hpp"
#include "netgraph.hpp"

namespace netpot {

// rho-shortest A0 -> A1 path inside A2, with vertex-summed length
// L_rho(theta) = sum of rho over the path's vertices (endpoints included).
inline std::optional<std::vector<int>> rho_shortest_path(const NetGraph& g,
                                                         const VertexFn& rho,
                                                         const VertexSet& A0,
                                                         const VertexSet& A1,
                                                         const VertexSet& A2 = {}) {
    for (double v : rho)
        if (v < 0.0) throw std::invalid_argument("rho_shortest_path: negative density");
    const int n = g.n();
    std::vector<char> in2 = A2.empty() ? std::vector<char>(std::size_t(n), 1) : mask_of(n, A2);
    auto in1 = mask_of(n, A1);
    std::vector<double> dist(std::size_t(n), kInf);
    std::vector<int> parent(std::size_t(n), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int s : A0) {
        if (!in2[std::size_t(s)]) continue;
        const double d0 = rho[std::size_t(s)];
        if (d0 < dist[std::size_t(s)]) {
            dist[std::size_t(s)] = d0;
            parent[std::size_t(s)] = -2;
            pq.emplace(d0, s);
        }
    }
    int goal = -1;
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[std::size_t(v)]) continue;
        if (in1[std::size_t(v)]) { goal = v; break; }
        for (auto [w, len] : g.adj[std::size_t(v)]) {
            if (!in2[std::size_t(w)]) continue;
            const double nd = d + rho[std::size_t(w)];
            if (nd < dist[std::size_t(w)]) {
                dist[std::size_t(w)] = nd;
                parent[std::size_t(w)] = v;
                pq.emplace(nd, w);
            }
        }
    }
    if (goal < 0) return std::nullopt;
    std::vector<int> path;
    for (int v = goal; v != -2; v = parent[std::size_t(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

struct ModulusOptions {
    double outer_tol = 1e-6;   // admissibility slack triggering new paths
    double inner_tol = 1e-8;   // dual coordinate-ascent increment tolerance
    int max_paths = 20000;
    int max_inner_sweeps = 2000;
    double unit = 1.0;  // the constraint level L_rho(theta) >= unit
};

struct ModulusResult {
    double value = 0.0;  // certified upper bound (energy of the scaled-admissible rho)
    VertexFn rho;        // the extremal density (scaled admissible)
    std::vector<std::vector<int>> active_paths;
    double admissibility_slack = 0.0;  // min over active paths of L_rho - unit
    double lower_bound = 0.0;          // dual value (valid for the full family)
    double duality_gap_estimate = 0.0;
    bool converged = false;
};

namespace detail {

// Exact coordinate ascent on the Lagrangian dual of
//   min sum rho^p  s.t.  sum_{z in theta} rho_z >= unit for active theta.
// KKT closure: rho_z = (sum_{theta ni z} lambda_theta / p)^{1/(p-1)}.
class ModulusDual {
  public:
    ModulusDual(int n, double p, double unit) : n_(n), p_(p), unit_(unit), load_(std::size_t(n), 0.0) {}

    void add_path(const std::vector<int>& path) {
        paths_.push_back(path);
        lambda_.push_back(0.0);
    }

    double rho_of(double load) const { return std::pow(load / p_, 1.0 / (p_ - 1.0)); }

    double length(const std::vector<int>& path) const {
        double L = 0.0;
        for (int z : path) L += rho_of(load_[std::size_t(z)]);
        return L;
    }

    // one coordinate-maximization sweep; returns the largest lambda move
    double sweep() {
        double moved = 0.0;
        for (std::size_t k = 0; k < paths_.size(); ++k) {
            const auto& path = paths_[k];
            // detach this path's multiplier, then re-solve L(lambda_k) = unit
            for (int z : path) load_[std::size_t(z)] -= lambda_[k];
            double base_len = 0.0;
            for (int z : path) base_len += rho_of(load_[std::size_t(z)]);
            double nl = 0.0;
            if (base_len < unit_) {
                // strictly increasing in lambda; bracket then bisect/newton
                double lo = 0.0, hi = std::max(1.0, 2.0 * lambda_[k]);
                auto len_at = [&](double lam) {
                    double L = 0.0;
                    for (int z : path) L += rho_of(load_[std::size_t(z)] + lam);
                    return L;
                };
                while (len_at(hi) < unit_) hi *= 2.0;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (len_at(mid) < unit_) lo = mid; else hi = mid;
                    if (hi - lo <= 1e-15 * (1.0 + hi)) break;
                }
                nl = 0.5 * (lo + hi);
            }
            for (int z : path) load_[std::size_t(z)] += nl;
            moved = std::max(moved, std::abs(nl - lambda_[k]) / (1.0 + nl));
            lambda_[k] = nl;
        }
        return moved;
    }

    VertexFn rho() const {
        VertexFn r(std::size_t(n_), 0.0);
        for (int z = 0; z < n_; ++z) r[std::size_t(z)] = rho_of(load_[std::size_t(z)]);
        return r;
    }

    // g(lambda) = unit * sum lambda - (p-1) sum rho^p
    double dual_value() const {
        double s = 0.0;
        for (double l : lambda_) s += l;
        double e = 0.0;
        for (int z = 0; z < n_; ++z) e += std::pow(rho_of(load_[std::size_t(z)]), p_);
        return unit_ * s - (p_ - 1.0) * e;
    }

    const std::vector<std::vector<int>>& paths() const { return paths_; }

  private:
    int n_;
    double p_;
    double unit_;
    std::vector<double> load_;  // sum_{theta ni z} lambda_theta
    std::vector<std::vector<int>> paths_;
    std::vector<double> lambda_;
};

inline std::uint64_t path_key(const std::vector<int>& p) {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : p) {
        h ^= std::uint64_t(v) + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

// Combinatorial p-modulus of Path(A0, A1; A2) by cutting plane: keep an
// active path set, solve the restricted program by dual coordinate ascent,
// and add the current rho-shortest path while it is shorter than the unit.
inline ModulusResult p_modulus(const NetGraph& g, const VertexSet& A0, const VertexSet& A1,
                               const VertexSet& A2, double p,
                               const ModulusOptions& opts = {}) {
    if (A0.empty() || A1.empty()) throw std::invalid_argument("p_modulus: empty plate");
    ModulusResult res;
    detail::ModulusDual dual(g.n(), p, opts.unit);
    std::unordered_set<std::uint64_t> seen;

    VertexFn rho(std::size_t(g.n()), 0.0);
    int stall = 0;
    while (int(dual.paths().size()) < opts.max_paths) {
        auto path = rho_shortest_path(g, rho, A0, A1, A2);
        if (!path) {
            // empty path family: Adm contains rho = 0, modulus 0
            if (dual.paths().empty()) {
                res.converged = true;
                res.rho = rho;
                return res;
            }
            break;
        }
        double L = 0.0;
        for (int z : *path) L += rho[std::size_t(z)];
        if (L >= opts.unit * (1.0 - opts.outer_tol)) break;
        const auto key = detail::path_key(*path);
        if (seen.count(key)) {
            // inner solve not tight enough yet; push further
            if (++stall > 50) break;
        } else {
            seen.insert(key);
            dual.add_path(*path);
            stall = 0;
        }
        for (int sweepi = 0; sweepi < opts.max_inner_sweeps; ++sweepi)
            if (dual.sweep() <= opts.inner_tol) break;
        rho = dual.rho();
    }

    res.active_paths = dual.paths();
    res.lower_bound = dual.dual_value();
    // certify: scale rho to exact admissibility over the active set and the
    // current shortest path
    double minL = kInf;
    for (const auto& path : res.active_paths) {
        double L = 0.0;
        for (int z : path) L += rho[std::size_t(z)];
        minL = std::min(minL, L);
    }
    if (auto sp = rho_shortest_path(g, rho, A0, A1, A2)) {
        double L = 0.0;
        for (int z : *sp) L += rho[std::size_t(z)];
        minL = std::min(minL, L);
    }
    if (res.active_paths.empty() || !(minL > 0.0)) {
        res.rho = rho;
        res.value = 0.0;
        res.converged = res.active_paths.empty();
        return res;
    }
    res.admissibility_slack = minL - opts.unit;
    const double scale = opts.unit / minL;
    res.rho = rho;
    for (auto& v : res.rho) v *= scale;
    res.value = 0.0;
    for (double v : res.rho) res.value += std::pow(v, p);
    res.duality_gap_estimate = res.value - res.lower_bound;
    res.converged = res.duality_gap_estimate <= 1e-4 * std::max(1e-300, res.value) ||
                    std::abs(res.admissibility_slack) <= opts.outer_tol * opts.unit;
    return res;
}

// Exhaustive oracle for small graphs: enumerate every simple A0 -> A1 path
// whose interior avoids the plates, then solve the full program by
// projected gradient ascent on the dual.
inline double brute_modulus(const NetGraph& g, const VertexSet& A0, const VertexSet& A1,
                            const VertexSet& A2, double p, double tol = 1e-8,
                            std::size_t max_paths = 100000) {
    const int n = g.n();
    std::vector<char> in2 = A2.empty() ? std::vector<char>(std::size_t(n), 1) : mask_of(n, A2);
    auto in0 = mask_of(n, A0);
    auto in1 = mask_of(n, A1);
    std::vector<std::vector<int>> paths;
    std::vector<int> cur;
    std::vector<char> used(std::size_t(n), 0);

    auto dfs = [&](auto&& self, int v) -> void {
        if (paths.size() > max_paths) throw std::runtime_error("brute_modulus: too many paths");
        cur.push_back(v);
        used[std::size_t(v)] = 1;
        if (in1[std::size_t(v)]) {
            paths.push_back(cur);
        } else {
            for (auto [w, len] : g.adj[std::size_t(v)]) {
                if (used[std::size_t(w)] || !in2[std::size_t(w)]) continue;
                if (in0[std::size_t(w)]) continue;  // interior avoids A0
                self(self, w);
            }
        }
        used[std::size_t(v)] = 0;
        cur.pop_back();
    };
    for (int s : A0)
        if (in2[std::size_t(s)] && !in1[std::size_t(s)]) dfs(dfs, s);
    for (int s : A0)
        if (in2[std::size_t(s)] && in1[std::size_t(s)]) paths.push_back({s});
    if (paths.empty()) return 0.0;

    // projected gradient ascent on the dual, with adaptive step
    std::vector<double> lambda(paths.size(), 1.0);
    std::vector<double> load(std::size_t(n), 0.0);
    auto recompute = [&]() {
        std::fill(load.begin(), load.end(), 0.0);
        for (std::size_t k = 0; k < paths.size(); ++k)
            for (int z : paths[k]) load[std::size_t(z)] += lambda[k];
    };
    auto rho_of = [&](double l) { return std::pow(l / p, 1.0 / (p - 1.0)); };
    auto dual_value = [&]() {
        double s = 0.0;
        for (double l : lambda) s += l;
        double e = 0.0;
        for (int z = 0; z < n; ++z) e += std::pow(rho_of(load[std::size_t(z)]), p);
        return s - (p - 1.0) * e;
    };
    recompute();
    double step = 0.5, gprev = dual_value();
    double best_upper = kInf;
    for (int it = 0; it < 200000; ++it) {
        std::vector<double> grad(paths.size());
        for (std::size_t k = 0; k < paths.size(); ++k) {
            double L = 0.0;
            for (int z : paths[k]) L += rho_of(load[std::size_t(z)]);
            grad[k] = 1.0 - L;
        }
        for (std::size_t k = 0; k < paths.size(); ++k)
            lambda[k] = std::max(0.0, lambda[k] + step * grad[k]);
        recompute();
        const double gnow = dual_value();
        if (gnow < gprev) step *= 0.7; else step = std::min(step * 1.05, 10.0);
        gprev = gnow;
        if (it % 20 == 19 || it > 199900) {
            double minL = kInf;
            for (auto& path : paths) {
                double L = 0.0;
                for (int z : path) L += rho_of(load[std::size_t(z)]);
                minL = std::min(minL, L);
            }
            if (minL > 0.0) {
                double up = 0.0;
                for (int z = 0; z < n; ++z)
                    up += std::pow(rho_of(load[std::size_t(z)]) / minL, p);
                best_upper = std::min(best_upper, up);
                if (best_upper - gnow <= tol * std::max(1.0, best_upper)) return best_upper;
            }
        }
    }
    return best_upper;
}

struct ModCapReport {
    double cap = 0.0;
    double mod = 0.0;
    double ratio = 0.0;  // (Psi(eps)/Phi(eps)) cap / mod
    bool degenerate = false;
    bool within_band = false;
    double band_C = 0.0;
};

inline ModulusResult p_modulus(const NetGraph& g, const CondenserSpec& spec, double p,
                               const ModulusOptions& opts = {}) {
    return p_modulus(g, spec.A0, spec.A1, spec.A2, p, opts);
}

// (Psi(eps)/Phi(eps)) cap / mod, tested against the configured band
// [1/C, C]; band_C = 0 picks the conservative degree-derived default
// (N+1)^p.
inline ModCapReport check_mod_cap_comparability(const NetGraph& g, const CondenserSpec& spec,
                                                double p, double band_C = 0.0,
                                                const SolverOptions& cap_opts = {},
                                                const ModulusOptions& mod_opts = {}) {
    ModCapReport rep;
    rep.band_C = band_C > 0.0 ? band_C
                              : std::pow(double(check_bounded_degree(g)) + 1.0, p);
    rep.cap = capacity(g, spec, p, cap_opts).value;
    rep.mod = p_modulus(g, spec, p, mod_opts).value;
    if (rep.cap <= 0.0 && rep.mod <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    if (rep.mod <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.ratio = rep.cap / rep.mod / g.conductance_factor;
    rep.within_band = rep.ratio >= 1.0 / rep.band_C && rep.ratio <= rep.band_C;
    return rep;
}

}  // namespace netpot
