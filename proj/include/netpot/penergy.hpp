#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "netgraph.hpp"

namespace netpot {

inline double signed_pow(double x, double q) {
    if (x == 0.0) return 0.0;
    return x > 0.0 ? std::pow(x, q) : -std::pow(-x, q);
}

// Discrete p-energy (Phi(eps)/Psi(eps)) * sum over edges |u(a)-u(b)|^p,
// restricted to edges with both endpoints in A when A is given.
inline double energy(const NetGraph& g, const VertexFn& u, double p) {
    double s = 0.0;
    for (const auto& e : g.edges) {
        const double d = std::abs(u[std::size_t(e.a)] - u[std::size_t(e.b)]);
        s += std::pow(d, p);
    }
    return g.conductance_factor * s;
}

inline double energy(const NetGraph& g, const VertexFn& u, double p, const VertexSet& A) {
    auto in = mask_of(g.n(), A);
    double s = 0.0;
    for (const auto& e : g.edges) {
        if (!in[std::size_t(e.a)] || !in[std::size_t(e.b)]) continue;
        const double d = std::abs(u[std::size_t(e.a)] - u[std::size_t(e.b)]);
        s += std::pow(d, p);
    }
    return g.conductance_factor * s;
}

// Per-vertex share of the energy measure of u: each edge's contribution
// split half to each endpoint.
inline std::vector<double> gamma_vertex(const NetGraph& g, const VertexFn& u, double p) {
    std::vector<double> out(u.size(), 0.0);
    for (const auto& e : g.edges) {
        const double d = std::abs(u[std::size_t(e.a)] - u[std::size_t(e.b)]);
        const double half = 0.5 * g.conductance_factor * std::pow(d, p);
        out[std::size_t(e.a)] += half;
        out[std::size_t(e.b)] += half;
    }
    return out;
}

// Delta_p u(z) = (Phi(eps)/Psi(eps)) sum_{z'~z} |u(z')-u(z)|^{p-2}(u(z')-u(z)).
// The Euler-Lagrange pairing is E(u;v) = sum_z v(z) (-Delta_p u(z)).
inline VertexFn p_laplacian(const NetGraph& g, const VertexFn& u, double p) {
    VertexFn out(u.size(), 0.0);
    for (const auto& e : g.edges) {
        const double d = u[std::size_t(e.b)] - u[std::size_t(e.a)];
        const double flux = signed_pow(d, p - 1.0);
        out[std::size_t(e.a)] += flux;
        out[std::size_t(e.b)] -= flux;
    }
    for (auto& v : out) v *= g.conductance_factor;
    return out;
}

// Riesz measure mu[u] = -Delta_p u on U, for u superharmonic in U.
inline VertexMeasure riesz_measure(const NetGraph& g, const VertexFn& u, double p,
                                   const VertexSet& U, double tol = 1e-8) {
    auto lap = p_laplacian(g, u, p);
    VertexMeasure mu(u.size(), 0.0);
    for (int z : U) {
        const double v = -lap[std::size_t(z)];
        if (v < -tol)
            throw std::domain_error("riesz_measure: negative mass (u not superharmonic in U)");
        mu[std::size_t(z)] = v;
    }
    return mu;
}

struct SolverOptions {
    enum class Method { automatic, irls, gradient };
    Method method = Method::automatic;
    double mu_floor = 1e-12;    // regularizer in the IRLS weights
    int max_iters = 10000;
    double tol = 1e-10;         // relative energy decrease
    double inner_tol = 1e-12;   // linear-solve tolerance (iterative fallback)
    double kkt_tol = 0.0;       // optional early exit on normalized KKT residual
    bool throw_on_failure = true;
};

// Dirichlet data lives on the one-edge ring around U; the energy is summed
// over edges with at least one endpoint in U (restricted to `ambient` when
// given). Vertices beyond the ring are ignored.
struct DirichletProblem {
    const NetGraph* graph = nullptr;
    VertexSet domain;               // U
    VertexFn boundary_values;       // full-length; read on the computed ring
    double lambda = 0.0;
    VertexFn source;                // full-length f, interpreted on U; empty = 0
    VertexSet ambient;              // empty = whole graph
    double p = 2.0;
};

struct Solution {
    VertexFn u;             // boundary data on the ring, zero beyond
    int iterations = 0;
    double final_energy = 0.0;   // objective value at the minimizer
    double kkt_residual = 0.0;   // max_U |stationarity| / (Phi(eps)/Psi(eps))
    bool converged = false;
    VertexSet ring;              // the computed one-edge boundary ring
};

// Variational solver for
//   min (1/p) E_{U-touching}(u) + (lambda/p) sum_U m |u|^p - sum_U m f u
// over u = g on the ring. IRLS on the regularized edge weights
// (d^2 + mu)^{(p-2)/2} with a monotone line search on the true objective;
// plain preconditioned gradient descent as fallback for extreme p.
// Reusable: setup once per (graph, domain, ambient, lambda, p), then solve
// for many data sets (the sweeps rely on this).
class DirichletSolver {
  public:
    DirichletSolver(const NetGraph& g, VertexSet domain, double p, double lambda = 0.0,
                    VertexSet ambient = {})
        : g_(g), U_(std::move(domain)), p_(p), lambda_(lambda) {
        if (!(p_ > 1.0)) throw std::invalid_argument("DirichletSolver: p <= 1");
        const int n = g_.n();
        in_U_ = mask_of(n, U_);
        std::vector<char> in_amb;
        if (ambient.empty()) {
            in_amb.assign(std::size_t(n), 1);
        } else {
            in_amb = mask_of(n, ambient);
            for (int z : U_)
                if (!in_amb[std::size_t(z)])
                    throw std::invalid_argument("DirichletSolver: U not inside ambient");
        }
        idx_.assign(std::size_t(n), -1);
        for (std::size_t k = 0; k < U_.size(); ++k) idx_[std::size_t(U_[k])] = int(k);
        std::vector<char> ring_mask(std::size_t(n), 0);
        for (const auto& e : g_.edges) {
            if (!in_amb[std::size_t(e.a)] || !in_amb[std::size_t(e.b)]) continue;
            const bool ua = in_U_[std::size_t(e.a)], ub = in_U_[std::size_t(e.b)];
            if (!ua && !ub) continue;
            edges_.push_back({e.a, e.b, e.length});
            if (!ua) ring_mask[std::size_t(e.a)] = 1;
            if (!ub) ring_mask[std::size_t(e.b)] = 1;
        }
        for (int v = 0; v < n; ++v)
            if (ring_mask[std::size_t(v)]) ring_.push_back(v);
        if (ring_.empty() && lambda_ == 0.0)
            throw std::invalid_argument("DirichletSolver: empty boundary ring with lambda = 0 is ill-posed");
        // Pin U-components not connected to the ring (lambda = 0 only):
        // their energy sees no data, the translation-invariant convention is 0.
        if (lambda_ == 0.0) {
            std::vector<char> grounded(std::size_t(n), 0);
            std::vector<int> stack;
            for (int v : ring_) { grounded[std::size_t(v)] = 1; stack.push_back(v); }
            std::vector<std::vector<int>> nbr(std::size_t(n));
            for (const auto& e : edges_) {
                nbr[std::size_t(e.a)].push_back(e.b);
                nbr[std::size_t(e.b)].push_back(e.a);
            }
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int w : nbr[std::size_t(v)])
                    if (!grounded[std::size_t(w)]) {
                        grounded[std::size_t(w)] = 1;
                        stack.push_back(w);
                    }
            }
            for (int z : U_)
                if (!grounded[std::size_t(z)]) pinned_.push_back(z);
            if (!pinned_.empty()) {
                for (int z : pinned_) idx_[std::size_t(z)] = -2;  // fixed at 0
                std::vector<Edge> kept;
                for (const auto& e : edges_)
                    if (idx_[std::size_t(e.a)] != -2 && idx_[std::size_t(e.b)] != -2)
                        kept.push_back(e);
                edges_.swap(kept);
                VertexSet live;
                for (int z : U_)
                    if (idx_[std::size_t(z)] != -2) live.push_back(z);
                live_.swap(live);
                idx_.assign(std::size_t(n), -1);
                for (int z : pinned_) idx_[std::size_t(z)] = -2;
                for (std::size_t k = 0; k < live_.size(); ++k) idx_[std::size_t(live_[k])] = int(k);
            }
        }
        if (pinned_.empty()) live_ = U_;
    }

    const VertexSet& ring() const { return ring_; }
    const VertexSet& domain() const { return U_; }

    Solution solve(const VertexFn& boundary_values, const VertexFn& source,
                   const SolverOptions& opts = {}) const {
        const int n = g_.n();
        VertexFn gvals = boundary_values.empty() ? VertexFn(std::size_t(n), 0.0) : boundary_values;
        VertexFn f = source.empty() ? VertexFn(std::size_t(n), 0.0) : source;
        if (int(gvals.size()) != n || int(f.size()) != n)
            throw std::invalid_argument("DirichletSolver::solve: data must be full-length");
        for (int v : ring_)
            if (!std::isfinite(gvals[std::size_t(v)]))
                throw std::invalid_argument("DirichletSolver::solve: non-finite boundary value");
        if (!pinned_.empty() && lambda_ == 0.0) {
            for (int z : pinned_)
                if (f[std::size_t(z)] != 0.0)
                    throw std::invalid_argument(
                        "DirichletSolver::solve: source on a component not reachable from the ring");
        }

        Solution sol;
        sol.ring = ring_;
        sol.u.assign(std::size_t(n), 0.0);
        for (int v : ring_) sol.u[std::size_t(v)] = gvals[std::size_t(v)];

        const std::size_t nu = live_.size();
        if (nu == 0) {
            sol.converged = true;
            sol.final_energy = objective(sol.u, f);
            sol.kkt_residual = 0.0;
            return sol;
        }

        SolverOptions::Method method = opts.method;
        if (method == SolverOptions::Method::automatic)
            method = (p_ >= 1.2 && p_ <= 6.0) ? SolverOptions::Method::irls
                                              : SolverOptions::Method::gradient;

        // start from the p=2 solution (exact for p = 2)
        Eigen::VectorXd x = solve_weighted(sol.u, f, /*p2_init=*/true);
        scatter(x, sol.u);
        double F = objective(sol.u, f);
        sol.iterations = 1;

        if (method == SolverOptions::Method::irls && p_ != 2.0) {
            const double mu = opts.mu_floor;
            int calm = 0;
            for (int it = 1; it < opts.max_iters; ++it) {
                Eigen::VectorXd xs = solve_weighted(sol.u, f, false, mu);
                // monotone backtracking toward the previous iterate
                Eigen::VectorXd x0 = gather(sol.u);
                Eigen::VectorXd dir = xs - x0;
                Eigen::VectorXd grad = gradient_vec(sol.u, f);
                const double gdot = grad.dot(dir);
                double t = 1.0;
                VertexFn trial = sol.u;
                double Fnew = F;
                for (int ls = 0; ls < 60; ++ls) {
                    Eigen::VectorXd xt = x0 + t * dir;
                    scatter(xt, trial);
                    Fnew = objective(trial, f);
                    if (Fnew <= F + 1e-4 * t * gdot || Fnew < F) break;
                    t *= 0.5;
                }
                ++sol.iterations;
                const double dF = F - Fnew;
                if (Fnew < F) { scatter(x0 + t * dir, sol.u); F = Fnew; }
                const bool small = std::abs(dF) <= opts.tol * (1.0 + std::abs(F));
                calm = small ? calm + 1 : 0;
                if (opts.kkt_tol > 0.0 && kkt(sol.u, f) <= opts.kkt_tol) break;
                if (calm >= 2) break;
            }
        } else if (method == SolverOptions::Method::gradient && p_ != 2.0) {
            gradient_descent(sol, f, opts, F);
        }

        sol.final_energy = F;
        sol.kkt_residual = kkt(sol.u, f);
        sol.converged = sol.iterations < opts.max_iters;
        if (!sol.converged && opts.throw_on_failure)
            throw std::runtime_error("DirichletSolver: no convergence within max_iters, kkt = " +
                                     std::to_string(sol.kkt_residual));
        return sol;
    }

    double objective(const VertexFn& u, const VertexFn& f) const {
        const double c = g_.conductance_factor;
        double s = 0.0;
        for (const auto& e : edges_)
            s += std::pow(std::abs(u[std::size_t(e.a)] - u[std::size_t(e.b)]), p_);
        double F = c / p_ * s;
        const double m = g_.vertex_mass;
        for (int z : live_) {
            F += lambda_ / p_ * m * std::pow(std::abs(u[std::size_t(z)]), p_);
            F -= m * f[std::size_t(z)] * u[std::size_t(z)];
        }
        return F;
    }

    // max over U of |d objective / d u_z| normalized by Phi(eps)/Psi(eps)
    double kkt(const VertexFn& u, const VertexFn& f) const {
        Eigen::VectorXd grad = gradient_vec(u, f);
        return grad.size() ? grad.cwiseAbs().maxCoeff() / g_.conductance_factor : 0.0;
    }

  private:
    struct Edge {
        int a, b;
        double length;
    };

    Eigen::VectorXd gather(const VertexFn& u) const {
        Eigen::VectorXd x(Eigen::Index(live_.size()));
        for (std::size_t k = 0; k < live_.size(); ++k) x[Eigen::Index(k)] = u[std::size_t(live_[k])];
        return x;
    }
    void scatter(const Eigen::VectorXd& x, VertexFn& u) const {
        for (std::size_t k = 0; k < live_.size(); ++k) u[std::size_t(live_[k])] = x[Eigen::Index(k)];
    }

    Eigen::VectorXd gradient_vec(const VertexFn& u, const VertexFn& f) const {
        const double c = g_.conductance_factor;
        const double m = g_.vertex_mass;
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(Eigen::Index(live_.size()));
        for (const auto& e : edges_) {
            const double d = u[std::size_t(e.a)] - u[std::size_t(e.b)];
            const double flux = c * signed_pow(d, p_ - 1.0);
            const int ia = idx_[std::size_t(e.a)], ib = idx_[std::size_t(e.b)];
            if (ia >= 0) grad[ia] += flux;
            if (ib >= 0) grad[ib] -= flux;
        }
        for (std::size_t k = 0; k < live_.size(); ++k) {
            const int z = live_[k];
            grad[Eigen::Index(k)] += lambda_ * m * signed_pow(u[std::size_t(z)], p_ - 1.0);
            grad[Eigen::Index(k)] -= m * f[std::size_t(z)];
        }
        return grad;
    }

    // One reweighted least-squares solve. p2_init uses unit weights.
    Eigen::VectorXd solve_weighted(const VertexFn& u, const VertexFn& f, bool p2_init,
                                   double mu = 1e-12) const {
        const double c = g_.conductance_factor;
        const double m = g_.vertex_mass;
        const Eigen::Index nu = Eigen::Index(live_.size());
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(edges_.size() * 4 + live_.size());
        Eigen::VectorXd b = Eigen::VectorXd::Zero(nu);
        for (const auto& e : edges_) {
            const int ia = idx_[std::size_t(e.a)], ib = idx_[std::size_t(e.b)];
            double w = 1.0;
            if (!p2_init && p_ != 2.0) {
                const double d = u[std::size_t(e.a)] - u[std::size_t(e.b)];
                w = std::pow(d * d + mu, (p_ - 2.0) / 2.0);
            }
            const double cw = c * w;
            if (ia >= 0 && ib >= 0) {
                trips.emplace_back(ia, ia, cw);
                trips.emplace_back(ib, ib, cw);
                trips.emplace_back(ia, ib, -cw);
                trips.emplace_back(ib, ia, -cw);
            } else if (ia >= 0) {
                trips.emplace_back(ia, ia, cw);
                b[ia] += cw * u[std::size_t(e.b)];
            } else if (ib >= 0) {
                trips.emplace_back(ib, ib, cw);
                b[ib] += cw * u[std::size_t(e.a)];
            }
        }
        for (std::size_t k = 0; k < live_.size(); ++k) {
            const int z = live_[k];
            double nuw = 1.0;
            if (!p2_init && p_ != 2.0) {
                const double uz = u[std::size_t(z)];
                nuw = std::pow(uz * uz + mu, (p_ - 2.0) / 2.0);
            }
            if (lambda_ > 0.0) trips.emplace_back(int(k), int(k), lambda_ * m * nuw);
            b[Eigen::Index(k)] += m * f[std::size_t(z)];
        }
        Eigen::SparseMatrix<double> A(nu, nu);
        A.setFromTriplets(trips.begin(), trips.end());
        if (!pattern_ready_) {
            ldlt_.analyzePattern(A);
            pattern_ready_ = true;
        }
        ldlt_.factorize(A);
        if (ldlt_.info() != Eigen::Success) {
            // tiny diagonal shift as a last resort
            Eigen::SparseMatrix<double> I(nu, nu);
            I.setIdentity();
            ldlt_.factorize(Eigen::SparseMatrix<double>(A + 1e-13 * I));
            if (ldlt_.info() != Eigen::Success)
                throw std::runtime_error("DirichletSolver: factorization failed");
        }
        return ldlt_.solve(b);
    }

    void gradient_descent(Solution& sol, const VertexFn& f, const SolverOptions& opts,
                          double& F) const {
        // diagonal-preconditioned Armijo descent on the true objective
        const double c = g_.conductance_factor;
        const double m = g_.vertex_mass;
        const double mu = opts.mu_floor;
        int calm = 0;
        for (int it = sol.iterations; it < opts.max_iters; ++it) {
            Eigen::VectorXd grad = gradient_vec(sol.u, f);
            Eigen::VectorXd diag = Eigen::VectorXd::Constant(grad.size(), 1e-30);
            for (const auto& e : edges_) {
                const double d = sol.u[std::size_t(e.a)] - sol.u[std::size_t(e.b)];
                const double w = c * (p_ - 1.0) * std::pow(d * d + mu, (p_ - 2.0) / 2.0);
                const int ia = idx_[std::size_t(e.a)], ib = idx_[std::size_t(e.b)];
                if (ia >= 0) diag[ia] += w;
                if (ib >= 0) diag[ib] += w;
            }
            for (std::size_t k = 0; k < live_.size(); ++k) {
                const double uz = sol.u[std::size_t(live_[k])];
                diag[Eigen::Index(k)] +=
                    lambda_ * m * (p_ - 1.0) * std::pow(uz * uz + mu, (p_ - 2.0) / 2.0);
            }
            Eigen::VectorXd dir = -grad.cwiseQuotient(diag);
            const double gdot = grad.dot(dir);
            Eigen::VectorXd x0 = gather(sol.u);
            double t = 1.0;
            VertexFn trial = sol.u;
            double Fnew = F;
            for (int ls = 0; ls < 60; ++ls) {
                scatter(x0 + t * dir, trial);
                Fnew = objective(trial, f);
                if (Fnew <= F + 1e-4 * t * gdot) break;
                t *= 0.5;
            }
            ++sol.iterations;
            const double dF = F - Fnew;
            if (Fnew < F) { scatter(x0 + t * dir, sol.u); F = Fnew; }
            const bool small = std::abs(dF) <= opts.tol * (1.0 + std::abs(F));
            calm = small ? calm + 1 : 0;
            if (opts.kkt_tol > 0.0 && kkt(sol.u, f) <= opts.kkt_tol) break;
            if (calm >= 3) break;
        }
    }

    const NetGraph& g_;
    VertexSet U_;
    double p_;
    double lambda_;
    std::vector<char> in_U_;
    std::vector<int> idx_;     // vertex -> unknown index, -1 fixed data, -2 pinned 0
    VertexSet live_;           // unknowns (U minus pinned)
    VertexSet pinned_;
    VertexSet ring_;
    std::vector<Edge> edges_;  // active edges
    mutable Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    mutable bool pattern_ready_ = false;
};

inline Solution solve_dirichlet(const DirichletProblem& prob, const SolverOptions& opts = {}) {
    if (!prob.graph) throw std::invalid_argument("solve_dirichlet: null graph");
    DirichletSolver s(*prob.graph, prob.domain, prob.p, prob.lambda, prob.ambient);
    return s.solve(prob.boundary_values, prob.source, opts);
}

// Zero Dirichlet data on the ring, source f, optional lambda-term.
inline Solution solve_poisson(const NetGraph& g, const VertexSet& U, const VertexFn& f,
                              double lambda, double p, const SolverOptions& opts = {}) {
    DirichletSolver s(g, U, p, lambda);
    return s.solve({}, f, opts);
}

enum class HLabel : std::int8_t { none = 0, harmonic, superharmonic, subharmonic };

// Per-vertex sign of -Delta_p u against +-tol; vertices outside U get none.
inline std::vector<HLabel> classify(const NetGraph& g, const VertexFn& u, double p,
                                    const VertexSet& U, double tol = 1e-8) {
    auto lap = p_laplacian(g, u, p);
    std::vector<HLabel> out(u.size(), HLabel::none);
    for (int z : U) {
        const double s = -lap[std::size_t(z)];
        out[std::size_t(z)] = std::abs(s) <= tol ? HLabel::harmonic
                              : s > 0.0          ? HLabel::superharmonic
                                                 : HLabel::subharmonic;
    }
    return out;
}

inline bool is_superharmonic(const NetGraph& g, const VertexFn& u, double p,
                             const VertexSet& U, double tol = 1e-8) {
    auto lap = p_laplacian(g, u, p);
    for (int z : U)
        if (-lap[std::size_t(z)] < -tol) return false;
    return true;
}

struct ComparisonResult {
    enum class Status { holds, fails, inconclusive };
    Status status = Status::inconclusive;
    double min_margin = 0.0;          // min over U of u - v
    double min_precond_margin = 0.0;  // min over U of (Lu - Lv), L = -Delta_p + lambda m |.|^{p-2}.
    double min_boundary_margin = 0.0;
};

// Checks u >= v - tol on U given the comparison hypotheses
//   -Delta_p u + lambda m |u|^{p-2}u >= same for v on U,  u >= v on the ring.
// A detected hypothesis violation yields `inconclusive`, not `fails`.
inline ComparisonResult check_comparison(const NetGraph& g, const VertexFn& u,
                                         const VertexFn& v, const VertexSet& U,
                                         double lambda, double p, double tol = 1e-8,
                                         double precond_tol = 1e-8) {
    ComparisonResult res;
    auto lap_u = p_laplacian(g, u, p);
    auto lap_v = p_laplacian(g, v, p);
    const double m = g.vertex_mass;
    double pm = kInf;
    for (int z : U) {
        const double Lu = -lap_u[std::size_t(z)] + lambda * m * signed_pow(u[std::size_t(z)], p - 1.0);
        const double Lv = -lap_v[std::size_t(z)] + lambda * m * signed_pow(v[std::size_t(z)], p - 1.0);
        pm = std::min(pm, Lu - Lv);
    }
    res.min_precond_margin = pm;
    auto in_U = mask_of(g.n(), U);
    std::vector<char> ring(std::size_t(g.n()), 0);
    for (const auto& e : g.edges) {
        if (in_U[std::size_t(e.a)] && !in_U[std::size_t(e.b)]) ring[std::size_t(e.b)] = 1;
        if (in_U[std::size_t(e.b)] && !in_U[std::size_t(e.a)]) ring[std::size_t(e.a)] = 1;
    }
    double bm = kInf;
    for (int z = 0; z < g.n(); ++z)
        if (ring[std::size_t(z)]) bm = std::min(bm, u[std::size_t(z)] - v[std::size_t(z)]);
    res.min_boundary_margin = bm == kInf ? 0.0 : bm;
    double im = kInf;
    for (int z : U) im = std::min(im, u[std::size_t(z)] - v[std::size_t(z)]);
    res.min_margin = im;
    if (pm < -precond_tol || res.min_boundary_margin < -precond_tol) {
        res.status = ComparisonResult::Status::inconclusive;
        return res;
    }
    res.status = im >= -tol ? ComparisonResult::Status::holds : ComparisonResult::Status::fails;
    return res;
}

}  // namespace netpot
