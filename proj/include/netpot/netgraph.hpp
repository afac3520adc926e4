#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "scaling.hpp"
#include "spaces.hpp"

namespace netpot {

using VertexSet = std::vector<int>;      // vertex ids, ascending unless noted
using VertexFn = std::vector<double>;    // total on the graph
using VertexMeasure = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// The approximation graph over an eps-net: edge between net points whose
// (5/4)eps-balls intersect, i.e. d(z1,z2) < (5/2)eps, with the exact
// Euclidean length stored. Vertex measure is the constant Phi(eps);
// every edge carries the conductance factor Phi(eps)/Psi(eps) in the
// p-energy.
struct NetGraph {
    struct Edge {
        int a = 0, b = 0;  // a < b
        double length = 0.0;
    };

    std::vector<std::array<double, 2>> coords;
    std::vector<Edge> edges;
    std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, length)
    double epsilon = 0.0;
    PowerScaling phi, psi;
    double vertex_mass = 0.0;         // Phi(eps)
    double conductance_factor = 0.0;  // Phi(eps)/Psi(eps)
    bool connected = true;            // warning flag, not an error

    int n() const { return int(coords.size()); }
    double mass(std::size_t count) const { return vertex_mass * double(count); }
    double mass(const VertexSet& a) const { return mass(a.size()); }
    double total_mass() const { return mass(coords.size()); }
};

inline std::vector<char> mask_of(int n, const VertexSet& ids) {
    std::vector<char> m(n, 0);
    for (int v : ids) {
        if (v < 0 || v >= n) throw std::out_of_range("vertex id out of range");
        m[std::size_t(v)] = 1;
    }
    return m;
}

namespace detail {
inline void finish_graph(NetGraph& g) {
    std::sort(g.edges.begin(), g.edges.end(), [](const NetGraph::Edge& x, const NetGraph::Edge& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    g.adj.assign(g.coords.size(), {});
    for (const auto& e : g.edges) {
        g.adj[std::size_t(e.a)].emplace_back(e.b, e.length);
        g.adj[std::size_t(e.b)].emplace_back(e.a, e.length);
    }
    g.vertex_mass = g.phi(g.epsilon);
    g.conductance_factor = g.phi(g.epsilon) / g.psi(g.epsilon);
    // connectivity check (BFS)
    g.connected = true;
    if (!g.coords.empty()) {
        std::vector<char> seen(g.coords.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        std::size_t cnt = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (auto [w, len] : g.adj[std::size_t(v)])
                if (!seen[std::size_t(w)]) {
                    seen[std::size_t(w)] = 1;
                    ++cnt;
                    stack.push_back(w);
                }
        }
        g.connected = cnt == g.coords.size();
    }
}
}  // namespace detail

// closed_edge_rule switches the boundary case d == 2.5*eps from excluded
// (open-ball intersection, the default) to included.
inline NetGraph build_graph(const PointCloud& cloud, const std::vector<int>& net,
                            double epsilon, PowerScaling phi, PowerScaling psi,
                            bool closed_edge_rule = false) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("build_graph: epsilon <= 0");
    NetGraph g;
    g.epsilon = epsilon;
    g.phi = phi;
    g.psi = psi;
    g.coords.reserve(net.size());
    for (int id : net) g.coords.push_back(cloud.points[std::size_t(id)]);

    const double reach = 2.5 * epsilon;
    detail::GridIndex grid;
    grid.cell = reach;
    for (int i = 0; i < g.n(); ++i) grid.insert(g.coords[std::size_t(i)], i);
    for (int i = 0; i < g.n(); ++i) {
        grid.for_near(g.coords[std::size_t(i)], 1, [&](int j) {
            if (j <= i) return;
            const double d = dist2d(g.coords[std::size_t(i)], g.coords[std::size_t(j)]);
            const bool in = closed_edge_rule ? d <= reach : d < reach;
            if (in) g.edges.push_back({i, j, d});
        });
    }
    detail::finish_graph(g);
    return g;
}

// Assembles a graph from explicit parts (synthetic/test instances).
inline NetGraph graph_from_parts(std::vector<std::array<double, 2>> coords,
                                 std::vector<std::pair<int, int>> edge_list,
                                 double epsilon, PowerScaling phi, PowerScaling psi) {
    NetGraph g;
    g.epsilon = epsilon;
    g.phi = phi;
    g.psi = psi;
    g.coords = std::move(coords);
    for (auto [a, b] : edge_list) {
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        g.edges.push_back({a, b, dist2d(g.coords[std::size_t(a)], g.coords[std::size_t(b)])});
    }
    detail::finish_graph(g);
    return g;
}

// Single-source shortest-path distances in the intrinsic metric d^(eps)
// (edge weights = stored Euclidean lengths). Unreachable -> +inf.
inline std::vector<double> graph_metric(const NetGraph& g, int source) {
    if (source < 0 || source >= g.n()) throw std::out_of_range("graph_metric: bad source");
    std::vector<double> dist(g.coords.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[std::size_t(source)] = 0.0;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[std::size_t(v)]) continue;
        for (auto [w, len] : g.adj[std::size_t(v)]) {
            const double nd = d + len;
            if (nd < dist[std::size_t(w)]) {
                dist[std::size_t(w)] = nd;
                pq.emplace(nd, w);
            }
        }
    }
    return dist;
}

enum class MetricKind { euclidean, intrinsic };

inline std::vector<double> distances_from(const NetGraph& g, int center, MetricKind mk) {
    if (mk == MetricKind::intrinsic) return graph_metric(g, center);
    std::vector<double> dist(g.coords.size());
    for (int i = 0; i < g.n(); ++i)
        dist[std::size_t(i)] = dist2d(g.coords[std::size_t(center)], g.coords[std::size_t(i)]);
    return dist;
}

// Strict ball {d < r}.
inline VertexSet ball(const NetGraph& g, int center, double r,
                      MetricKind mk = MetricKind::intrinsic) {
    if (!(r > 0.0)) throw std::invalid_argument("ball: r <= 0");
    auto dist = distances_from(g, center, mk);
    VertexSet out;
    for (int i = 0; i < g.n(); ++i)
        if (dist[std::size_t(i)] < r) out.push_back(i);
    return out;
}

// {r_in < d < r_out} (outer ball minus closed inner ball).
inline VertexSet annulus(const NetGraph& g, int center, double r_in, double r_out,
                         MetricKind mk = MetricKind::intrinsic) {
    if (!(r_in >= 0.0) || !(r_out > r_in)) throw std::invalid_argument("annulus: need 0 <= r_in < r_out");
    auto dist = distances_from(g, center, mk);
    VertexSet out;
    for (int i = 0; i < g.n(); ++i)
        if (dist[std::size_t(i)] > r_in && dist[std::size_t(i)] < r_out) out.push_back(i);
    return out;
}

inline int check_bounded_degree(const NetGraph& g) {
    std::size_t deg = 0;
    for (const auto& a : g.adj) deg = std::max(deg, a.size());
    return int(deg);
}

// Vertices whose coordinates stay at least `margin` away from the box
// [lo, hi]^2 boundary; the finite-cloud stand-in for "away from the
// boundary of X".
inline VertexSet interior_vertices(const NetGraph& g, double lo, double hi, double margin) {
    VertexSet out;
    for (int i = 0; i < g.n(); ++i) {
        const auto& p = g.coords[std::size_t(i)];
        if (p[0] >= lo + margin && p[0] <= hi - margin && p[1] >= lo + margin &&
            p[1] <= hi - margin)
            out.push_back(i);
    }
    return out;
}

inline int nearest_vertex(const NetGraph& g, double x, double y) {
    int best = 0;
    double bd = kInf;
    for (int i = 0; i < g.n(); ++i) {
        const double d = dist2d(g.coords[std::size_t(i)], {x, y});
        if (d < bd) { bd = d; best = i; }
    }
    return best;
}

// Greedy Vitali selection: largest radius first, keep a ball iff it is
// metrically disjoint (center distance >= sum of radii) from every ball
// kept so far. The 5x dilations of the kept family cover the union.
inline std::vector<int> greedy_5b_cover(const NetGraph& g,
                                        const std::vector<std::pair<int, double>>& balls,
                                        MetricKind mk = MetricKind::intrinsic) {
    for (auto& [c, r] : balls)
        if (!(r > 0.0)) throw std::invalid_argument("greedy_5b_cover: nonpositive radius");
    std::vector<int> order(balls.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return balls[std::size_t(a)].second > balls[std::size_t(b)].second;
    });
    // pairwise center distances among the participating centers
    std::vector<std::vector<double>> dist;
    dist.reserve(balls.size());
    for (auto& [c, r] : balls) dist.push_back(distances_from(g, c, mk));
    std::vector<int> chosen;
    for (int i : order) {
        bool disjoint = true;
        for (int j : chosen) {
            const double d = dist[std::size_t(i)][std::size_t(balls[std::size_t(j)].first)];
            if (d < balls[std::size_t(i)].second + balls[std::size_t(j)].second) {
                disjoint = false;
                break;
            }
        }
        if (disjoint) chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

struct LlcResult {
    bool ok = false;
    bool vacuous = false;  // annulus had < 2 vertices
};

// True iff every pair in annulus(center, r/2, r) is joined by an edge-path
// inside annulus(center, r/(2A), A*r). Intrinsic metric.
inline LlcResult check_llc(const NetGraph& g, int center, double r, double A) {
    if (!(A > 1.0)) throw std::invalid_argument("check_llc: A <= 1");
    auto dist = graph_metric(g, center);
    VertexSet small, big;
    for (int i = 0; i < g.n(); ++i) {
        const double d = dist[std::size_t(i)];
        if (d > r / 2.0 && d < r) small.push_back(i);
        if (d > r / (2.0 * A) && d < A * r) big.push_back(i);
    }
    if (small.size() < 2) return {true, true};
    auto in_big = mask_of(g.n(), big);
    // component labels on the induced subgraph
    std::vector<int> comp(g.coords.size(), -1);
    int ncomp = 0;
    for (int s : big) {
        if (comp[std::size_t(s)] >= 0) continue;
        std::vector<int> stack{s};
        comp[std::size_t(s)] = ncomp;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (auto [w, len] : g.adj[std::size_t(v)])
                if (in_big[std::size_t(w)] && comp[std::size_t(w)] < 0) {
                    comp[std::size_t(w)] = ncomp;
                    stack.push_back(w);
                }
        }
        ++ncomp;
    }
    const int c0 = comp[std::size_t(small.front())];
    for (int v : small)
        if (comp[std::size_t(v)] != c0) return {false, false};
    return {true, false};
}

}  // namespace netpot
