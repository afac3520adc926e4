#include <catch2/catch_amalgamated.hpp>

#include <netpot/netgraph.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace netpot;

namespace {

const double kDh = std::log(8.0) / std::log(3.0);

NetGraph carpet_graph(int level, double beta = 2.1) {
    auto cloud = generate_space(SpaceKind::carpet, level, 1.0);
    const double eps = std::pow(3.0, -level);
    auto net = extract_epsnet(cloud, {eps * (1.0 - 1e-9), 0});
    return build_graph(cloud, net, eps, {kDh, 1.0, ScalingRole::volume},
                       {beta, 1.0, ScalingRole::walk});
}

NetGraph lattice_graph(int side, double beta = 2.0) {
    auto cloud = generate_space(SpaceKind::lattice2d, side, double(side));
    auto net = extract_epsnet(cloud, {0.9, 0});
    return build_graph(cloud, net, 0.9, {2.0, 1.0, ScalingRole::volume},
                       {beta, 1.0, ScalingRole::walk});
}

NetGraph interval_graph(int n_edges) {
    // spacing 1; eps = 0.6 keeps nearest-neighbour edges only
    auto cloud = generate_space(SpaceKind::interval, n_edges, double(n_edges));
    auto net = extract_epsnet(cloud, {0.6, 0});
    return build_graph(cloud, net, 0.6, {1.0, 1.0, ScalingRole::volume},
                       {2.0, 1.0, ScalingRole::walk});
}

// independent O(V^2) Dijkstra oracle
std::vector<double> dijkstra_oracle(const NetGraph& g, int src) {
    const int n = g.n();
    std::vector<double> dist(std::size_t(n), kInf);
    std::vector<char> done(std::size_t(n), 0);
    dist[std::size_t(src)] = 0.0;
    for (int it = 0; it < n; ++it) {
        int best = -1;
        double bd = kInf;
        for (int v = 0; v < n; ++v)
            if (!done[std::size_t(v)] && dist[std::size_t(v)] < bd) { bd = dist[std::size_t(v)]; best = v; }
        if (best < 0) break;
        done[std::size_t(best)] = 1;
        for (auto [w, len] : g.adj[std::size_t(best)])
            dist[std::size_t(w)] = std::min(dist[std::size_t(w)], bd + len);
    }
    return dist;
}

}  // namespace

TEST_CASE("edge rule: distance window") {
    PointCloud c;
    c.points = {{0.0, 0.0}, {2.0, 0.0}};
    c.scale = 3.0;
    NetGraph g2 = build_graph(c, {0, 1}, 1.0, {1, 1, ScalingRole::volume}, {2, 1, ScalingRole::walk});
    CHECK(g2.edges.size() == 1);  // distance 2*eps -> edge
    c.points = {{0.0, 0.0}, {3.0, 0.0}};
    NetGraph g3 = build_graph(c, {0, 1}, 1.0, {1, 1, ScalingRole::volume}, {2, 1, ScalingRole::walk});
    CHECK(g3.edges.empty());  // 3*eps exceeds 5eps/2
    CHECK_FALSE(g3.connected);
}

TEST_CASE("carpet level 2 edges match brute-force pair scan") {
    auto g = carpet_graph(2);
    const double eps = std::pow(3.0, -2);
    std::set<std::pair<int, int>> brute;
    for (int i = 0; i < g.n(); ++i)
        for (int j = i + 1; j < g.n(); ++j)
            if (dist2d(g.coords[std::size_t(i)], g.coords[std::size_t(j)]) < 2.5 * eps)
                brute.insert({i, j});
    std::set<std::pair<int, int>> got;
    for (auto& e : g.edges) got.insert({e.a, e.b});
    CHECK(got == brute);
    // every stored length obeys eps <= l < 2.5 eps
    for (auto& e : g.edges) {
        CHECK(e.length >= eps - 1e-12);
        CHECK(e.length < 2.5 * eps);
    }
    CHECK(g.connected);
    CHECK(g.vertex_mass == Catch::Approx(std::pow(eps, kDh)));
    CHECK(g.conductance_factor == Catch::Approx(std::pow(eps, kDh - 2.1)));
}

TEST_CASE("graph metric basics and oracle") {
    auto path = graph_from_parts({{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}}, 0.9,
                                 {1, 1, ScalingRole::volume}, {2, 1, ScalingRole::walk});
    auto d = graph_metric(path, 0);
    CHECK(d[0] == 0.0);
    CHECK(d[2] == Catch::Approx(2.0));

    auto g = carpet_graph(3);
    const int a = nearest_vertex(g, 0.0, 0.0);
    const int b = nearest_vertex(g, 1.0, 1.0);
    auto dist = graph_metric(g, a);
    const double euclid = dist2d(g.coords[std::size_t(a)], g.coords[std::size_t(b)]);
    CHECK(dist[std::size_t(b)] >= euclid - 1e-12);
    CHECK(dist[std::size_t(b)] <= 2.0 * std::sqrt(2.0));  // measured L is small on the carpet
    auto oracle = dijkstra_oracle(g, a);
    for (int v = 0; v < g.n(); ++v)
        CHECK(dist[std::size_t(v)] == Catch::Approx(oracle[std::size_t(v)]).margin(1e-12));
    // d <= d^(eps) on sampled pairs
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> pick(0, g.n() - 1);
    for (int t = 0; t < 50; ++t) {
        int v = pick(rng);
        CHECK(dist[std::size_t(v)] >= dist2d(g.coords[std::size_t(a)], g.coords[std::size_t(v)]) - 1e-12);
    }
}

TEST_CASE("balls and annuli") {
    auto g = carpet_graph(3);
    const double eps = std::pow(3.0, -3);
    const int c = nearest_vertex(g, 0.5, 0.5);
    auto tiny = ball(g, c, eps * 0.99);
    CHECK(tiny == VertexSet{c});
    auto b1 = ball(g, c, 0.2);
    auto b2 = ball(g, c, 0.4);
    CHECK(std::includes(b2.begin(), b2.end(), b1.begin(), b1.end()));
    auto an = annulus(g, c, 0.2, 0.4);
    for (int v : an) {
        CHECK_FALSE(std::binary_search(b1.begin(), b1.end(), v));
        CHECK(std::binary_search(b2.begin(), b2.end(), v));
    }
    // ball-volume regularity V(Phi) at the center of the left edge
    const int lc = nearest_vertex(g, 0.0, 0.5);
    auto bl = ball(g, lc, 0.5);
    const double mass = g.mass(bl);
    const double phi = std::pow(0.5, kDh);
    CHECK(mass >= phi / 8.0);
    CHECK(mass <= 8.0 * phi);
    CHECK_THROWS_AS(ball(g, c, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(annulus(g, c, 0.3, 0.2), std::invalid_argument);
}

TEST_CASE("bounded degree") {
    auto single = graph_from_parts({{0, 0}}, {}, 1.0, {1, 1, ScalingRole::volume},
                                   {2, 1, ScalingRole::walk});
    CHECK(check_bounded_degree(single) == 0);

    auto cloud = generate_space(SpaceKind::interval, 10, 10.0);
    auto net = extract_epsnet(cloud, {0.99, 0});
    auto line = build_graph(cloud, net, 0.99, {1, 1, ScalingRole::volume}, {2, 1, ScalingRole::walk});
    CHECK(check_bounded_degree(line) == 4);  // +-1 and +-2 within 2.5 eps

    // scale-independence across carpet levels (level 2 is too small to
    // contain the worst-case local pattern; 3 and up agree)
    int n3 = check_bounded_degree(carpet_graph(3));
    int n4 = check_bounded_degree(carpet_graph(4));
    int n5 = check_bounded_degree(carpet_graph(5));
    CHECK(n3 == n4);
    CHECK(n4 == n5);
}

TEST_CASE("greedy 5B cover") {
    auto g = carpet_graph(3);
    SECTION("one ball") {
        auto sel = greedy_5b_cover(g, {{0, 0.2}});
        CHECK(sel == std::vector<int>{0});
    }
    SECTION("two disjoint balls") {
        int a = nearest_vertex(g, 0.1, 0.1), b = nearest_vertex(g, 0.9, 0.9);
        auto sel = greedy_5b_cover(g, {{a, 0.1}, {b, 0.1}});
        CHECK(sel == std::vector<int>{0, 1});
    }
    SECTION("ten random balls: disjointness and 5x coverage, exhaustively") {
        std::mt19937_64 rng(2024);
        std::uniform_int_distribution<int> pick(0, g.n() - 1);
        std::uniform_real_distribution<double> rad(0.05, 0.3);
        std::vector<std::pair<int, double>> balls;
        for (int i = 0; i < 10; ++i) balls.emplace_back(pick(rng), rad(rng));
        auto sel = greedy_5b_cover(g, balls);
        REQUIRE_FALSE(sel.empty());
        // pairwise disjoint: center distance >= r_i + r_j
        for (std::size_t i = 0; i < sel.size(); ++i) {
            auto di = graph_metric(g, balls[std::size_t(sel[i])].first);
            for (std::size_t j = i + 1; j < sel.size(); ++j) {
                const double d = di[std::size_t(balls[std::size_t(sel[j])].first)];
                CHECK(d >= balls[std::size_t(sel[i])].second + balls[std::size_t(sel[j])].second);
            }
        }
        // 5x dilations cover every input ball's vertex set
        std::vector<char> covered(std::size_t(g.n()), 0);
        for (int s : sel)
            for (int v : ball(g, balls[std::size_t(s)].first, 5.0 * balls[std::size_t(s)].second))
                covered[std::size_t(v)] = 1;
        for (auto& [c, r] : balls)
            for (int v : ball(g, c, r)) CHECK(covered[std::size_t(v)] == 1);
    }
}

TEST_CASE("LLC holds on lattice and carpet, fails on the interval") {
    auto line = interval_graph(64);
    const int mid = 32;
    auto r1 = check_llc(line, mid, 8.0, 2.0);
    CHECK_FALSE(r1.vacuous);
    CHECK_FALSE(r1.ok);  // annulus = two disjoint sub-intervals

    auto lat = lattice_graph(40);
    const int c = nearest_vertex(lat, 20.0, 20.0);
    auto r2 = check_llc(lat, c, 8.0, 2.0);
    CHECK_FALSE(r2.vacuous);
    CHECK(r2.ok);

    auto carp = carpet_graph(4);
    auto r3 = check_llc(carp, nearest_vertex(carp, 0.5, 0.5), 0.25, 3.0);
    CHECK_FALSE(r3.vacuous);
    CHECK(r3.ok);

    // vacuous case
    auto single = graph_from_parts({{0, 0}}, {}, 1.0, {1, 1, ScalingRole::volume},
                                   {2, 1, ScalingRole::walk});
    auto r4 = check_llc(single, 0, 1.0, 2.0);
    CHECK(r4.vacuous);
    CHECK(r4.ok);
}

TEST_CASE("interior vertices margin filter") {
    auto g = carpet_graph(2);
    auto inner = interior_vertices(g, 0.0, 1.0, 0.2);
    for (int v : inner) {
        CHECK(g.coords[std::size_t(v)][0] >= 0.2);
        CHECK(g.coords[std::size_t(v)][0] <= 0.8);
    }
    CHECK(inner.size() < std::size_t(g.n()));
}
