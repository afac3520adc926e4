#include <catch2/catch_amalgamated.hpp>

#include <netpot/spaces.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace netpot;

namespace {

// independent oracle: recursive cell subdivision of the carpet
void carpet_cells(double x, double y, double side, int depth,
                  std::vector<std::array<double, 2>>& out) {
    if (depth == 0) {
        out.push_back({x + side / 2.0, y + side / 2.0});
        return;
    }
    const double h = side / 3.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == 1 && j == 1) continue;
            carpet_cells(x + i * h, y + j * h, h, depth - 1, out);
        }
}

std::set<std::pair<long long, long long>> keyed(const std::vector<std::array<double, 2>>& pts) {
    std::set<std::pair<long long, long long>> s;
    for (auto& p : pts)
        s.insert({llround(p[0] * 1e12), llround(p[1] * 1e12)});
    return s;
}

}  // namespace

TEST_CASE("carpet level 1 is the eight third-cell centers") {
    auto c = generate_space(SpaceKind::carpet, 1, 1.0);
    REQUIRE(c.points.size() == 8);
    std::set<std::pair<long long, long long>> expect;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == 1 && j == 1) continue;
            expect.insert({llround((i + 0.5) / 3.0 * 1e12), llround((j + 0.5) / 3.0 * 1e12)});
        }
    CHECK(keyed(c.points) == expect);
    CHECK(c.d_h == Catch::Approx(std::log(8.0) / std::log(3.0)));
}

TEST_CASE("interval points are equispaced") {
    auto c = generate_space(SpaceKind::interval, 4, 1.0);
    REQUIRE(c.points.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(c.points[std::size_t(i)][0] == Catch::Approx(0.25 * i).margin(1e-15));
        CHECK(c.points[std::size_t(i)][1] == 0.0);
    }
}

TEST_CASE("carpet level 3 matches recursive enumeration") {
    auto c = generate_space(SpaceKind::carpet, 3, 1.0);
    REQUIRE(c.points.size() == 512);
    std::vector<std::array<double, 2>> oracle;
    carpet_cells(0.0, 0.0, 1.0, 3, oracle);
    REQUIRE(oracle.size() == 512);
    CHECK(keyed(c.points) == keyed(oracle));
}

TEST_CASE("lattice and gasket counts") {
    CHECK(generate_space(SpaceKind::lattice2d, 7, 1.0).points.size() == 64);
    CHECK(generate_space(SpaceKind::gasket, 4, 1.0).points.size() == 81);
    auto g = generate_space(SpaceKind::gasket, 3, 1.0);
    std::set<std::pair<long long, long long>> uniq = keyed(g.points);
    CHECK(uniq.size() == g.points.size());
    for (auto& p : g.points) {
        CHECK(p[0] >= 0.0);
        CHECK(p[0] <= 1.0);
        CHECK(p[1] >= 0.0);
        CHECK(p[1] <= 1.0);
    }
}

TEST_CASE("point cap is enforced") {
    CHECK_THROWS_AS(generate_space(SpaceKind::carpet, 8, 1.0), std::runtime_error);
    CHECK_THROWS_AS(generate_space(SpaceKind::interval, 100, 1.0, 50), std::runtime_error);
}

TEST_CASE("epsnet greedy on a 3-point line") {
    PointCloud c;
    c.kind = SpaceKind::interval;
    c.level = 2;
    c.scale = 1.0;
    c.d_h = 1.0;
    c.points = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
    auto net = extract_epsnet(c, {0.6, 0});
    CHECK(net == std::vector<int>{0, 2});
}

TEST_CASE("epsnet keeps everything below the separation scale") {
    auto c = generate_space(SpaceKind::lattice2d, 6, 1.0);
    // min pairwise distance is 1/6
    auto net = extract_epsnet(c, {0.9 / 6.0, 42});
    CHECK(net.size() == c.points.size());
}

TEST_CASE("carpet level 3 at eps = 3^-3 keeps all 512 centers") {
    auto c = generate_space(SpaceKind::carpet, 3, 1.0);
    const double eps = std::pow(3.0, -3);
    // oracle: brute-force min pairwise distance
    double mind = 1e9;
    for (std::size_t i = 0; i < c.points.size(); ++i)
        for (std::size_t j = i + 1; j < c.points.size(); ++j)
            mind = std::min(mind, dist2d(c.points[i], c.points[j]));
    CHECK(mind >= eps - 1e-12);
    auto net = extract_epsnet(c, {eps * (1.0 - 1e-9), 0});
    CHECK(net.size() == 512);
}

TEST_CASE("epsnet separation, covering, determinism") {
    auto c = generate_space(SpaceKind::carpet, 3, 1.0);
    const double eps = 0.1;
    auto net = extract_epsnet(c, {eps, 1234});
    for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = i + 1; j < net.size(); ++j)
            CHECK(dist2d(c.points[std::size_t(net[i])], c.points[std::size_t(net[j])]) >= eps);
    CHECK(covering_radius(c, net) < eps);
    auto net2 = extract_epsnet(c, {eps, 1234});
    CHECK(net == net2);
    auto net3 = extract_epsnet(c, {eps, 77});
    CHECK(covering_radius(c, net3) < eps);
}

TEST_CASE("epsnet input validation") {
    PointCloud empty;
    CHECK_THROWS_AS(extract_epsnet(empty, {0.5, 0}), std::invalid_argument);
    auto c = generate_space(SpaceKind::interval, 2, 1.0);
    CHECK_THROWS_AS(extract_epsnet(c, {0.0, 0}), std::invalid_argument);
}
