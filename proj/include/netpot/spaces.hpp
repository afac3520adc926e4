#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace netpot {

enum class SpaceKind { interval, lattice2d, carpet, gasket };

inline const char* space_kind_name(SpaceKind k) {
    switch (k) {
        case SpaceKind::interval: return "interval";
        case SpaceKind::lattice2d: return "lattice2d";
        case SpaceKind::carpet: return "carpet";
        case SpaceKind::gasket: return "gasket";
    }
    return "?";
}

inline SpaceKind space_kind_from_name(const std::string& s) {
    if (s == "interval") return SpaceKind::interval;
    if (s == "lattice2d") return SpaceKind::lattice2d;
    if (s == "carpet") return SpaceKind::carpet;
    if (s == "gasket") return SpaceKind::gasket;
    throw std::invalid_argument("unknown space kind: " + s);
}

// Finite point cloud standing in for the space X. Interval points live on
// the x axis; everything is scaled into [0, scale]^2.
struct PointCloud {
    SpaceKind kind = SpaceKind::carpet;
    int level = 0;
    double scale = 1.0;
    double d_h = 0.0;  // Hausdorff dimension of the kind
    std::vector<std::array<double, 2>> points;

    std::size_t size() const { return points.size(); }
};

inline double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

inline PointCloud generate_space(SpaceKind kind, int level, double scale,
                                 std::size_t max_points = 1000000) {
    if (level < 0) throw std::invalid_argument("generate_space: level < 0");
    if (!(scale > 0.0)) throw std::invalid_argument("generate_space: scale <= 0");
    PointCloud c;
    c.kind = kind;
    c.level = level;
    c.scale = scale;
    switch (kind) {
        case SpaceKind::interval: {
            c.d_h = 1.0;
            const std::size_t n = static_cast<std::size_t>(level) + 1;
            if (n > max_points) throw std::runtime_error("generate_space: point cap exceeded");
            c.points.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                c.points.push_back({level == 0 ? 0.0 : scale * double(i) / double(level), 0.0});
            break;
        }
        case SpaceKind::lattice2d: {
            c.d_h = 2.0;
            if (level < 1) throw std::invalid_argument("lattice2d: need box side >= 1");
            const std::size_t k = static_cast<std::size_t>(level);
            if ((k + 1) * (k + 1) > max_points)
                throw std::runtime_error("generate_space: point cap exceeded");
            for (std::size_t j = 0; j <= k; ++j)
                for (std::size_t i = 0; i <= k; ++i)
                    c.points.push_back({scale * double(i) / double(k),
                                        scale * double(j) / double(k)});
            break;
        }
        case SpaceKind::carpet: {
            c.d_h = std::log(8.0) / std::log(3.0);
            double np = std::pow(8.0, level);
            if (np > double(max_points)) throw std::runtime_error("generate_space: point cap exceeded");
            // Cell (i, j) at level n survives iff no base-3 digit position has
            // digit 1 in both i and j.
            std::int64_t side = 1;
            for (int l = 0; l < level; ++l) side *= 3;
            const double h = scale / double(side);
            for (std::int64_t j = 0; j < side; ++j) {
                for (std::int64_t i = 0; i < side; ++i) {
                    std::int64_t a = i, b = j;
                    bool keep = true;
                    while (a > 0 || b > 0) {
                        if (a % 3 == 1 && b % 3 == 1) { keep = false; break; }
                        a /= 3; b /= 3;
                    }
                    if (keep)
                        c.points.push_back({(double(i) + 0.5) * h, (double(j) + 0.5) * h});
                }
            }
            break;
        }
        case SpaceKind::gasket: {
            c.d_h = std::log(3.0) / std::log(2.0);
            double np = std::pow(3.0, level);
            if (np > double(max_points)) throw std::runtime_error("generate_space: point cap exceeded");
            // Centroids of the 3^level retained upward triangles.
            const double s3 = std::sqrt(3.0);
            std::vector<std::array<double, 2>> origins{{0.0, 0.0}};
            double side = scale;
            for (int l = 0; l < level; ++l) {
                side *= 0.5;
                std::vector<std::array<double, 2>> next;
                next.reserve(origins.size() * 3);
                for (auto& o : origins) {
                    next.push_back(o);
                    next.push_back({o[0] + side, o[1]});
                    next.push_back({o[0] + 0.5 * side, o[1] + 0.5 * side * s3});
                }
                origins = std::move(next);
            }
            for (auto& o : origins)
                c.points.push_back({o[0] + 0.5 * side, o[1] + side * s3 / 6.0});
            break;
        }
    }
    return c;
}

// Greedy scan order for the epsilon-net. seed = 0 keeps cloud order.
struct NetSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {
// Uniform-grid index over the cloud for radius queries.
struct GridIndex {
    double cell = 1.0;
    std::unordered_map<std::uint64_t, std::vector<int>> cells;

    static std::uint64_t key(std::int32_t cx, std::int32_t cy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
               static_cast<std::uint32_t>(cy);
    }
    void insert(const std::array<double, 2>& p, int id) {
        cells[key(std::int32_t(std::floor(p[0] / cell)),
                  std::int32_t(std::floor(p[1] / cell)))].push_back(id);
    }
    template <class F>
    void for_near(const std::array<double, 2>& p, int ring, F&& f) const {
        const std::int32_t cx = std::int32_t(std::floor(p[0] / cell));
        const std::int32_t cy = std::int32_t(std::floor(p[1] / cell));
        for (std::int32_t dx = -ring; dx <= ring; ++dx)
            for (std::int32_t dy = -ring; dy <= ring; ++dy) {
                auto it = cells.find(key(cx + dx, cy + dy));
                if (it == cells.end()) continue;
                for (int id : it->second) f(id);
            }
    }
};
}  // namespace detail

// Greedy maximal eps-separated subset of the cloud, scanned in seed order.
// Maximality makes the result an eps-net of the cloud: every cloud point is
// within distance < eps of some net point.
inline std::vector<int> extract_epsnet(const PointCloud& cloud, const NetSpec& spec) {
    if (cloud.points.empty()) throw std::invalid_argument("extract_epsnet: empty cloud");
    if (!(spec.epsilon > 0.0)) throw std::invalid_argument("extract_epsnet: epsilon <= 0");
    std::vector<int> order(cloud.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    if (spec.seed != 0) {
        std::mt19937_64 rng(spec.seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    detail::GridIndex grid;
    grid.cell = spec.epsilon;
    std::vector<int> net;
    for (int id : order) {
        const auto& p = cloud.points[id];
        bool ok = true;
        grid.for_near(p, 1, [&](int other) {
            if (ok && dist2d(p, cloud.points[other]) < spec.epsilon) ok = false;
        });
        if (ok) {
            grid.insert(p, id);
            net.push_back(id);
        }
    }
    std::sort(net.begin(), net.end());
    return net;
}

// Largest cloud-point distance to the net (always < eps by maximality).
inline double covering_radius(const PointCloud& cloud, const std::vector<int>& net) {
    double worst = 0.0;
    for (const auto& p : cloud.points) {
        double best = std::numeric_limits<double>::infinity();
        for (int id : net) best = std::min(best, dist2d(p, cloud.points[id]));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace netpot
