#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace maisac {

/// 2D antenna position inside a movable region, in meters.
struct Position2D {
    double x = 0.0;
    double y = 0.0;

    Eigen::Vector2d vec() const { return {x, y}; }
    static Position2D from_vec(const Eigen::Vector2d& v) { return {v.x(), v.y()}; }
};

inline double distance(const Position2D& a, const Position2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Axis-aligned rectangular movable region.
struct Region {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    Region() = default;
    Region(double x0, double x1, double y0, double y1)
        : x_min(x0), x_max(x1), y_min(y0), y_max(y1) {
        if (!(x_min < x_max) || !(y_min < y_max))
            throw std::invalid_argument("Region: min bounds must be strictly below max bounds");
    }

    static Region square(double side) { return Region(0.0, side, 0.0, side); }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }

    bool contains(const Position2D& p, double tol = 0.0) const {
        return p.x >= x_min - tol && p.x <= x_max + tol &&
               p.y >= y_min - tol && p.y <= y_max + tol;
    }

    Position2D clamp(const Position2D& p) const {
        return {std::min(std::max(p.x, x_min), x_max),
                std::min(std::max(p.y, y_min), y_max)};
    }
};

/// Ordered positions of the transmit and receive movable arrays.
struct AntennaLayout {
    std::vector<Position2D> tx;
    std::vector<Position2D> rx;
};

/// Smallest pairwise distance within one array side; +inf for fewer than two antennas.
inline double min_pairwise_distance(const std::vector<Position2D>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, distance(pts[i], pts[j]));
    return best;
}

}  // namespace maisac
