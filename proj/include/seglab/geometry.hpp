#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seglab/errors.hpp"

namespace seglab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Index pair of a lattice node.
struct Node {
    int i = 0;
    int j = 0;
    friend bool operator==(const Node&, const Node&) = default;
};

/// Uniform Cartesian lattice. Node (i, j) sits at origin + (i*h, j*h), computed per node.
class Grid {
public:
    Grid() = default;
    Grid(int nx, int ny, double h, Point origin) : nx_(nx), ny_(ny), h_(h), origin_(origin) {
        if (!(h > 0.0) || !std::isfinite(h))
            throw InvalidArgument("grid spacing must be positive and finite");
        if (nx < 3 || ny < 3)
            throw InvalidArgument("grid needs at least 3 nodes per axis");
    }

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    double h() const noexcept { return h_; }
    Point origin() const noexcept { return origin_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }

    double x(int i) const noexcept { return origin_.x + i * h_; }
    double y(int j) const noexcept { return origin_.y + j * h_; }
    Point position(int i, int j) const noexcept { return {x(i), y(j)}; }
    Point position(Node n) const noexcept { return position(n.i, n.j); }

    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i);
    }
    std::size_t index(Node n) const noexcept { return index(n.i, n.j); }
    Node node(std::size_t idx) const noexcept {
        return {static_cast<int>(idx % nx_), static_cast<int>(idx / nx_)};
    }
    bool contains(int i, int j) const noexcept { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.h_ == b.h_ && a.origin_.x == b.origin_.x &&
               a.origin_.y == b.origin_.y;
    }

private:
    int nx_ = 0;
    int ny_ = 0;
    double h_ = 0.0;
    Point origin_{};
};

enum class NodeClass : std::uint8_t { Interior, Boundary, Exterior };

inline const char* to_string(NodeClass c) {
    switch (c) {
    case NodeClass::Interior: return "interior";
    case NodeClass::Boundary: return "boundary";
    case NodeClass::Exterior: return "exterior";
    }
    return "?";
}

/// Classification of every node of a grid that carves a disk out of the bounding square.
///
/// Interior nodes lie strictly inside the disk. Boundary nodes are the non-interior nodes
/// touching an interior node through any of the 8 lattice neighbours, so the full 3x3
/// stencil around an interior node never reads an exterior node.
class DomainMask {
public:
    DomainMask() = default;
    DomainMask(Grid grid, Point center, double radius, std::vector<NodeClass> classes)
        : grid_(grid), center_(center), radius_(radius), classes_(std::move(classes)) {
        if (classes_.size() != grid_.size())
            throw InvalidArgument("mask size does not match grid");
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            if (classes_[k] == NodeClass::Interior) interior_.push_back(k);
            if (classes_[k] == NodeClass::Boundary) boundary_.push_back(k);
        }
        for (std::size_t k : interior_)
            if (stencil_complete(k)) complete_.push_back(k);
    }

    const Grid& grid() const noexcept { return grid_; }
    Point center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }

    NodeClass at(std::size_t idx) const { return classes_[idx]; }
    NodeClass at(int i, int j) const {
        return grid_.contains(i, j) ? classes_[grid_.index(i, j)] : NodeClass::Exterior;
    }
    bool is_interior(std::size_t idx) const { return classes_[idx] == NodeClass::Interior; }
    bool is_boundary(std::size_t idx) const { return classes_[idx] == NodeClass::Boundary; }
    bool is_active(std::size_t idx) const { return classes_[idx] != NodeClass::Exterior; }

    std::span<const std::size_t> interior_nodes() const noexcept { return interior_; }
    std::span<const std::size_t> boundary_nodes() const noexcept { return boundary_; }
    std::span<const NodeClass> classes() const noexcept { return classes_; }
    /// Interior nodes whose 3x3 stencil contains no exterior node.
    std::span<const std::size_t> stencil_nodes() const noexcept { return complete_; }

    /// True when all 8 neighbours of an interior node are non-exterior.
    bool stencil_complete(int i, int j) const {
        if (at(i, j) != NodeClass::Interior) return false;
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di)
                if (at(i + di, j + dj) == NodeClass::Exterior) return false;
        return true;
    }
    bool stencil_complete(std::size_t idx) const {
        Node n = grid_.node(idx);
        return stencil_complete(n.i, n.j);
    }

    /// Polar angle of a node about the disk center, in (-pi, pi].
    double angle(std::size_t idx) const {
        Point p = grid_.position(grid_.node(idx));
        return std::atan2(p.y - center_.y, p.x - center_.x);
    }

private:
    Grid grid_{};
    Point center_{};
    double radius_ = 0.0;
    std::vector<NodeClass> classes_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> boundary_;
    std::vector<std::size_t> complete_;
};

/// One finite real per grid node. Exterior nodes hold 0 when built through `sample`.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& grid, double value = 0.0)
        : grid_(grid), values_(grid.size(), value) {}
    ScalarField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw InvalidArgument("field size does not match grid");
    }

    /// Evaluates `fn` at every non-exterior node; exterior nodes are set to 0.
    template <class Fn>
    static ScalarField sample(const DomainMask& mask, Fn&& fn) {
        const Grid& g = mask.grid();
        ScalarField f(g);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (mask.is_active(k)) f.values_[k] = fn(g.position(g.node(k)));
        return f;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator[](std::size_t idx) { return values_[idx]; }
    double operator[](std::size_t idx) const { return values_[idx]; }
    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double max() const { return *std::max_element(values_.begin(), values_.end()); }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    Grid grid_{};
    std::vector<double> values_;
};

inline double max_abs_difference(const ScalarField& a, const ScalarField& b) {
    if (a.size() != b.size()) throw InvalidArgument("fields live on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

/// Dirichlet data of one population on an arc of the disk boundary.
struct BoundarySegment {
    double theta0 = 0.0; ///< radians
    double theta1 = 0.0; ///< radians, theta0 < theta1 <= theta0 + 2pi
    double amplitude = 1.0;
    int population = 0;
};

/// Strict enforces h < radius/4. Coarse only requires at least one interior node; it exists
/// for hand-checkable toy lattices.
enum class Sizing : std::uint8_t { Strict, Coarse };

/// Builds the disk of `radius` about `center` on the smallest square lattice containing
/// every interior node and its neighbours.
inline DomainMask build_disk_domain(double radius, double h, Point center = {}, Sizing sizing = Sizing::Strict) {
    if (!(radius > 0.0) || !(h > 0.0))
        throw SizingError("radius and spacing must be positive");
    if (sizing == Sizing::Strict && !(h < radius / 4.0))
        throw SizingError("spacing " + std::to_string(h) + " too coarse for radius " +
                          std::to_string(radius) + " (need h < radius/4)");

    const int half = static_cast<int>(std::ceil(radius / h - 1e-12));
    const int n = 2 * half + 1;
    Grid grid(n, n, h, {center.x - half * h, center.y - half * h});

    std::vector<NodeClass> cls(grid.size(), NodeClass::Exterior);
    const double r2 = radius * radius;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double dx = (i - half) * h;
            const double dy = (j - half) * h;
            if (dx * dx + dy * dy < r2) cls[grid.index(i, j)] = NodeClass::Interior;
        }

    std::vector<NodeClass> out = cls;
    bool any_interior = false;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (cls[grid.index(i, j)] == NodeClass::Interior) {
                any_interior = true;
                continue;
            }
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (grid.contains(i + di, j + dj) &&
                        cls[grid.index(i + di, j + dj)] == NodeClass::Interior)
                        out[grid.index(i, j)] = NodeClass::Boundary;
        }
    if (!any_interior) throw SizingError("no interior node at this spacing");
    return DomainMask(grid, center, radius, std::move(out));
}

namespace detail {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Offset of `theta` past `start`, reduced to [0, 2pi).
inline double arc_offset(double theta, double start) {
    double d = std::fmod(theta - start, two_pi);
    if (d < 0.0) d += two_pi;
    return d;
}

inline bool arcs_overlap(const BoundarySegment& a, const BoundarySegment& b) {
    constexpr double tol = 1e-12;
    const double wa = a.theta1 - a.theta0;
    const double wb = b.theta1 - b.theta0;
    const double ab = arc_offset(b.theta0, a.theta0);
    const double ba = arc_offset(a.theta0, b.theta0);
    return ab < wa - tol || ba < wb - tol;
}

} // namespace detail

/// cos^2 bump of `seg` at polar angle `theta`; exactly 0 outside the open arc.
inline double segment_profile(const BoundarySegment& seg, double theta) {
    const double width = seg.theta1 - seg.theta0;
    const double d = detail::arc_offset(theta, seg.theta0);
    if (!(d > 0.0) || !(d < width)) return 0.0;
    const double c = std::cos(std::numbers::pi * (d - 0.5 * width) / width);
    return seg.amplitude * c * c;
}

/// Dirichlet data per population, sampled at boundary nodes by their polar angle. Interior
/// and exterior nodes hold 0. `exponent` is the nominal Holder exponent of the data; the
/// cos^2 profile is C^1, so it is validated and otherwise unused.
inline std::vector<ScalarField> build_boundary_data(const DomainMask& mask,
                                                    std::span<const BoundarySegment> segments,
                                                    double exponent = 1.0) {
    if (!(exponent > 0.0 && exponent <= 1.0))
        throw InvalidArgument("Holder exponent must lie in (0, 1]");
    if (segments.empty()) throw InvalidArgument("no boundary segments");
    int count = 0;
    for (const auto& s : segments) {
        if (s.population < 0) throw InvalidArgument("negative population index");
        if (!(s.amplitude >= 0.0) || !std::isfinite(s.amplitude))
            throw InvalidArgument("segment amplitude must be finite and >= 0");
        const double w = s.theta1 - s.theta0;
        if (!(w > 0.0) || w > detail::two_pi + 1e-12)
            throw InvalidArgument("segment arc must satisfy theta0 < theta1 <= theta0 + 2pi");
        count = std::max(count, s.population + 1);
    }
    for (std::size_t a = 0; a < segments.size(); ++a)
        for (std::size_t b = a + 1; b < segments.size(); ++b)
            if (segments[a].population != segments[b].population &&
                detail::arcs_overlap(segments[a], segments[b]))
                throw InvalidArgument("arcs of populations " + std::to_string(segments[a].population) +
                                      " and " + std::to_string(segments[b].population) + " overlap");

    std::vector<ScalarField> phi(count, ScalarField(mask.grid()));
    for (std::size_t k : mask.boundary_nodes()) {
        const double theta = mask.angle(k);
        for (const auto& s : segments)
            phi[s.population][k] = std::max(phi[s.population][k], segment_profile(s, theta));
    }
    return phi;
}

/// Calls `fn(idx)` for every non-exterior node in the closed ball.
template <class Fn>
void for_each_in_ball(const DomainMask& mask, Point center, double radius, Fn&& fn) {
    const Grid& g = mask.grid();
    const double h = g.h();
    const double r2 = radius * radius + 1e-9 * h * h;
    const int i0 = std::max(0, static_cast<int>(std::floor((center.x - radius - g.origin().x) / h)));
    const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((center.x + radius - g.origin().x) / h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((center.y - radius - g.origin().y) / h)));
    const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((center.y + radius - g.origin().y) / h)));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const std::size_t idx = g.index(i, j);
            if (!mask.is_active(idx)) continue;
            const double dx = g.x(i) - center.x;
            const double dy = g.y(j) - center.y;
            if (dx * dx + dy * dy <= r2) fn(idx);
        }
}

/// max - min of `field` over the non-exterior nodes of the closed ball.
inline double oscillation(const ScalarField& field, const DomainMask& mask, Point center, double radius) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for_each_in_ball(mask, center, radius, [&](std::size_t k) {
        lo = std::min(lo, field[k]);
        hi = std::max(hi, field[k]);
    });
    if (lo > hi) throw InvalidArgument("ball contains no domain node");
    return hi - lo;
}

} // namespace seglab
