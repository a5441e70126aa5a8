#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mesogrow/geometry.hpp"
#include "mesogrow/kdtree.hpp"

namespace mesogrow::envelope {
class ParametricCurve;
}

namespace mesogrow::spatial {

enum class NodeRole { interior, envelope, outer };

std::string role_name(NodeRole r);
NodeRole role_from_name(const std::string& s);

/// Scattered discretization nodes with role tags and per-node target spacing.
/// grain_id is set iff role == envelope.
struct NodeSet {
    std::vector<Vec2> positions;
    std::vector<NodeRole> roles;
    std::vector<int> grain_id; // -1 when not an envelope node
    std::vector<double> spacing;

    std::size_t size() const { return positions.size(); }

    void add(const Vec2& p, NodeRole role, double h, int grain = -1) {
        positions.push_back(p);
        roles.push_back(role);
        grain_id.push_back(role == NodeRole::envelope ? grain : -1);
        spacing.push_back(h);
    }

    void write_csv(const std::string& path) const;
    static NodeSet read_csv(const std::string& path);
};

struct SpacingParams {
    double h_e = 0.1; // spacing on grain envelopes
    double h_l = 0.1; // spacing on the outer liquid boundary
};

/// Outer liquid boundary: axis-aligned square of side L or circle of
/// diameter L, both centered at the origin.
class OuterBoundary {
public:
    enum class Shape { square, circle };

    OuterBoundary(Shape shape, double side) : shape_(shape), half_(side / 2) {}

    Shape shape() const { return shape_; }
    double side() const { return 2 * half_; }

    bool inside(const Vec2& x) const {
        if (shape_ == Shape::circle) return x.norm() < half_;
        return std::abs(x.x) < half_ && std::abs(x.y) < half_;
    }

    Vec2 closest_point(const Vec2& x) const;
    Vec2 outward_normal(const Vec2& x) const;

    /// Boundary nodes at approximately uniform spacing h.
    std::vector<Vec2> discretize(double h) const;

private:
    Shape shape_;
    double half_;
};

/// Internodal spacing: h_e on the envelope, h_l on the outer boundary and a
/// linear blend in between, driven by the distance to the nearest envelope
/// node relative to the envelope-to-outer-boundary distance. Clamped to
/// [h_e, h_l].
class SpacingField {
public:
    SpacingField(std::vector<Vec2> envelope_nodes, std::vector<Vec2> outer_nodes,
                 SpacingParams params);

    double operator()(const Vec2& x) const;

    const SpacingParams& params() const { return params_; }

private:
    KDTree envelope_tree_;
    KDTree outer_tree_;
    SpacingParams params_;
};

/// Direct evaluation of the graded spacing at x given the boundary node sets.
double spacing_at(const Vec2& x, const std::vector<Vec2>& envelope_nodes,
                  const std::vector<Vec2>& outer_nodes, const SpacingParams& params);

using SpacingFn = std::function<double(const Vec2&)>;
using InsideFn = std::function<bool(const Vec2&)>;

struct FillOptions {
    int candidates = 6;          // candidates per expansion circle
    double reject_factor = 0.97; // proximity rejection radius, in units of local h
};

/// Advancing-front fill: expands every seed node by candidate points on a
/// circle of radius h(x), rejecting candidates outside the domain or too
/// close to accepted nodes. Returns seeds plus generated interior nodes.
/// Deterministic for a fixed seed ordering.
NodeSet fill_domain(const NodeSet& seeds, const SpacingFn& spacing,
                    const InsideFn& inside, const FillOptions& opts = {});

/// Surface DIVG: points along a closed parametric curve with consecutive
/// arc-length gaps tracking the local target spacing. At least 3 points are
/// produced for any closed curve.
std::vector<Vec2> discretize_curve(const envelope::ParametricCurve& curve,
                                   const SpacingFn& spacing);

/// Brute-force minimum-separation check: min over pairs of
/// |x_i - x_j| / min(h_i, h_j). Used by tests and sanity asserts.
double min_separation_factor(const NodeSet& nodes);

} // namespace mesogrow::spatial
