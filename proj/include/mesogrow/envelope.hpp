#pragma once

#include <string>
#include <vector>

#include "mesogrow/geometry.hpp"

namespace mesogrow::envelope {

/// Closed periodic B-spline of degree k in {1,2,3,4} interpolating an ordered
/// point cycle, chord-length parametrized over [0, T). Normals are oriented
/// outward once calibrate_orientation() has run (fit_spline does this).
class ParametricCurve {
public:
    ParametricCurve() = default;

    int degree() const { return degree_; }
    double period() const { return period_; }
    int node_count() const { return static_cast<int>(params_.size()); }

    /// Parameter of the i-th interpolated point.
    double node_param(int i) const { return params_[static_cast<std::size_t>(i)]; }

    Vec2 eval(double t) const;
    Vec2 derivative(double t, int order = 1) const;

    /// Outward unit normal at parameter t. Throws "irregular point" when the
    /// tangent vanishes.
    Vec2 normal_at(double t) const;

    /// Parameter minimizing |x - gamma(t)|: dense scan plus local refinement.
    double closest_param(const Vec2& x) const;

    /// Inside test via the sign of <x - gamma(t_min), c n(t_min)>. Points on
    /// the curve report false.
    bool is_inside(const Vec2& x) const;

    /// Polygonal length over 5000 uniform parameter samples.
    double length() const;

    /// Fixes the orientation constant so normals point away from the given
    /// interior witness point.
    void calibrate_orientation(const Vec2& interior_witness);

    int orientation() const { return orient_; }

    /// Snapshot of (t, x, y, n_x, n_y) at uniform parameters.
    void write_csv(const std::string& path, int samples = 1000) const;

    friend ParametricCurve fit_spline(const std::vector<Vec2>& ordered_points, int k);

private:
    int degree_ = 0;
    double period_ = 0.0;
    int orient_ = 1; // +1/-1, Eq.-of-orientation constant c
    std::vector<double> params_; // chord-length parameters of the data points
    std::vector<double> knots_;  // base knots, one per control point
    std::vector<Vec2> ctrl_;     // periodic control points

    double knot(int j) const; // periodically extended knot access
    Vec2 ctrl(int j) const;
    void basis(double t, int span, double* out, int nderiv) const;
    int find_span(double t) const;
};

/// Nearest-neighbor chaining order of an unordered dense sample of a Jordan
/// curve. The returned permutation is normalized so the enclosed signed area
/// is positive (counter-clockwise). Throws "degenerate boundary" for < 3
/// points.
std::vector<int> order_nodes(const std::vector<Vec2>& points);

/// Periodic interpolating spline through the ordered cycle, chord-length
/// parametrized, with outward-calibrated normals. Throws "coincident nodes"
/// on duplicate consecutive points.
ParametricCurve fit_spline(const std::vector<Vec2>& ordered_points, int k);

struct ShapeMetrics {
    double mean_radius = 0.0;
    double min_radius = 0.0;
    double max_radius = 0.0;
    double max_angle_distortion = 0.0; // radians, signed extrema of
    double min_angle_distortion = 0.0; // theta(n) - theta(x - center)
};

/// Radius statistics and normal-angle distortion of the curve's data nodes
/// about a center (the isotropic-growth verification metrics).
ShapeMetrics shape_metrics(const ParametricCurve& curve, const Vec2& center);

/// One grain envelope: ordered boundary nodes, their fitted curve, the
/// orientation of the growth directions and the cumulative displacement
/// ledger used by the re-discretization criterion.
struct Grain {
    std::vector<Vec2> nodes;       // ordered along the curve
    ParametricCurve curve;         // fitted to `nodes`
    double orientation = 0.0;      // rotation of the four growth directions
    std::vector<double> cumulative_displacement;

    Vec2 centroid() const;
    void refit(int spline_degree);
    void reset_ledger() { cumulative_displacement.assign(nodes.size(), 0.0); }
};

} // namespace mesogrow::envelope
