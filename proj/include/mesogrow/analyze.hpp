#pragma once

#include <string>
#include <vector>

#include "mesogrow/geometry.hpp"

namespace mesogrow::analyze {

struct AnisotropyReport {
    // index 0..2 = quadrants II..IV compared against quadrant I
    std::vector<double> max_abs_error;
    std::vector<double> max_rel_error;
    double e_max = 0.0;         // max over quadrants of the fold distance
    double max_rel = 0.0;       // max over quadrants of fold distance / radius
    double e_max_over_he = 0.0;
};

/// Quadrant-anisotropy analysis of a single centered four-fold envelope.
/// Points must be ordered along the curve. Each point is folded into the
/// first quadrant by a -q*90 degree rotation about the centroid; the error
/// for a pair of quadrants is the symmetric max distance from one folded
/// sub-polyline to the other. Works for non-star-shaped (dendritic) curves
/// where a polar radius function would be multivalued.
AnisotropyReport analyze_anisotropy(const std::vector<Vec2>& envelope_points, double h_e);

/// True when the envelope dips inward (a concave arc) near the first-quadrant
/// diagonal: the morphological center-depression check.
bool has_center_depression(const std::vector<Vec2>& envelope_points);

struct ConvergenceRow {
    std::string method; // mit | pfic
    double h_e = 0.0;
    double tip_x = 0.0;
    double envelope_length = 0.0;
    std::size_t node_count = 0;
};

/// Reads tip position, envelope length and node count from a run directory's
/// metrics stream at the row closest to t_snapshot (last row when t_snapshot
/// is past the end).
ConvergenceRow read_run_summary(const std::string& run_dir, double t_snapshot);

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

} // namespace mesogrow::analyze
