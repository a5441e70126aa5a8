#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mesogrow/geometry.hpp"
#include "mesogrow/spatial.hpp"

namespace mesogrow {

struct GrainSeed {
    Vec2 center;
    double orientation = 0.0;
};

/// Shared configuration for the MIT driver and the PFIC baseline. Mirrors
/// the flat `key = value` config-file format (see parse_config_file).
struct SimConfig {
    double L = 20.0;       // outer box side (square) or diameter (circle)
    double r0 = 0.22239;   // initial envelope radius
    double u0 = 0.18;      // initial supersaturation
    double delta = 1.0;    // stagnant-film thickness
    double dt = 3e-4;
    double h_e = 0.1;      // envelope node spacing
    double h_l = 0.1;      // outer-boundary node spacing
    int m = 2;             // RBF-FD monomial order, 2 or 4
    int k = 2;             // spline degree, 1..4
    double tip_stop = 8.9; // stop when max tip x reaches this
    long i_max = 200000;   // step cap
    bool isotropic = false;
    spatial::OuterBoundary::Shape domain_shape = spatial::OuterBoundary::Shape::square;
    std::optional<double> t_end;      // stop at simulated time
    std::optional<double> stop_speed; // stop when max envelope speed drops below
    std::vector<GrainSeed> grains = {GrainSeed{{0.0, 0.0}, 0.0}};
    std::vector<double> snapshot_times;

    // PFIC-only knobs; W_phi and b default to h*sqrt(2) and 0.25*h^2/dt when
    // left unset.
    std::optional<double> w_phi;
    std::optional<double> b;
    double phi_env = 0.95;
    int phase_substeps = 1;

    double w_phi_or_default() const { return w_phi ? *w_phi : h_e * std::sqrt(2.0); }
    double b_or_default() const { return b ? *b : 0.25 * h_e * h_e / dt; }

    void validate() const; // throws on inconsistent settings
};

SimConfig parse_config_file(const std::string& path);
SimConfig parse_config_text(const std::string& text);
std::string config_to_text(const SimConfig& c);

} // namespace mesogrow
