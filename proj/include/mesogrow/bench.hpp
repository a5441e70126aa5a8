#pragma once

#include <string>
#include <vector>

#include "mesogrow/geometry.hpp"
#include "mesogrow/sim_config.hpp"

namespace mesogrow::bench {

/// Sibson's test function cos(4 pi sqrt((x-1/4)^2 + (y-1/4)^2)) on [0,1]^2.
double sibson(const Vec2& x);

struct InterpResult {
    std::string method; // shepard | rbffd | pu
    int n_fit = 0;
    int n = 0; // neighborhood / stencil size
    int m = 0; // monomial order (0 for shepard)
    double rel_l2 = 0.0;
};

/// Interpolation accuracy study on the Sibson function: relative l2 errors
/// over a ~10^5-point regular probe grid for Shepard / RBF-FD / PU across
/// the parameter sweep. Deterministic (Halton-scattered fit points).
std::vector<InterpResult> bench_interpolation(const std::vector<int>& n_fit_list,
                                              const std::vector<int>& n_list,
                                              const std::vector<int>& m_list);

/// Dendrite-tip-like polar test shape R(t) = |cos(1.5 t)|^sin(3 t),
/// r(t) = R(t) (cos t, sin t).
double tip_shape_radius(double t);
Vec2 tip_shape_point(double t);
Vec2 tip_shape_normal(double t); // outward unit normal, analytic

struct ReconResult {
    double h_fit = 0.0;
    int k = 0;
    int n_fit = 0;
    double max_radius_err = 0.0;
    double max_normal_angle_err = 0.0; // radians
};

/// Parametric-reconstruction accuracy study: fit splines of degree k to
/// equally spaced samples of the tip shape and measure max radius and max
/// normal-angle errors on an h_test = 0.005 rediscretization, restricted to
/// the tip arc of interest.
std::vector<ReconResult> bench_reconstruction(const std::vector<double>& h_fit_list,
                                              const std::vector<int>& k_list,
                                              double h_test = 0.005);

struct DtScanRow {
    double dt = 0.0;
    bool diverged = false;
    double mean_radius = 0.0; // at the target time, when stable
};

/// Isotropic-mode time-step scan: mean envelope radius at t_target per dt,
/// or a divergence flag.
std::vector<DtScanRow> scan_dt(const std::vector<double>& dt_list, SimConfig config,
                               double t_target = 4.5);

void write_interp_csv(const std::string& path, const std::vector<InterpResult>& rows);
void write_recon_csv(const std::string& path, const std::vector<ReconResult>& rows);
void write_dtscan_csv(const std::string& path, const std::vector<DtScanRow>& rows);

} // namespace mesogrow::bench
