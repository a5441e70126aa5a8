#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mesogrow/gem.hpp"
#include "mesogrow/geometry.hpp"
#include "mesogrow/mit.hpp"
#include "mesogrow/sim_config.hpp"

namespace mesogrow::pfic {

/// Uniform fixed grid over [-L/2, L/2]^2 carrying the phase field phi
/// (1 = grain, 0 = liquid) and the concentration u.
struct PhaseGrid {
    int n = 0;       // points per side
    double h = 0.0;  // grid spacing
    double half = 0.0;
    double w_phi = 0.0;
    double b = 0.0;
    double phi_env = 0.95;
    std::vector<double> phi;
    std::vector<double> u;

    int id(int i, int j) const { return j * n + i; }
    Vec2 pos(int i, int j) const { return {-half + i * h, -half + j * h}; }
    double& phi_at(int i, int j) { return phi[static_cast<std::size_t>(id(i, j))]; }
    double phi_at(int i, int j) const { return phi[static_cast<std::size_t>(id(i, j))]; }

    static PhaseGrid create(const SimConfig& config);
};

/// phi(x) = 0.5 [1 - tanh(sd(x) / (2 W_phi))], sd negative inside the grain.
void init_phase(PhaseGrid& grid, const std::function<double(const Vec2&)>& signed_distance);

/// Ordered closed polyline of marker points on the phi = phi_env level set.
struct MarkerFront {
    std::vector<Vec2> markers;
};

/// Marching-squares crossings at phi_env, ordered into a closed polyline.
/// Throws "no front" when the level set is empty.
MarkerFront reconstruct_front(const PhaseGrid& grid);

/// Envelope-speed scalar field: nonzero where |grad phi| is non-negligible,
/// built from the closest marker, the phase-field normal and the GEM
/// kinetics at the stagnant-film point.
std::vector<double> speed_field(const PhaseGrid& grid, const MarkerFront& front,
                                const gem::GemParams& params,
                                const gem::GrowthDirections& dirs, bool isotropic);

/// One explicit update of the stabilized phase advection equation.
/// Throws "phase CFL" when max|v_n| dt / h > 0.5.
void phase_step(PhaseGrid& grid, const std::vector<double>& speed, double dt);

/// Explicit diffusion step on the grid: u = 0 where phi >= phi_env,
/// zero-flux outer boundary.
void diffusion_step(PhaseGrid& grid, double dt);

/// Full PFIC run with the same artifact layout as the MIT runner plus
/// phi_<t>.csv grid dumps.
mit::RunResult run(const SimConfig& config, const std::string& out_dir);

} // namespace mesogrow::pfic
