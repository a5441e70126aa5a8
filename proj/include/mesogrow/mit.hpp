#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mesogrow/envelope.hpp"
#include "mesogrow/gem.hpp"
#include "mesogrow/rbffd.hpp"
#include "mesogrow/sim_config.hpp"
#include "mesogrow/spatial.hpp"

namespace mesogrow::mit {

struct StepMetrics {
    long step = 0;
    double t = 0.0;
    double tip_x = 0.0;        // max envelope x over all grains
    double tip_velocity = 0.0; // centered difference over a 20-step window
    double envelope_length = 0.0;
    std::size_t n_total = 0;
    std::size_t n_envelope = 0;
    double max_speed = 0.0;
};

struct PhaseTimings {
    double weights = 0.0;
    double diffusion = 0.0;
    double propagation = 0.0;
    double rediscretization = 0.0;
};

/// Thrown when the explicit scheme blows up; carries step and node index.
struct DivergenceError : std::runtime_error {
    long step;
    int node;
    DivergenceError(long step_, int node_)
        : std::runtime_error("divergence at step " + std::to_string(step_) +
                             ", node " + std::to_string(node_)),
          step(step_), node(node_) {}
};

/// The meshless interface-tracking driver: explicit diffusion on scattered
/// nodes, envelope propagation by the GEM kinetics, cumulative-displacement
/// re-discretization and node removal near the moving boundary.
class Simulation {
public:
    explicit Simulation(SimConfig config);
    ~Simulation();
    Simulation(Simulation&&) noexcept;

    void advance(); // one full step of the main loop
    bool stopped() const;
    const std::string& stop_reason() const;

    long step() const;
    double time() const;
    const SimConfig& config() const;
    const spatial::NodeSet& nodes() const;
    const std::vector<double>& concentration() const;
    const std::vector<envelope::Grain>& grains() const;
    StepMetrics metrics() const;
    const std::vector<StepMetrics>& metrics_history() const;
    const PhaseTimings& timings() const;

    // exposed for targeted tests
    void diffusion_step();
    void force_rediscretization();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct RunResult {
    std::string stop_reason;
    bool diverged = false;
    long steps = 0;
    double t_final = 0.0;
    double wall_seconds = 0.0;
};

/// Runs a simulation to completion, writing nodes_<t>.csv and
/// envelope_<grain>_<t>.csv at the requested snapshot times (dt-quantized),
/// metrics.csv and run.json under out_dir. On divergence the partial
/// artifacts and a failure record are kept.
RunResult run(const SimConfig& config, const std::string& out_dir);

} // namespace mesogrow::mit
