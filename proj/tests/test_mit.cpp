#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mesogrow/mit.hpp"
#include "mesogrow/spatial.hpp"

using namespace mesogrow;

namespace {

/// 1-d radial reference for diffusion outside a fixed circle of radius r0
/// with u(r0) = 0, far field u0: fine finite differences in (r, t).
std::vector<double> radial_reference(double r0, double u0, double t_final, double r_max,
                                     double dr, std::vector<double>& r_out)
{
    int n = static_cast<int>(std::lround((r_max - r0) / dr));
    r_out.resize(static_cast<std::size_t>(n) + 1);
    std::vector<double> u(static_cast<std::size_t>(n) + 1, u0);
    for (int i = 0; i <= n; ++i) r_out[static_cast<std::size_t>(i)] = r0 + i * dr;
    u[0] = 0.0;
    double dt = 0.2 * dr * dr;
    int steps = static_cast<int>(std::ceil(t_final / dt));
    dt = t_final / steps;
    std::vector<double> next = u;
    for (int s = 0; s < steps; ++s) {
        for (int i = 1; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            double r = r_out[ui];
            double lap = (u[ui + 1] - 2 * u[ui] + u[ui - 1]) / (dr * dr) +
                         (u[ui + 1] - u[ui - 1]) / (2 * dr * r);
            next[ui] = u[ui] + dt * lap;
        }
        u.swap(next);
    }
    return u;
}

double interp1(const std::vector<double>& x, const std::vector<double>& y, double xi)
{
    auto it = std::upper_bound(x.begin(), x.end(), xi);
    std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it));
    if (i == 0) return y.front();
    if (i >= x.size()) return y.back();
    double f = (xi - x[i - 1]) / (x[i] - x[i - 1]);
    return (1 - f) * y[i - 1] + f * y[i];
}

} // namespace

TEST_CASE("diffusion around a fixed envelope matches the radial reference")
{
    SimConfig cfg;
    cfg.t_end = 1.0;
    mit::Simulation sim(cfg);
    const int steps = 100;
    for (int s = 0; s < steps; ++s)
        sim.diffusion_step(); // envelope never moves
    double t = steps * cfg.dt;

    std::vector<double> r_ref;
    std::vector<double> u_ref = radial_reference(cfg.r0, cfg.u0, t, 3.0, 0.002, r_ref);

    const auto& nodes = sim.nodes();
    const auto& u = sim.concentration();
    double worst = 0.0;
    int checked = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes.roles[i] != spatial::NodeRole::interior) continue;
        double r = nodes.positions[i].norm();
        if (r < 0.3 || r > 1.2) continue;
        worst = std::max(worst, std::abs(u[i] - interp1(r_ref, u_ref, r)));
        ++checked;
    }
    CHECK(checked > 100);
    CHECK(worst < 0.015); // truncation-level agreement for m = 2 at h = 0.1
}

TEST_CASE("short growth run: invariants, determinism, artifacts of the driver")
{
    SimConfig cfg;
    cfg.isotropic = true;
    cfg.t_end = 150 * cfg.dt;
    mit::Simulation sim(cfg);
    double last_tip = sim.metrics().tip_x;
    CHECK(last_tip == doctest::Approx(cfg.r0).epsilon(1e-6));
    while (!sim.stopped()) {
        sim.advance();
        const mit::StepMetrics& m = sim.metrics();
        CHECK(m.tip_x >= last_tip); // outward-only growth
        last_tip = m.tip_x;
        for (double v : sim.concentration()) {
            // non-monotone stencils overshoot the far-field plateau slightly
            CHECK(v >= -0.05 * cfg.u0);
            CHECK(v <= 1.05 * cfg.u0);
        }
    }
    CHECK(sim.stop_reason() == "t_end");
    CHECK(sim.step() == 150);

    // ledger-triggered re-discretization has happened by now (the envelope
    // moved > h_e/2) and respaced the envelope at ~h_e
    const envelope::Grain& g = sim.grains().front();
    bool all_spaced = true;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        double gap = dist(g.nodes[i], g.nodes[(i + 1) % g.nodes.size()]);
        if (gap < 0.6 * cfg.h_e || gap > 1.4 * cfg.h_e) all_spaced = false;
    }
    CHECK(all_spaced);

    // interior nodes keep a clear margin to the envelope after removals
    spatial::KDTree env_tree(g.nodes);
    const auto& nodes = sim.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes.roles[i] != spatial::NodeRole::interior) continue;
        double d = dist(nodes.positions[i], env_tree.point(env_tree.nearest(nodes.positions[i])));
        CHECK(d > 0.5 * cfg.h_e);
        CHECK(!g.curve.is_inside(nodes.positions[i]));
    }

    // a second simulation with the same config reproduces the history exactly
    mit::Simulation sim2(cfg);
    while (!sim2.stopped())
        sim2.advance();
    REQUIRE(sim2.metrics_history().size() == sim.metrics_history().size());
    for (std::size_t s = 0; s < sim.metrics_history().size(); ++s) {
        CHECK(sim.metrics_history()[s].tip_x == sim2.metrics_history()[s].tip_x);
        CHECK(sim.metrics_history()[s].n_total == sim2.metrics_history()[s].n_total);
    }
}

TEST_CASE("forced re-discretization preserves the concentration field")
{
    SimConfig cfg;
    cfg.isotropic = true;
    cfg.t_end = 1.0;
    mit::Simulation sim(cfg);
    for (int s = 0; s < 30; ++s)
        sim.advance();

    // sample the field at fixed probes before and after
    spatial::KDTree before_tree(sim.nodes().positions);
    std::vector<double> before_u = sim.concentration();
    sim.force_rediscretization();
    const auto& nodes = sim.nodes();
    const auto& after_u = sim.concentration();
    double worst = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes.roles[i] != spatial::NodeRole::interior) continue;
        int j = before_tree.nearest(nodes.positions[i]);
        double d = dist(nodes.positions[i], before_tree.point(j));
        if (d > 0.02) continue; // only compare near-coincident nodes
        worst = std::max(worst, std::abs(after_u[i] - before_u[static_cast<std::size_t>(j)]));
    }
    CHECK(worst < 5e-3);
    for (double v : after_u) {
        CHECK(v >= 0.0);
        CHECK(v <= cfg.u0 + 1e-12);
    }
}

TEST_CASE("a crude time step triggers divergence detection")
{
    SimConfig cfg;
    cfg.dt = 5e-3; // far beyond the explicit stability limit at h = 0.1
    cfg.t_end = 1.0;
    mit::Simulation sim(cfg);
    CHECK_THROWS_AS(
        [&] {
            for (int s = 0; s < 2000; ++s)
                sim.advance();
        }(),
        mit::DivergenceError);
}
