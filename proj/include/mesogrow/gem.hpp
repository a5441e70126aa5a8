#pragma once

#include <functional>
#include <vector>

#include "mesogrow/envelope.hpp"
#include "mesogrow/geometry.hpp"

namespace mesogrow::gem {

/// Stagnant-film Ivantsov relation:
/// u_delta = sqrt(pi Pe) e^Pe [erfc(sqrt(Pe)) - erfc(sqrt(Pe + delta))].
double ivantsov_u(double pe, double delta);

/// Free-tip relation u0 = sqrt(pi Pe) e^Pe erfc(sqrt(Pe)) solved for Pe.
double pe_iv_from_u0(double u0);

/// Inverse of ivantsov_u in Pe at fixed delta (bisection to 1e-12).
double pe_from_u_delta(double u_delta, double delta);

struct GemParams {
    double u0 = 0.18;   // far-field supersaturation
    double delta = 1.0; // stagnant-film thickness
    double pe_iv = 0.0; // free-tip Peclet number for u0

    static GemParams from_u0(double u0, double delta);
};

/// Tip selection criterion v = (Pe / Pe_Iv)^2.
double tip_speed(double pe, const GemParams& params);

/// The four-fold <10> growth direction set under a grain rotation.
struct GrowthDirections {
    double rotation = 0.0;
};

/// cos of the smallest angle between the outward normal and any rotated
/// growth direction; in [sqrt(2)/2, 1] for the four-fold set.
double direction_projection(const Vec2& normal, const GrowthDirections& dirs);

/// Concentration sampler: interpolated liquid concentration, already zeroed
/// inside any grain and clamped to [0, u0].
using Sampler = std::function<double(const Vec2&)>;

struct Propagation {
    std::vector<Vec2> new_positions;
    std::vector<double> displacement; // per-node magnitudes for the ledger
    double max_speed = 0.0;           // max |cos(theta) v| over nodes
};

/// Moves every envelope node by cos(theta) v(u_delta) n dt along its outward
/// normal. Isotropic mode replaces cos(theta) by 1.
Propagation propagate_envelope(const envelope::Grain& grain, const Sampler& sample_u,
                               const GemParams& params, double dt,
                               bool isotropic = false);

} // namespace mesogrow::gem
