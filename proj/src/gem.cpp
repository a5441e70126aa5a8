#include "mesogrow/gem.hpp"

#include <cmath>
#include <stdexcept>

namespace mesogrow::gem {

namespace {

// e^{x^2} erfc(x); written out so e^Pe erfc(sqrt(Pe+delta)) stays accurate
double erfcx(double x) { return std::exp(x * x) * std::erfc(x); }

double bisect_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, double tol) {
    double flo = f(lo) - target, fhi = f(hi) - target;
    if (flo > 0 || fhi < 0) throw std::runtime_error("root not bracketed");
    for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) - target <= 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

constexpr double kPeLo = 1e-16;
constexpr double kPeHi = 10.0;

} // namespace

double ivantsov_u(double pe, double delta) {
    if (pe < 0) throw std::runtime_error("invalid Peclet number");
    if (delta <= 0) throw std::runtime_error("invalid film thickness");
    if (pe == 0) return 0.0;
    // sqrt(pi Pe) e^Pe [erfc(sqrt(Pe)) - erfc(sqrt(Pe+delta))]
    //   = sqrt(pi Pe) [erfcx(sqrt(Pe)) - e^{-delta} erfcx(sqrt(Pe+delta))]
    double s = std::sqrt(pe);
    return std::sqrt(M_PI * pe) *
           (erfcx(s) - std::exp(-delta) * erfcx(std::sqrt(pe + delta)));
}

double pe_iv_from_u0(double u0) {
    if (!(u0 > 0.0) || !(u0 < 1.0)) throw std::runtime_error("invalid supersaturation");
    auto free_tip = [](double pe) {
        return std::sqrt(M_PI * pe) * erfcx(std::sqrt(pe));
    };
    return bisect_increasing(free_tip, u0, kPeLo, kPeHi, 1e-12);
}

double pe_from_u_delta(double u_delta, double delta) {
    if (u_delta < 0) throw std::runtime_error("film concentration out of range");
    if (u_delta == 0) return 0.0;
    if (u_delta >= ivantsov_u(kPeHi, delta))
        throw std::runtime_error("film concentration out of range");
    auto f = [delta](double pe) { return ivantsov_u(pe, delta); };
    return bisect_increasing(f, u_delta, kPeLo, kPeHi, 1e-12);
}

GemParams GemParams::from_u0(double u0, double delta) {
    GemParams p;
    p.u0 = u0;
    p.delta = delta;
    p.pe_iv = pe_iv_from_u0(u0);
    return p;
}

double tip_speed(double pe, const GemParams& params) {
    double r = pe / params.pe_iv;
    return r * r;
}

double direction_projection(const Vec2& normal, const GrowthDirections& dirs) {
    double n = normal.norm();
    if (n < 1e-12) throw std::runtime_error("degenerate normal");
    // smallest angle to {+-e_x, +-e_y} rotated by dirs.rotation: fold the
    // normal angle into [0, pi/2) and take the nearest axis
    double a = polar_angle(normal) - dirs.rotation;
    a = std::fmod(std::abs(a), M_PI / 2.0);
    double smallest = std::min(a, M_PI / 2.0 - a);
    return std::cos(smallest);
}

Propagation propagate_envelope(const envelope::Grain& grain, const Sampler& sample_u,
                               const GemParams& params, double dt, bool isotropic) {
    Propagation out;
    std::size_t n = grain.nodes.size();
    out.new_positions.resize(n);
    out.displacement.resize(n);
    GrowthDirections dirs{grain.orientation};

    for (std::size_t i = 0; i < n; ++i) {
        double t = grain.curve.node_param(static_cast<int>(i));
        Vec2 x = grain.nodes[i];
        Vec2 nrm = grain.curve.normal_at(t);
        Vec2 x_delta = x + params.delta * nrm;
        double u_delta;
        try {
            u_delta = sample_u(x_delta);
        } catch (const std::exception& e) {
            throw std::runtime_error("film sampling failed at envelope node " +
                                     std::to_string(i) + ": " + e.what());
        }
        u_delta = std::clamp(u_delta, 0.0, params.u0);
        double pe = pe_from_u_delta(u_delta, params.delta);
        double v = tip_speed(pe, params);
        double speed = isotropic ? v : v * direction_projection(nrm, dirs);
        out.max_speed = std::max(out.max_speed, speed);
        double step = speed * dt;
        out.new_positions[i] = x + step * nrm;
        out.displacement[i] = step;
    }
    return out;
}

} // namespace mesogrow::gem
