#include "mesogrow/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mesogrow/envelope.hpp"
#include "mesogrow/kdtree.hpp"
#include "mesogrow/mit.hpp"
#include "mesogrow/rbffd.hpp"

namespace mesogrow::bench {

double sibson(const Vec2& x)
{
    return std::cos(4 * M_PI * std::hypot(x.x - 0.25, x.y - 0.25));
}

namespace {

double halton(int index, int base)
{
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

std::vector<Vec2> halton_points(int n)
{
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pts[static_cast<std::size_t>(i)] = {halton(i + 1, 2), halton(i + 1, 3)};
    return pts;
}

} // namespace

std::vector<InterpResult> bench_interpolation(const std::vector<int>& n_fit_list,
                                              const std::vector<int>& n_list,
                                              const std::vector<int>& m_list)
{
    const int grid_n = 316; // ~1e5 probe points
    std::vector<Vec2> probes;
    probes.reserve(static_cast<std::size_t>(grid_n) * grid_n);
    std::vector<double> exact;
    for (int j = 0; j < grid_n; ++j)
        for (int i = 0; i < grid_n; ++i) {
            Vec2 p{(i + 0.5) / grid_n, (j + 0.5) / grid_n};
            probes.push_back(p);
            exact.push_back(sibson(p));
        }
    double exact_l2 = 0.0;
    for (double e : exact) exact_l2 += e * e;

    std::vector<InterpResult> out;
    for (int n_fit : n_fit_list) {
        std::vector<Vec2> fit = halton_points(n_fit);
        std::vector<double> vals(fit.size());
        for (std::size_t i = 0; i < fit.size(); ++i) vals[i] = sibson(fit[i]);
        spatial::KDTree tree(fit);
        std::vector<double> spacing(fit.size());
        for (std::size_t i = 0; i < fit.size(); ++i)
            spacing[i] = dist(fit[i], fit[static_cast<std::size_t>(tree.knn(fit[i], 2)[1])]);

        auto record = [&](const std::string& method, int n, int m, auto&& eval) {
            double err2 = 0.0;
            for (std::size_t p = 0; p < probes.size(); ++p) {
                double d = eval(probes[p]) - exact[p];
                err2 += d * d;
            }
            out.push_back({method, n_fit, n, m, std::sqrt(err2 / exact_l2)});
        };

        for (int n : n_list)
            record("shepard", n, 0, [&](const Vec2& x) {
                return rbffd::shepard_interpolate(x, tree, vals, n);
            });
        for (int m : m_list) {
            record("rbffd", rbffd::stencil_size(m), m, [&](const Vec2& x) {
                return rbffd::rbffd_interpolate(x, tree, vals, m);
            });
            record("pu", rbffd::stencil_size(m), m, [&](const Vec2& x) {
                return rbffd::pu_interpolate(x, tree, vals, spacing, m);
            });
        }
    }
    return out;
}

double tip_shape_radius(double t)
{
    double c = std::abs(std::cos(1.5 * t));
    if (c < 1e-300) return 1.0; // continuous limit at the cusp parameters
    return std::pow(c, std::sin(3 * t));
}

Vec2 tip_shape_point(double t)
{
    double r = tip_shape_radius(t);
    return {r * std::cos(t), r * std::sin(t)};
}

namespace {

/// dR/dt via the logarithmic derivative of R = |cos 1.5 t|^{sin 3 t}.
double tip_shape_radius_deriv(double t)
{
    double c = std::cos(1.5 * t);
    double ac = std::abs(c);
    if (ac < 1e-300) return 0.0;
    double dlog = 3 * std::cos(3 * t) * std::log(ac) -
                  1.5 * std::sin(3 * t) * std::sin(1.5 * t) / c;
    return tip_shape_radius(t) * dlog;
}

} // namespace

Vec2 tip_shape_normal(double t)
{
    double r = tip_shape_radius(t);
    double dr = tip_shape_radius_deriv(t);
    double ct = std::cos(t), st = std::sin(t);
    Vec2 tangent{dr * ct - r * st, dr * st + r * ct};
    double len = tangent.norm();
    if (len == 0.0) throw std::runtime_error("irregular point");
    return {tangent.y / len, -tangent.x / len}; // outward for the CCW parametrization
}

std::vector<ReconResult> bench_reconstruction(const std::vector<double>& h_fit_list,
                                              const std::vector<int>& k_list,
                                              double h_test)
{
    // cumulative arc length of the test shape for equal-arc sampling
    const int dense = 200000;
    std::vector<double> cum(static_cast<std::size_t>(dense) + 1, 0.0);
    Vec2 prev = tip_shape_point(0.0);
    for (int i = 1; i <= dense; ++i) {
        Vec2 p = tip_shape_point(2 * M_PI * i / dense);
        cum[static_cast<std::size_t>(i)] = cum[static_cast<std::size_t>(i) - 1] + dist(prev, p);
        prev = p;
    }
    const double total = cum.back();
    auto param_at_arc = [&](double s) {
        auto it = std::lower_bound(cum.begin(), cum.end(), s);
        auto i = static_cast<std::size_t>(std::distance(cum.begin(), it));
        if (i == 0) return 0.0;
        double f = (s - cum[i - 1]) / std::max(cum[i] - cum[i - 1], 1e-300);
        return 2 * M_PI * (static_cast<double>(i - 1) + f) / dense;
    };

    const double arc_of_interest = 0.5; // polar half-angle of the tip region

    std::vector<ReconResult> out;
    for (double h_fit : h_fit_list) {
        int n_fit = std::max(4, static_cast<int>(std::lround(total / h_fit)));
        std::vector<Vec2> samples(static_cast<std::size_t>(n_fit));
        for (int i = 0; i < n_fit; ++i)
            samples[static_cast<std::size_t>(i)] = tip_shape_point(param_at_arc(total * i / n_fit));

        for (int k : k_list) {
            envelope::ParametricCurve curve = envelope::fit_spline(samples, k);
            int n_test = std::max(8, static_cast<int>(std::lround(curve.length() / h_test)));
            double max_r = 0.0, max_a = 0.0;
            for (int i = 0; i < n_test; ++i) {
                double u = curve.period() * i / n_test;
                Vec2 p = curve.eval(u);
                double theta = std::atan2(p.y, p.x);
                if (std::abs(wrap_angle(theta)) > arc_of_interest) continue;
                max_r = std::max(max_r, std::abs(p.norm() - tip_shape_radius(theta)));
                Vec2 nc = curve.normal_at(u);
                Vec2 ne = tip_shape_normal(theta);
                double ang = std::atan2(std::abs(nc.x * ne.y - nc.y * ne.x),
                                        nc.x * ne.x + nc.y * ne.y);
                max_a = std::max(max_a, ang);
            }
            out.push_back({h_fit, k, n_fit, max_r, max_a});
        }
    }
    return out;
}

std::vector<DtScanRow> scan_dt(const std::vector<double>& dt_list, SimConfig config,
                               double t_target)
{
    config.isotropic = true;
    config.t_end = t_target;
    std::vector<DtScanRow> out;
    for (double dt : dt_list) {
        SimConfig c = config;
        c.dt = dt;
        c.i_max = static_cast<long>(std::ceil(t_target / dt)) + 10;
        DtScanRow row;
        row.dt = dt;
        try {
            mit::Simulation sim(c);
            while (!sim.stopped())
                sim.advance();
            const envelope::Grain& g = sim.grains().front();
            row.mean_radius =
                envelope::shape_metrics(g.curve, c.grains.front().center).mean_radius;
        } catch (const mit::DivergenceError&) {
            row.diverged = true;
        }
        out.push_back(row);
    }
    return out;
}

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(12);
    return out;
}

} // namespace

void write_interp_csv(const std::string& path, const std::vector<InterpResult>& rows)
{
    std::ofstream out = open_out(path);
    out << "method,n_fit,n,m,rel_l2\n";
    for (const InterpResult& r : rows)
        out << r.method << ',' << r.n_fit << ',' << r.n << ',' << r.m << ',' << r.rel_l2 << '\n';
}

void write_recon_csv(const std::string& path, const std::vector<ReconResult>& rows)
{
    std::ofstream out = open_out(path);
    out << "h_fit,k,n_fit,max_radius_err,max_normal_angle_err\n";
    for (const ReconResult& r : rows)
        out << r.h_fit << ',' << r.k << ',' << r.n_fit << ',' << r.max_radius_err << ','
            << r.max_normal_angle_err << '\n';
}

void write_dtscan_csv(const std::string& path, const std::vector<DtScanRow>& rows)
{
    std::ofstream out = open_out(path);
    out << "dt,diverged,mean_radius\n";
    for (const DtScanRow& r : rows)
        out << r.dt << ',' << (r.diverged ? 1 : 0) << ',' << r.mean_radius << '\n';
}

} // namespace mesogrow::bench
