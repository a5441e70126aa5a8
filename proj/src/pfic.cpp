#include "mesogrow/pfic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "mesogrow/kdtree.hpp"
#include "mesogrow/manifest.hpp"

namespace mesogrow::pfic {

namespace {

using Clock = std::chrono::steady_clock;

/// Linear-interpolation table for Pe(u_delta); the bisection inverse is far
/// too slow to call once per band point per step.
class PeTable {
public:
    PeTable(double u0, double delta) : u0_(u0) {
        vals_.resize(kN + 1);
        for (int i = 0; i <= kN; ++i)
            vals_[static_cast<std::size_t>(i)] =
                gem::pe_from_u_delta(u0 * i / kN, delta);
    }

    double operator()(double u) const {
        double s = std::clamp(u / u0_, 0.0, 1.0) * kN;
        int i = std::min(static_cast<int>(s), kN - 1);
        double f = s - i;
        return (1 - f) * vals_[static_cast<std::size_t>(i)] +
               f * vals_[static_cast<std::size_t>(i) + 1];
    }

private:
    static constexpr int kN = 4096;
    double u0_;
    std::vector<double> vals_;
};

/// 3x3 biquadratic (Lagrange) interpolation of a grid field at x.
double biquadratic(const PhaseGrid& g, const std::vector<double>& f, const Vec2& x)
{
    double fx = (x.x + g.half) / g.h;
    double fy = (x.y + g.half) / g.h;
    int i0 = std::clamp(static_cast<int>(std::lround(fx)), 1, g.n - 2);
    int j0 = std::clamp(static_cast<int>(std::lround(fy)), 1, g.n - 2);
    double sx = fx - i0, sy = fy - j0;
    double wx[3] = {0.5 * sx * (sx - 1), (1 - sx) * (1 + sx), 0.5 * sx * (sx + 1)};
    double wy[3] = {0.5 * sy * (sy - 1), (1 - sy) * (1 + sy), 0.5 * sy * (sy + 1)};
    double s = 0.0;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
            s += wx[di + 1] * wy[dj + 1] *
                 f[static_cast<std::size_t>(g.id(i0 + di, j0 + dj))];
    return s;
}

std::string fmt_time(double t)
{
    std::ostringstream os;
    os << t;
    return os.str();
}

} // namespace

PhaseGrid PhaseGrid::create(const SimConfig& config)
{
    config.validate();
    PhaseGrid g;
    g.n = static_cast<int>(std::lround(config.L / config.h_e)) + 1;
    g.half = config.L / 2;
    g.h = config.L / (g.n - 1);
    g.w_phi = config.w_phi_or_default();
    g.b = config.b_or_default();
    g.phi_env = config.phi_env;
    g.phi.assign(static_cast<std::size_t>(g.n) * g.n, 0.0);
    g.u.assign(g.phi.size(), 0.0);
    return g;
}

void init_phase(PhaseGrid& grid, const std::function<double(const Vec2&)>& signed_distance)
{
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i)
            grid.phi_at(i, j) =
                0.5 * (1.0 - std::tanh(signed_distance(grid.pos(i, j)) / (2 * grid.w_phi)));
}

MarkerFront reconstruct_front(const PhaseGrid& grid)
{
    const double c = grid.phi_env;
    const int n = grid.n;

    // crossing point on a grid edge; key identifies the edge globally
    auto hkey = [n](int i, int j) { return 2 * (j * n + i); };     // (i,j)-(i+1,j)
    auto vkey = [n](int i, int j) { return 2 * (j * n + i) + 1; }; // (i,j)-(i,j+1)

    std::unordered_map<int, Vec2> pts;
    auto cross_h = [&](int i, int j) {
        double a = grid.phi_at(i, j), b = grid.phi_at(i + 1, j);
        double t = (c - a) / (b - a);
        Vec2 p0 = grid.pos(i, j);
        pts.emplace(hkey(i, j), Vec2{p0.x + t * grid.h, p0.y});
        return hkey(i, j);
    };
    auto cross_v = [&](int i, int j) {
        double a = grid.phi_at(i, j), b = grid.phi_at(i, j + 1);
        double t = (c - a) / (b - a);
        Vec2 p0 = grid.pos(i, j);
        pts.emplace(vkey(i, j), Vec2{p0.x, p0.y + t * grid.h});
        return vkey(i, j);
    };

    std::vector<std::pair<int, int>> segs; // pairs of edge keys
    for (int j = 0; j < n - 1; ++j) {
        for (int i = 0; i < n - 1; ++i) {
            int code = 0;
            if (grid.phi_at(i, j) > c) code |= 1;
            if (grid.phi_at(i + 1, j) > c) code |= 2;
            if (grid.phi_at(i + 1, j + 1) > c) code |= 4;
            if (grid.phi_at(i, j + 1) > c) code |= 8;
            if (code == 0 || code == 15) continue;
            // edge slots: 0 bottom, 1 right, 2 top, 3 left
            int ek[4] = {-1, -1, -1, -1};
            auto edge = [&](int slot) {
                if (ek[slot] >= 0) return ek[slot];
                switch (slot) {
                case 0: return ek[0] = cross_h(i, j);
                case 1: return ek[1] = cross_v(i + 1, j);
                case 2: return ek[2] = cross_h(i, j + 1);
                default: return ek[3] = cross_v(i, j);
                }
            };
            auto link = [&](int a, int b) { segs.emplace_back(edge(a), edge(b)); };
            switch (code) {
            case 1: case 14: link(3, 0); break;
            case 2: case 13: link(0, 1); break;
            case 3: case 12: link(3, 1); break;
            case 4: case 11: link(1, 2); break;
            case 6: case 9:  link(0, 2); break;
            case 7: case 8:  link(3, 2); break;
            case 5: case 10: {
                double center = 0.25 * (grid.phi_at(i, j) + grid.phi_at(i + 1, j) +
                                        grid.phi_at(i + 1, j + 1) + grid.phi_at(i, j + 1));
                bool join_first = (center > c) == (code == 5);
                if (join_first) { link(3, 0); link(1, 2); }
                else { link(0, 1); link(3, 2); }
                break;
            }
            default: break;
            }
        }
    }
    if (segs.empty())
        throw std::runtime_error("no front");

    std::unordered_map<int, std::vector<std::size_t>> by_key;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        by_key[segs[s].first].push_back(s);
        by_key[segs[s].second].push_back(s);
    }

    // walk loops, keep the longest (spurious specks can form extra loops)
    std::vector<char> used(segs.size(), 0);
    std::vector<int> best_loop;
    for (std::size_t start = 0; start < segs.size(); ++start) {
        if (used[start]) continue;
        std::vector<int> loop;
        std::size_t s = start;
        int key = segs[start].first;
        while (true) {
            used[s] = 1;
            key = segs[s].first == key ? segs[s].second : segs[s].first;
            loop.push_back(key);
            std::size_t next = s;
            for (std::size_t cand : by_key[key])
                if (!used[cand]) { next = cand; break; }
            if (next == s) break;
            s = next;
        }
        if (loop.size() > best_loop.size()) best_loop = std::move(loop);
    }

    MarkerFront front;
    front.markers.reserve(best_loop.size());
    for (int key : best_loop)
        front.markers.push_back(pts.at(key));

    // normalize to counter-clockwise
    double area2 = 0.0;
    for (std::size_t i = 0; i < front.markers.size(); ++i) {
        const Vec2& a = front.markers[i];
        const Vec2& b = front.markers[(i + 1) % front.markers.size()];
        area2 += a.x * b.y - a.y * b.x;
    }
    if (area2 < 0)
        std::reverse(front.markers.begin(), front.markers.end());
    return front;
}

std::vector<double> speed_field(const PhaseGrid& grid, const MarkerFront& front,
                                const gem::GemParams& params,
                                const gem::GrowthDirections& dirs, bool isotropic)
{
    static thread_local std::unique_ptr<PeTable> table;
    static thread_local double table_u0 = -1.0, table_delta = -1.0;
    if (!table || table_u0 != params.u0 || table_delta != params.delta) {
        table = std::make_unique<PeTable>(params.u0, params.delta);
        table_u0 = params.u0;
        table_delta = params.delta;
    }

    spatial::KDTree marker_tree(front.markers);
    std::vector<double> v(grid.phi.size(), 0.0);
    const double eps = 1e-3 / grid.w_phi;
    const double inv2h = 1.0 / (2 * grid.h);
    for (int j = 1; j < grid.n - 1; ++j) {
        for (int i = 1; i < grid.n - 1; ++i) {
            double gx = (grid.phi_at(i + 1, j) - grid.phi_at(i - 1, j)) * inv2h;
            double gy = (grid.phi_at(i, j + 1) - grid.phi_at(i, j - 1)) * inv2h;
            double gn = std::hypot(gx, gy);
            if (gn <= eps) continue;
            Vec2 nout{-gx / gn, -gy / gn};
            Vec2 xm = front.markers[static_cast<std::size_t>(
                marker_tree.nearest(grid.pos(i, j)))];
            Vec2 xd{xm.x + params.delta * nout.x, xm.y + params.delta * nout.y};
            double ud = std::clamp(biquadratic(grid, grid.u, xd), 0.0, params.u0);
            double speed = gem::tip_speed((*table)(ud), params);
            double proj = isotropic ? 1.0 : gem::direction_projection(nout, dirs);
            v[static_cast<std::size_t>(grid.id(i, j))] = proj * speed;
        }
    }
    return v;
}

void phase_step(PhaseGrid& grid, const std::vector<double>& speed, double dt)
{
    const int n = grid.n;
    const double h = grid.h, w = grid.w_phi, b = grid.b;
    double vmax = 0.0;
    for (double s : speed) vmax = std::max(vmax, std::abs(s));
    if (vmax * dt / h > 0.5)
        throw std::runtime_error("phase CFL");

    // normalized gradient field for the curvature counter-term
    std::vector<double> nx(grid.phi.size(), 0.0), ny(grid.phi.size(), 0.0);
    const double inv2h = 1.0 / (2 * h);
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            double gx = (grid.phi_at(i + 1, j) - grid.phi_at(i - 1, j)) * inv2h;
            double gy = (grid.phi_at(i, j + 1) - grid.phi_at(i, j - 1)) * inv2h;
            double gn = std::max(std::hypot(gx, gy), 1e-12);
            nx[static_cast<std::size_t>(grid.id(i, j))] = gx / gn;
            ny[static_cast<std::size_t>(grid.id(i, j))] = gy / gn;
        }
    }

    std::vector<double> next = grid.phi;
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const auto id = static_cast<std::size_t>(grid.id(i, j));
            double p = grid.phi[id];
            double gx = (grid.phi_at(i + 1, j) - grid.phi_at(i - 1, j)) * inv2h;
            double gy = (grid.phi_at(i, j + 1) - grid.phi_at(i, j - 1)) * inv2h;
            double gn = std::hypot(gx, gy);
            double lap = (grid.phi_at(i + 1, j) + grid.phi_at(i - 1, j) +
                          grid.phi_at(i, j + 1) + grid.phi_at(i, j - 1) - 4 * p) / (h * h);
            double kappa =
                (nx[static_cast<std::size_t>(grid.id(i + 1, j))] -
                 nx[static_cast<std::size_t>(grid.id(i - 1, j))]) * inv2h +
                (ny[static_cast<std::size_t>(grid.id(i, j + 1))] -
                 ny[static_cast<std::size_t>(grid.id(i, j - 1))]) * inv2h;
            // the bracket vanishes on the moving tanh profile
            double stab = lap - (1 - 2 * p) * p * (1 - p) / (w * w) - kappa * gn;
            double val = p + dt * (speed[id] * gn + b * stab);
            if (!std::isfinite(val))
                throw std::runtime_error("phase divergence");
            next[id] = std::clamp(val, 0.0, 1.0);
        }
    }
    grid.phi.swap(next);
}

void diffusion_step(PhaseGrid& grid, double dt)
{
    const int n = grid.n;
    const double r = dt / (grid.h * grid.h);
    std::vector<double> next = grid.u;
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const auto id = static_cast<std::size_t>(grid.id(i, j));
            if (grid.phi[id] >= grid.phi_env) {
                next[id] = 0.0;
                continue;
            }
            double lap = grid.u[static_cast<std::size_t>(grid.id(i + 1, j))] +
                         grid.u[static_cast<std::size_t>(grid.id(i - 1, j))] +
                         grid.u[static_cast<std::size_t>(grid.id(i, j + 1))] +
                         grid.u[static_cast<std::size_t>(grid.id(i, j - 1))] - 4 * grid.u[id];
            double v = grid.u[id] + r * lap;
            if (!std::isfinite(v) || std::abs(v) > 1e3)
                throw std::runtime_error("diffusion divergence");
            next[id] = v;
        }
    }
    // zero-flux outer boundary: mirror the adjacent interior value
    for (int i = 0; i < n; ++i) {
        next[static_cast<std::size_t>(grid.id(i, 0))] =
            next[static_cast<std::size_t>(grid.id(i, 1))];
        next[static_cast<std::size_t>(grid.id(i, n - 1))] =
            next[static_cast<std::size_t>(grid.id(i, n - 2))];
    }
    for (int j = 0; j < n; ++j) {
        next[static_cast<std::size_t>(grid.id(0, j))] =
            next[static_cast<std::size_t>(grid.id(1, j))];
        next[static_cast<std::size_t>(grid.id(n - 1, j))] =
            next[static_cast<std::size_t>(grid.id(n - 2, j))];
    }
    grid.u.swap(next);
}

namespace {

void write_phi_csv(const PhaseGrid& g, const std::string& path)
{
    std::ofstream out(path);
    out.precision(12);
    out << "x,y,phi,u\n";
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            Vec2 p = g.pos(i, j);
            out << p.x << ',' << p.y << ',' << g.phi_at(i, j) << ','
                << g.u[static_cast<std::size_t>(g.id(i, j))] << '\n';
        }
}

void write_front_csv(const MarkerFront& f, const std::string& path)
{
    std::ofstream out(path);
    out.precision(12);
    out << "t,x,y,nx,ny\n";
    const std::size_t n = f.markers.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& prev = f.markers[(i + n - 1) % n];
        const Vec2& next = f.markers[(i + 1) % n];
        Vec2 t{next.x - prev.x, next.y - prev.y};
        double len = std::max(t.norm(), 1e-300);
        Vec2 nrm{t.y / len, -t.x / len}; // outward for a CCW polyline
        out << i << ',' << f.markers[i].x << ',' << f.markers[i].y << ','
            << nrm.x << ',' << nrm.y << '\n';
    }
}

double front_length(const MarkerFront& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.markers.size(); ++i)
        s += dist(f.markers[i], f.markers[(i + 1) % f.markers.size()]);
    return s;
}

} // namespace

mit::RunResult run(const SimConfig& config, const std::string& out_dir)
{
    config.validate();
    std::filesystem::create_directories(out_dir);
    auto t0 = Clock::now();

    PhaseGrid grid = PhaseGrid::create(config);
    // shift the profile so the tracked phi_env contour starts exactly at r0
    const double r_half = config.r0 - 2 * grid.w_phi * std::atanh(1 - 2 * grid.phi_env);
    init_phase(grid, [&](const Vec2& x) {
        double sd = std::numeric_limits<double>::max();
        for (const GrainSeed& g : config.grains)
            sd = std::min(sd, dist(x, g.center) - r_half);
        return sd;
    });
    for (std::size_t i = 0; i < grid.u.size(); ++i)
        grid.u[i] = grid.phi[i] >= grid.phi_env ? 0.0 : config.u0;

    gem::GemParams gp = gem::GemParams::from_u0(config.u0, config.delta);
    gem::GrowthDirections dirs{config.grains.empty() ? 0.0 : config.grains[0].orientation};

    std::unordered_map<long, std::string> snaps;
    for (double t : config.snapshot_times)
        snaps.emplace(std::lround(t / config.dt), fmt_time(t));

    std::vector<std::string> outputs;
    std::ofstream metrics(out_dir + "/metrics.csv");
    metrics << "step,t,tip_x,tip_velocity,envelope_length,n_total,n_envelope,max_speed\n";
    metrics.precision(12);
    outputs.push_back("metrics.csv");

    auto snapshot = [&](const MarkerFront& f, const std::string& tag) {
        std::string phi_file = "phi_" + tag + ".csv";
        write_phi_csv(grid, out_dir + "/" + phi_file);
        outputs.push_back(phi_file);
        std::string env_file = "envelope_0_" + tag + ".csv";
        write_front_csv(f, out_dir + "/" + env_file);
        outputs.push_back(env_file);
    };

    mit::RunResult res;
    long step = 0;
    std::vector<double> tip_hist;
    MarkerFront front = reconstruct_front(grid);
    if (auto it = snaps.find(0); it != snaps.end())
        snapshot(front, it->second);

    try {
        while (true) {
            diffusion_step(grid, config.dt);
            front = reconstruct_front(grid);
            std::vector<double> v = speed_field(grid, front, gp, dirs, config.isotropic);
            int sub = std::max(1, config.phase_substeps);
            for (int s = 0; s < sub; ++s)
                phase_step(grid, v, config.dt / sub);
            ++step;
            double t = static_cast<double>(step) * config.dt;

            double tip = -std::numeric_limits<double>::max();
            for (const Vec2& m : front.markers) tip = std::max(tip, m.x);
            tip_hist.push_back(tip);
            double vmax = 0.0;
            for (double s : v) vmax = std::max(vmax, std::abs(s));
            double tip_v = 0.0;
            if (tip_hist.size() >= 21)
                tip_v = (tip - tip_hist[tip_hist.size() - 21]) / (20 * config.dt);
            metrics << step << ',' << t << ',' << tip << ',' << tip_v << ','
                    << front_length(front) << ',' << grid.phi.size() << ','
                    << front.markers.size() << ',' << vmax << '\n';

            if (auto it = snaps.find(step); it != snaps.end())
                snapshot(front, it->second);

            if (tip >= config.tip_stop) { res.stop_reason = "tip"; break; }
            if (config.t_end && t >= *config.t_end - 1e-12) { res.stop_reason = "t_end"; break; }
            if (step >= config.i_max) { res.stop_reason = "i_max"; break; }
            if (config.stop_speed && vmax < *config.stop_speed) {
                res.stop_reason = "stalled";
                break;
            }
        }
    } catch (const std::exception& e) {
        res.stop_reason = e.what();
        res.diverged = true;
    }
    snapshot(front, "final");
    metrics.close();

    res.steps = step;
    res.t_final = static_cast<double>(step) * config.dt;
    res.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    RunManifest manifest;
    manifest.config_text = config_to_text(config);
    manifest.stop_reason = res.stop_reason;
    manifest.diverged = res.diverged;
    manifest.steps = res.steps;
    manifest.t_final = res.t_final;
    manifest.wall_seconds = res.wall_seconds;
    manifest.extra = {{"n_total", static_cast<double>(grid.phi.size())}};
    manifest.outputs = outputs;
    manifest.write(out_dir);
    return res;
}

} // namespace mesogrow::pfic
