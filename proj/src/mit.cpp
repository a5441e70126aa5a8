#include "mesogrow/mit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <Eigen/Sparse>

#include "mesogrow/manifest.hpp"

namespace mesogrow::mit {

namespace {

using Clock = std::chrono::steady_clock;

struct ScopedTimer {
    double& acc;
    Clock::time_point t0 = Clock::now();
    explicit ScopedTimer(double& a) : acc(a) {}
    ~ScopedTimer() { acc += std::chrono::duration<double>(Clock::now() - t0).count(); }
};

/// Even-odd ray-cast inside test against a closed polyline, with edges
/// bucketed by y-row so per-query cost stays O(edges per row).
class PolygonTester {
public:
    explicit PolygonTester(const std::vector<Vec2>& poly) : poly_(poly) {
        const std::size_t n = poly.size();
        ymin_ = ymax_ = poly.empty() ? 0.0 : poly[0].y;
        for (const Vec2& p : poly) {
            ymin_ = std::min(ymin_, p.y);
            ymax_ = std::max(ymax_, p.y);
        }
        nrows_ = std::max<std::size_t>(1, n / 4);
        row_h_ = std::max((ymax_ - ymin_) / static_cast<double>(nrows_), 1e-300);
        rows_.resize(nrows_);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % n];
            std::size_t r0 = row_of(std::min(a.y, b.y));
            std::size_t r1 = row_of(std::max(a.y, b.y));
            for (std::size_t r = r0; r <= r1; ++r)
                rows_[r].push_back(static_cast<int>(i));
        }
    }

    bool inside(const Vec2& p) const {
        if (poly_.size() < 3 || p.y < ymin_ || p.y > ymax_) return false;
        bool in = false;
        const std::size_t n = poly_.size();
        for (int ei : rows_[row_of(p.y)]) {
            const Vec2& a = poly_[static_cast<std::size_t>(ei)];
            const Vec2& b = poly_[(static_cast<std::size_t>(ei) + 1) % n];
            if ((a.y > p.y) != (b.y > p.y) &&
                p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y))
                in = !in;
        }
        return in;
    }

private:
    std::size_t row_of(double y) const {
        double r = (y - ymin_) / row_h_;
        if (r < 0) return 0;
        auto i = static_cast<std::size_t>(r);
        return std::min(i, nrows_ - 1);
    }

    std::vector<Vec2> poly_;
    std::vector<std::vector<int>> rows_;
    std::size_t nrows_ = 1;
    double ymin_ = 0.0, ymax_ = 0.0, row_h_ = 1.0;
};

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b)
{
    Vec2 ab{b.x - a.x, b.y - a.y};
    double len2 = ab.x * ab.x + ab.y * ab.y;
    if (len2 == 0.0) return dist(p, a);
    double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, Vec2{a.x + t * ab.x, a.y + t * ab.y});
}

std::string fmt_time(double t)
{
    std::ostringstream os;
    os << t;
    return os.str();
}

} // namespace

struct Simulation::Impl {
    SimConfig cfg;
    gem::GemParams gp;
    spatial::OuterBoundary outer;

    std::vector<Vec2> outer_pts;
    std::vector<Vec2> outer_normals;

    spatial::NodeSet nodes;
    std::vector<double> u;
    std::vector<envelope::Grain> grains;
    std::vector<std::vector<int>> grain_idx; // node indices per grain, ordered

    spatial::KDTree tree; // rebuilt only on geometry changes
    std::vector<rbffd::OperatorRow> lap_rows; // filled for interior nodes
    std::vector<rbffd::OperatorRow> bc_rows;  // n.grad rows for outer nodes
    std::vector<int> interior_ids;
    std::vector<int> outer_ids;

    // the n.grad rows couple neighboring outer nodes, so their values are
    // obtained from one small coupled solve (factorized per geometry change)
    std::vector<int> outer_ordinal; // node index -> position in outer_ids
    Eigen::SparseLU<Eigen::SparseMatrix<double>> bc_lu;

    // film-point interpolation cache: one stencil + factorization per
    // envelope node, reused while the kNN stencil is unchanged
    struct FilmCache {
        std::vector<int> stencil;
        rbffd::StencilSystem sys;
    };
    std::vector<std::vector<FilmCache>> film;

    long step = 0;
    double time = 0.0;
    double swept_disp = 0.0; // max ledger value at the last removal sweep
    bool stopped = false;
    std::string stop_reason;
    std::vector<StepMetrics> history;
    PhaseTimings timings;

    explicit Impl(SimConfig c)
        : cfg(std::move(c)), outer(cfg.domain_shape, cfg.L)
    {
        cfg.validate();
        gp = gem::GemParams::from_u0(cfg.u0, cfg.delta);
        initialize();
    }

    void initialize()
    {
        outer_pts = outer.discretize(cfg.h_l);
        outer_normals.resize(outer_pts.size());
        for (std::size_t i = 0; i < outer_pts.size(); ++i)
            outer_normals[i] = outer.outward_normal(outer_pts[i]);

        grains.clear();
        for (const GrainSeed& seed : cfg.grains) {
            envelope::Grain g;
            int n = std::max(8, static_cast<int>(std::lround(2 * M_PI * cfg.r0 / cfg.h_e)));
            g.nodes.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                double a = 2 * M_PI * i / n;
                g.nodes.push_back(Vec2{seed.center.x + cfg.r0 * std::cos(a),
                                       seed.center.y + cfg.r0 * std::sin(a)});
            }
            g.orientation = seed.orientation;
            g.refit(cfg.k);
            g.reset_ledger();
            grains.push_back(std::move(g));
        }

        build_discretization(nullptr);
        u.assign(nodes.size(), cfg.u0);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes.roles[i] == spatial::NodeRole::envelope) u[i] = 0.0;
        assemble_rows();
    }

    spatial::NodeSet make_seeds() const
    {
        spatial::NodeSet s;
        for (const Vec2& p : outer_pts)
            s.add(p, spatial::NodeRole::outer, cfg.h_l);
        for (std::size_t g = 0; g < grains.size(); ++g)
            for (const Vec2& p : grains[g].nodes)
                s.add(p, spatial::NodeRole::envelope, cfg.h_e, static_cast<int>(g));
        return s;
    }

    std::vector<PolygonTester> make_testers() const
    {
        std::vector<PolygonTester> t;
        t.reserve(grains.size());
        for (const envelope::Grain& g : grains)
            t.emplace_back(g.nodes);
        return t;
    }

    /// Fills the liquid region around the current envelopes. When `remap_from`
    /// is set, the concentration on generated/envelope nodes is interpolated
    /// from the previous discretization; otherwise u is left untouched.
    void build_discretization(const spatial::KDTree* remap_from)
    {
        spatial::NodeSet seeds = make_seeds();
        std::vector<Vec2> env_pts;
        for (const envelope::Grain& g : grains)
            env_pts.insert(env_pts.end(), g.nodes.begin(), g.nodes.end());
        spatial::SpacingField spacing(env_pts, outer_pts,
                                      spatial::SpacingParams{cfg.h_e, cfg.h_l});
        std::vector<PolygonTester> testers = make_testers();
        auto inside = [&](const Vec2& x) {
            if (!outer.inside(x)) return false;
            for (const PolygonTester& t : testers)
                if (t.inside(x)) return false;
            return true;
        };
        spatial::NodeSet fresh = spatial::fill_domain(
            seeds, [&](const Vec2& x) { return spacing(x); }, inside);

        std::vector<double> fresh_u;
        if (remap_from) {
            fresh_u.resize(fresh.size());
            for (std::size_t i = 0; i < fresh.size(); ++i) {
                switch (fresh.roles[i]) {
                case spatial::NodeRole::outer:
                    fresh_u[i] = u[i]; // outer nodes are first and immobile
                    break;
                case spatial::NodeRole::envelope:
                    fresh_u[i] = 0.0;
                    break;
                case spatial::NodeRole::interior:
                    fresh_u[i] = std::clamp(
                        rbffd::rbffd_interpolate(fresh.positions[i], *remap_from, u, cfg.m),
                        0.0, cfg.u0);
                    break;
                }
            }
        }

        nodes = std::move(fresh);
        if (remap_from) u = std::move(fresh_u);

        grain_idx.assign(grains.size(), {});
        std::size_t at = outer_pts.size();
        for (std::size_t g = 0; g < grains.size(); ++g) {
            grain_idx[g].resize(grains[g].nodes.size());
            for (std::size_t i = 0; i < grains[g].nodes.size(); ++i)
                grain_idx[g][i] = static_cast<int>(at++);
        }

        tree.build(nodes.positions);
        film.assign(grains.size(), {});
        for (std::size_t g = 0; g < grains.size(); ++g)
            film[g].resize(grains[g].nodes.size());
    }

    void assemble_rows()
    {
        ScopedTimer timer(timings.weights);
        const int n_st = rbffd::stencil_size(cfg.m);
        lap_rows.assign(nodes.size(), {});
        bc_rows.assign(nodes.size(), {});
        interior_ids.clear();
        outer_ids.clear();
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (nodes.roles[static_cast<std::size_t>(i)] != spatial::NodeRole::envelope)
                assemble_row(i, n_st);
        build_boundary_solver();
    }

    void build_boundary_solver()
    {
        outer_ordinal.assign(nodes.size(), -1);
        for (std::size_t oi = 0; oi < outer_ids.size(); ++oi)
            outer_ordinal[static_cast<std::size_t>(outer_ids[oi])] = static_cast<int>(oi);
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t oi = 0; oi < outer_ids.size(); ++oi) {
            const rbffd::OperatorRow& r = bc_rows[static_cast<std::size_t>(outer_ids[oi])];
            for (std::size_t j = 0; j < r.stencil.size(); ++j) {
                int col = outer_ordinal[static_cast<std::size_t>(r.stencil[j])];
                if (col >= 0)
                    trip.emplace_back(static_cast<int>(oi), col, r.w[j]);
            }
        }
        const auto n = static_cast<Eigen::Index>(outer_ids.size());
        Eigen::SparseMatrix<double> abb(n, n);
        abb.setFromTriplets(trip.begin(), trip.end());
        bc_lu.compute(abb);
        if (bc_lu.info() != Eigen::Success)
            throw std::runtime_error("degenerate stencil in boundary system");
    }

    /// kNN stencil; boundary rows keep only the node itself plus non-outer
    /// neighbors, which makes the n.grad closure one-sided and the boundary
    /// block diagonally solvable (wall-tangential couplings destabilize it).
    std::vector<int> make_stencil(int i, int n_st) const
    {
        const auto ui = static_cast<std::size_t>(i);
        const Vec2& x = nodes.positions[ui];
        if (nodes.roles[ui] == spatial::NodeRole::interior)
            return tree.knn(x, n_st);
        std::vector<int> out;
        int k = 3 * n_st;
        while (true) {
            k = std::min(k, static_cast<int>(nodes.size()));
            out.clear();
            out.push_back(i);
            for (int c : tree.knn(x, k)) {
                if (static_cast<int>(out.size()) == n_st) break;
                if (c != i && nodes.roles[static_cast<std::size_t>(c)] != spatial::NodeRole::outer)
                    out.push_back(c);
            }
            if (static_cast<int>(out.size()) == n_st || k == static_cast<int>(nodes.size()))
                return out;
            k *= 2;
        }
    }

    void assemble_row(int i, int n_st)
    {
        const auto ui = static_cast<std::size_t>(i);
        const Vec2& x = nodes.positions[ui];
        std::vector<int> stencil = make_stencil(i, n_st);
        std::vector<Vec2> pts(stencil.size());
        for (std::size_t j = 0; j < stencil.size(); ++j)
            pts[j] = nodes.positions[static_cast<std::size_t>(stencil[j])];
        try {
            if (nodes.roles[ui] == spatial::NodeRole::interior) {
                rbffd::WeightSet ws =
                    rbffd::compute_weights(pts, x, rbffd::Op::laplacian, cfg.m);
                lap_rows[ui] = {std::move(stencil), std::move(ws.w)};
                interior_ids.push_back(i);
            } else { // outer: n . grad row, solved for the node's own value
                rbffd::StencilSystem sys(pts, cfg.m);
                const Vec2& nrm = outer_normals[ui]; // outer nodes come first
                rbffd::WeightSet wx = sys.weights(x, rbffd::Op::grad_x);
                rbffd::WeightSet wy = sys.weights(x, rbffd::Op::grad_y);
                std::vector<double> w(stencil.size());
                double norm1 = 0.0;
                for (std::size_t j = 0; j < w.size(); ++j) {
                    w[j] = nrm.x * wx.w[j] + nrm.y * wy.w[j];
                    norm1 += std::abs(w[j]);
                }
                if (std::abs(w[0]) <= 1e-10 * norm1)
                    throw std::runtime_error("degenerate stencil");
                bc_rows[ui] = {std::move(stencil), std::move(w)};
                outer_ids.push_back(i);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()) + " at node " + std::to_string(i));
        }
    }

    void diffusion_step()
    {
        ScopedTimer timer(timings.diffusion);
        const double dt = cfg.dt;
        std::vector<double> next = u;
        for (int i : interior_ids) {
            const auto ui = static_cast<std::size_t>(i);
            const rbffd::OperatorRow& r = lap_rows[ui];
            double lap = 0.0;
            for (std::size_t j = 0; j < r.stencil.size(); ++j)
                lap += r.w[j] * u[static_cast<std::size_t>(r.stencil[j])];
            double v = u[ui] + dt * lap;
            if (!std::isfinite(v) || std::abs(v) > 1e3)
                throw DivergenceError(step, i);
            next[ui] = v;
        }
        // Dirichlet u = 0 on envelopes is preserved (never written), the
        // outer boundary gets zero-normal-gradient values from the fresh
        // interior state via the coupled boundary solve.
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(outer_ids.size()));
        for (std::size_t oi = 0; oi < outer_ids.size(); ++oi) {
            const rbffd::OperatorRow& r = bc_rows[static_cast<std::size_t>(outer_ids[oi])];
            double s = 0.0;
            for (std::size_t j = 0; j < r.stencil.size(); ++j)
                if (outer_ordinal[static_cast<std::size_t>(r.stencil[j])] < 0)
                    s += r.w[j] * next[static_cast<std::size_t>(r.stencil[j])];
            rhs(static_cast<Eigen::Index>(oi)) = -s;
        }
        Eigen::VectorXd ub = bc_lu.solve(rhs);
        for (std::size_t oi = 0; oi < outer_ids.size(); ++oi) {
            double v = ub(static_cast<Eigen::Index>(oi));
            if (!std::isfinite(v) || std::abs(v) > 1e3)
                throw DivergenceError(step, outer_ids[oi]);
            next[static_cast<std::size_t>(outer_ids[oi])] = v;
        }
        u.swap(next);
    }

    double sample_film(std::size_t g, std::size_t node, const Vec2& x,
                       const std::vector<PolygonTester>& testers)
    {
        for (const PolygonTester& t : testers)
            if (t.inside(x)) return 0.0;
        const int n_st = rbffd::stencil_size(cfg.m);
        std::vector<int> stencil = tree.knn(x, n_st);
        FilmCache& c = film[g][node];
        if (stencil != c.stencil) {
            std::vector<Vec2> pts(stencil.size());
            for (std::size_t j = 0; j < stencil.size(); ++j)
                pts[j] = tree.point(stencil[j]);
            c.sys = rbffd::StencilSystem(pts, cfg.m);
            c.stencil = std::move(stencil);
        }
        std::vector<double> vals(c.stencil.size());
        for (std::size_t j = 0; j < vals.size(); ++j)
            vals[j] = u[static_cast<std::size_t>(c.stencil[j])];
        return c.sys.apply(x, rbffd::Op::eval, vals);
    }

    double propagate()
    {
        ScopedTimer timer(timings.propagation);
        std::vector<PolygonTester> testers = make_testers();
        double max_speed = 0.0;
        for (std::size_t g = 0; g < grains.size(); ++g) {
            envelope::Grain& grain = grains[g];
            // propagate_envelope visits the nodes once, in order; the cursor
            // keys the sampler calls to the per-node stencil cache
            std::size_t cursor = 0;
            gem::Propagation prop = gem::propagate_envelope(
                grain,
                [&](const Vec2& x) { return sample_film(g, cursor++, x, testers); },
                gp, cfg.dt, cfg.isotropic);
            for (std::size_t i = 0; i < grain.nodes.size(); ++i) {
                grain.nodes[i] = prop.new_positions[i];
                nodes.positions[static_cast<std::size_t>(grain_idx[g][i])] =
                    prop.new_positions[i];
                grain.cumulative_displacement[i] += prop.displacement[i];
            }
            grain.refit(cfg.k);
            max_speed = std::max(max_speed, prop.max_speed);
        }
        return max_speed;
    }

    void maybe_rediscretize()
    {
        ScopedTimer timer(timings.rediscretization);
        double max_disp = 0.0;
        for (const envelope::Grain& g : grains)
            for (double d : g.cumulative_displacement)
                max_disp = std::max(max_disp, d);
        if (max_disp >= cfg.h_e / 2) {
            rediscretize();
        } else if (max_disp - swept_disp >= 0.15 * cfg.h_e) {
            // sweeping every step would rebuild trees and solvers for nothing:
            // nodes are cleared 0.8 h_e ahead, so a 0.15 h_e stride still keeps
            // every interior node at least 0.65 h_e clear of the envelope
            remove_overrun_nodes();
            swept_disp = max_disp;
        }
    }

    /// Drops interior nodes the moving envelopes have swallowed or come
    /// within 0.8 h_e of since the last re-discretization.
    void remove_overrun_nodes()
    {
        std::vector<PolygonTester> testers = make_testers();
        std::vector<spatial::KDTree> env_trees;
        env_trees.reserve(grains.size());
        for (const envelope::Grain& g : grains)
            env_trees.emplace_back(g.nodes);

        const double cut = 0.8 * cfg.h_e;
        std::vector<char> drop(nodes.size(), 0);
        std::vector<char> seen(nodes.size(), 0);
        bool any = false;
        for (std::size_t g = 0; g < grains.size(); ++g) {
            for (const Vec2& p : grains[g].nodes) {
                for (int i : tree.radius(p, cut + cfg.h_e)) {
                    const auto ui = static_cast<std::size_t>(i);
                    if (seen[ui] || nodes.roles[ui] != spatial::NodeRole::interior)
                        continue;
                    seen[ui] = 1;
                    const Vec2& x = nodes.positions[ui];
                    for (std::size_t h = 0; h < grains.size(); ++h) {
                        if (testers[h].inside(x) ||
                            polyline_dist(env_trees[h], grains[h].nodes, x) <= cut) {
                            drop[ui] = 1;
                            any = true;
                            break;
                        }
                    }
                }
            }
        }
        if (!any) return;

        std::vector<int> old2new(nodes.size(), -1);
        spatial::NodeSet kept;
        std::vector<double> kept_u;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (drop[i]) continue;
            old2new[i] = static_cast<int>(kept.size());
            kept.add(nodes.positions[i], nodes.roles[i], nodes.spacing[i], nodes.grain_id[i]);
            kept_u.push_back(u[i]);
        }
        nodes = std::move(kept);
        u = std::move(kept_u);
        for (auto& gi : grain_idx)
            for (int& i : gi)
                i = old2new[static_cast<std::size_t>(i)];
        tree.build(nodes.positions);

        // keep surviving rows whose stencils are intact, recompute the rest
        ScopedTimer timer(timings.weights);
        const int n_st = rbffd::stencil_size(cfg.m);
        std::vector<rbffd::OperatorRow> old_lap = std::move(lap_rows);
        std::vector<rbffd::OperatorRow> old_bc = std::move(bc_rows);
        lap_rows.assign(nodes.size(), {});
        bc_rows.assign(nodes.size(), {});
        interior_ids.clear();
        outer_ids.clear();
        for (std::size_t old_i = 0; old_i < old2new.size(); ++old_i) {
            int i = old2new[old_i];
            if (i < 0 || nodes.roles[static_cast<std::size_t>(i)] == spatial::NodeRole::envelope)
                continue;
            rbffd::OperatorRow& src = old_lap[old_i].stencil.empty() ? old_bc[old_i] : old_lap[old_i];
            bool intact = !src.stencil.empty();
            if (intact)
                for (int s : src.stencil)
                    if (old2new[static_cast<std::size_t>(s)] < 0) { intact = false; break; }
            if (intact) {
                for (int& s : src.stencil)
                    s = old2new[static_cast<std::size_t>(s)];
                if (nodes.roles[static_cast<std::size_t>(i)] == spatial::NodeRole::interior) {
                    lap_rows[static_cast<std::size_t>(i)] = std::move(src);
                    interior_ids.push_back(i);
                } else {
                    bc_rows[static_cast<std::size_t>(i)] = std::move(src);
                    outer_ids.push_back(i);
                }
            } else {
                assemble_row(i, n_st);
            }
        }
        std::sort(interior_ids.begin(), interior_ids.end());
        std::sort(outer_ids.begin(), outer_ids.end());
        build_boundary_solver();

        for (auto& fg : film)
            for (FilmCache& c : fg)
                c = FilmCache{};
    }

    static double polyline_dist(const spatial::KDTree& env_tree,
                                const std::vector<Vec2>& poly, const Vec2& x)
    {
        int j = env_tree.nearest(x);
        const int n = static_cast<int>(poly.size());
        double best = std::numeric_limits<double>::max();
        for (int s = j - 2; s <= j + 1; ++s) {
            int a = ((s % n) + n) % n;
            int b = (a + 1) % n;
            best = std::min(best, point_segment_dist(x, poly[static_cast<std::size_t>(a)],
                                                     poly[static_cast<std::size_t>(b)]));
        }
        return best;
    }

    void rediscretize()
    {
        for (envelope::Grain& g : grains) {
            g.nodes = spatial::discretize_curve(g.curve, [&](const Vec2&) { return cfg.h_e; });
            g.refit(cfg.k);
            g.reset_ledger();
        }
        swept_disp = 0.0;
        spatial::KDTree old_tree(nodes.positions); // current positions, incl. moved envelopes
        build_discretization(&old_tree);
        assemble_rows();
    }

    StepMetrics compute_metrics(double max_speed) const
    {
        StepMetrics m;
        m.step = step;
        m.t = time;
        m.tip_x = -std::numeric_limits<double>::max();
        m.envelope_length = 0.0;
        m.n_envelope = 0;
        for (const envelope::Grain& g : grains) {
            for (const Vec2& p : g.nodes)
                m.tip_x = std::max(m.tip_x, p.x);
            m.envelope_length += g.curve.length();
            m.n_envelope += g.nodes.size();
        }
        m.n_total = nodes.size();
        m.max_speed = max_speed;
        if (!history.empty()) {
            const StepMetrics& past =
                history[history.size() >= 20 ? history.size() - 20 : 0];
            if (m.t > past.t)
                m.tip_velocity = (m.tip_x - past.tip_x) / (m.t - past.t);
        }
        return m;
    }

    void advance()
    {
        if (stopped) return;
        diffusion_step();
        double max_speed = propagate();
        ++step;
        time = static_cast<double>(step) * cfg.dt;
        maybe_rediscretize();
        history.push_back(compute_metrics(max_speed));
        const StepMetrics& m = history.back();
        if (m.tip_x >= cfg.tip_stop) {
            stopped = true;
            stop_reason = "tip";
        } else if (cfg.t_end && time >= *cfg.t_end - 1e-12) {
            stopped = true;
            stop_reason = "t_end";
        } else if (step >= cfg.i_max) {
            stopped = true;
            stop_reason = "i_max";
        } else if (cfg.stop_speed && max_speed < *cfg.stop_speed) {
            stopped = true;
            stop_reason = "stalled";
        }
    }
};

Simulation::Simulation(SimConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;

void Simulation::advance() { impl_->advance(); }
bool Simulation::stopped() const { return impl_->stopped; }
const std::string& Simulation::stop_reason() const { return impl_->stop_reason; }
long Simulation::step() const { return impl_->step; }
double Simulation::time() const { return impl_->time; }
const SimConfig& Simulation::config() const { return impl_->cfg; }
const spatial::NodeSet& Simulation::nodes() const { return impl_->nodes; }
const std::vector<double>& Simulation::concentration() const { return impl_->u; }
const std::vector<envelope::Grain>& Simulation::grains() const { return impl_->grains; }
const std::vector<StepMetrics>& Simulation::metrics_history() const { return impl_->history; }
const PhaseTimings& Simulation::timings() const { return impl_->timings; }

StepMetrics Simulation::metrics() const
{
    if (!impl_->history.empty()) return impl_->history.back();
    return impl_->compute_metrics(0.0);
}

void Simulation::diffusion_step() { impl_->diffusion_step(); }
void Simulation::force_rediscretization() { impl_->rediscretize(); }

namespace {

void write_snapshot(const Simulation& sim, const std::string& out_dir,
                    const std::string& tag, std::vector<std::string>& outputs)
{
    std::string nodes_file = "nodes_" + tag + ".csv";
    sim.nodes().write_csv(out_dir + "/" + nodes_file);
    outputs.push_back(nodes_file);
    for (std::size_t g = 0; g < sim.grains().size(); ++g) {
        std::string env_file = "envelope_" + std::to_string(g) + "_" + tag + ".csv";
        sim.grains()[g].curve.write_csv(out_dir + "/" + env_file);
        outputs.push_back(env_file);
    }
}

void write_metrics_row(std::ofstream& out, const StepMetrics& m)
{
    out << m.step << ',' << m.t << ',' << m.tip_x << ',' << m.tip_velocity << ','
        << m.envelope_length << ',' << m.n_total << ',' << m.n_envelope << ','
        << m.max_speed << '\n';
}

} // namespace

RunResult run(const SimConfig& config, const std::string& out_dir)
{
    config.validate();
    std::filesystem::create_directories(out_dir);
    auto t0 = Clock::now();

    Simulation sim(config);

    std::unordered_map<long, std::string> snaps;
    for (double t : config.snapshot_times)
        snaps.emplace(std::lround(t / config.dt), fmt_time(t));

    std::vector<std::string> outputs;
    std::ofstream metrics(out_dir + "/metrics.csv");
    metrics << "step,t,tip_x,tip_velocity,envelope_length,n_total,n_envelope,max_speed\n";
    metrics.precision(12);
    outputs.push_back("metrics.csv");

    if (auto it = snaps.find(0); it != snaps.end())
        write_snapshot(sim, out_dir, it->second, outputs);

    RunResult res;
    try {
        while (!sim.stopped()) {
            sim.advance();
            write_metrics_row(metrics, sim.metrics());
            if (auto it = snaps.find(sim.step()); it != snaps.end())
                write_snapshot(sim, out_dir, it->second, outputs);
        }
        res.stop_reason = sim.stop_reason();
    } catch (const DivergenceError& e) {
        res.stop_reason = e.what();
        res.diverged = true;
    }
    write_snapshot(sim, out_dir, "final", outputs);
    metrics.close();

    res.steps = sim.step();
    res.t_final = sim.time();
    res.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    RunManifest manifest;
    manifest.config_text = config_to_text(config);
    manifest.stop_reason = res.stop_reason;
    manifest.diverged = res.diverged;
    manifest.steps = res.steps;
    manifest.t_final = res.t_final;
    manifest.wall_seconds = res.wall_seconds;
    manifest.phase_seconds = {{"weights", sim.timings().weights},
                              {"diffusion", sim.timings().diffusion},
                              {"propagation", sim.timings().propagation},
                              {"rediscretization", sim.timings().rediscretization}};
    manifest.extra = {{"n_total", static_cast<double>(sim.nodes().size())},
                      {"tip_x", sim.metrics().tip_x}};
    manifest.outputs = outputs;
    manifest.write(out_dir);
    return res;
}

} // namespace mesogrow::mit
