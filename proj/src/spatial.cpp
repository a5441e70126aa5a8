#include "mesogrow/spatial.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mesogrow/envelope.hpp"

namespace mesogrow::spatial {

std::string role_name(NodeRole r) {
    switch (r) {
        case NodeRole::interior: return "interior";
        case NodeRole::envelope: return "envelope";
        case NodeRole::outer: return "outer";
    }
    return "?";
}

NodeRole role_from_name(const std::string& s) {
    if (s == "interior") return NodeRole::interior;
    if (s == "envelope") return NodeRole::envelope;
    if (s == "outer") return NodeRole::outer;
    throw std::runtime_error("unknown node role: " + s);
}

void NodeSet::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,y,role,grain_id,h\n";
    out.precision(17);
    for (std::size_t i = 0; i < size(); ++i) {
        out << positions[i].x << ',' << positions[i].y << ',' << role_name(roles[i])
            << ',' << grain_id[i] << ',' << spacing[i] << '\n';
    }
}

NodeSet NodeSet::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    NodeSet ns;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        Vec2 p;
        std::getline(ss, field, ','); p.x = std::stod(field);
        std::getline(ss, field, ','); p.y = std::stod(field);
        std::getline(ss, field, ','); NodeRole role = role_from_name(field);
        std::getline(ss, field, ','); int gid = std::stoi(field);
        std::getline(ss, field, ','); double h = std::stod(field);
        ns.add(p, role, h, gid);
    }
    return ns;
}

Vec2 OuterBoundary::closest_point(const Vec2& x) const {
    if (shape_ == Shape::circle) {
        double r = x.norm();
        if (r < 1e-300) return {half_, 0.0};
        return x * (half_ / r);
    }
    double cx = std::clamp(x.x, -half_, half_);
    double cy = std::clamp(x.y, -half_, half_);
    if (std::abs(x.x) >= half_ || std::abs(x.y) >= half_) return {cx, cy};
    // interior: project to the nearest edge
    double dx = half_ - std::abs(x.x);
    double dy = half_ - std::abs(x.y);
    if (dx < dy) return {x.x < 0 ? -half_ : half_, x.y};
    return {x.x, x.y < 0 ? -half_ : half_};
}

Vec2 OuterBoundary::outward_normal(const Vec2& x) const {
    if (shape_ == Shape::circle) return x.normalized();
    double ax = std::abs(x.x), ay = std::abs(x.y);
    double tol = 1e-9 * half_;
    bool on_x = std::abs(ax - half_) < tol;
    bool on_y = std::abs(ay - half_) < tol;
    if (on_x && on_y) return Vec2{x.x < 0 ? -1.0 : 1.0, x.y < 0 ? -1.0 : 1.0}.normalized();
    if (on_x) return {x.x < 0 ? -1.0 : 1.0, 0.0};
    if (on_y) return {0.0, x.y < 0 ? -1.0 : 1.0};
    // fall back to the dominant axis
    if (ax > ay) return {x.x < 0 ? -1.0 : 1.0, 0.0};
    return {0.0, x.y < 0 ? -1.0 : 1.0};
}

std::vector<Vec2> OuterBoundary::discretize(double h) const {
    if (h <= 0) throw std::runtime_error("invalid spacing");
    std::vector<Vec2> pts;
    if (shape_ == Shape::circle) {
        int n = std::max(3, static_cast<int>(std::lround(2.0 * M_PI * half_ / h)));
        pts.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double a = 2.0 * M_PI * i / n;
            pts.push_back({half_ * std::cos(a), half_ * std::sin(a)});
        }
        return pts;
    }
    int per_side = std::max(1, static_cast<int>(std::lround(2 * half_ / h)));
    // nodes at corners plus per_side-1 interior points on each side
    Vec2 corners[4] = {{-half_, -half_}, {half_, -half_}, {half_, half_}, {-half_, half_}};
    for (int s = 0; s < 4; ++s) {
        Vec2 a = corners[s], b = corners[(s + 1) % 4];
        for (int i = 0; i < per_side; ++i) {
            double f = static_cast<double>(i) / per_side;
            pts.push_back(a + (b - a) * f);
        }
    }
    return pts;
}

SpacingField::SpacingField(std::vector<Vec2> envelope_nodes, std::vector<Vec2> outer_nodes,
                           SpacingParams params)
    : envelope_tree_(std::move(envelope_nodes)),
      outer_tree_(std::move(outer_nodes)),
      params_(params) {
    if (envelope_tree_.size() == 0) throw std::runtime_error("no envelope");
    if (outer_tree_.size() == 0) throw std::runtime_error("no outer boundary");
    if (!(params_.h_e > 0) || params_.h_e > params_.h_l)
        throw std::runtime_error("invalid spacing");
}

double SpacingField::operator()(const Vec2& x) const {
    int ie = envelope_tree_.nearest(x);
    const Vec2& e = envelope_tree_.point(ie);
    double d = dist(x, e);
    if (d < 1e-12) return params_.h_e;
    int io = outer_tree_.nearest(x);
    const Vec2& o = outer_tree_.point(io);
    if (dist(x, o) < 1e-12) return params_.h_l;
    double d_closest = dist(e, outer_tree_.point(outer_tree_.nearest(e)));
    double h = params_.h_e + (params_.h_l - params_.h_e) * d / d_closest;
    return std::clamp(h, params_.h_e, params_.h_l);
}

double spacing_at(const Vec2& x, const std::vector<Vec2>& envelope_nodes,
                  const std::vector<Vec2>& outer_nodes, const SpacingParams& params) {
    SpacingField f(envelope_nodes, outer_nodes, params);
    return f(x);
}

namespace {

// Uniform bucket grid for proximity rejection during advancing-front fill.
class HashGrid {
public:
    explicit HashGrid(double cell) : cell_(cell) {}

    void insert(const Vec2& p) {
        cells_[key(p)].push_back(p);
    }

    bool any_within(const Vec2& p, double r) const {
        double r2 = r * r;
        int span = static_cast<int>(std::ceil(r / cell_));
        auto [ci, cj] = coords(p);
        for (int j = cj - span; j <= cj + span; ++j) {
            for (int i = ci - span; i <= ci + span; ++i) {
                auto it = cells_.find(pack(i, j));
                if (it == cells_.end()) continue;
                for (const Vec2& q : it->second)
                    if (dist2(p, q) < r2) return true;
            }
        }
        return false;
    }

private:
    double cell_;
    std::unordered_map<std::int64_t, std::vector<Vec2>> cells_;

    std::pair<int, int> coords(const Vec2& p) const {
        return {static_cast<int>(std::floor(p.x / cell_)),
                static_cast<int>(std::floor(p.y / cell_))};
    }
    static std::int64_t pack(int i, int j) {
        return (static_cast<std::int64_t>(i) << 32) ^ static_cast<std::uint32_t>(j);
    }
    std::int64_t key(const Vec2& p) const {
        auto [i, j] = coords(p);
        return pack(i, j);
    }
};

// Deterministic per-node angular offset: fractional part of i * golden ratio.
double angle_offset(std::size_t i) {
    double f = static_cast<double>(i) * 0.6180339887498949;
    return 2.0 * M_PI * (f - std::floor(f));
}

} // namespace

NodeSet fill_domain(const NodeSet& seeds, const SpacingFn& spacing,
                    const InsideFn& inside, const FillOptions& opts) {
    if (seeds.size() == 0) throw std::runtime_error("no seeds");

    NodeSet out = seeds;

    double min_h = seeds.spacing[0];
    for (double h : seeds.spacing) min_h = std::min(min_h, h);
    if (!(min_h > 0)) throw std::runtime_error("invalid spacing");

    HashGrid grid(min_h);
    for (const Vec2& p : out.positions) grid.insert(p);

    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < out.size(); ++i) queue.push_back(i);

    while (!queue.empty()) {
        std::size_t i = queue.front();
        queue.pop_front();
        Vec2 xi = out.positions[i];
        double hi = spacing(xi);
        if (!(hi > 0)) throw std::runtime_error("invalid spacing");
        double base = angle_offset(i);
        for (int c = 0; c < opts.candidates; ++c) {
            double a = base + 2.0 * M_PI * c / opts.candidates;
            Vec2 cand = xi + Vec2{hi * std::cos(a), hi * std::sin(a)};
            if (!inside(cand)) continue;
            double hc = spacing(cand);
            if (!(hc > 0)) throw std::runtime_error("invalid spacing");
            if (grid.any_within(cand, opts.reject_factor * hc)) continue;
            grid.insert(cand);
            out.add(cand, NodeRole::interior, hc);
            queue.push_back(out.size() - 1);
        }
    }
    return out;
}

std::vector<Vec2> discretize_curve(const envelope::ParametricCurve& curve,
                                   const SpacingFn& spacing) {
    const double T = curve.period();

    // probe the local spacing to size the arc-length table
    double h_min = std::numeric_limits<double>::infinity();
    double rough_len = 0.0;
    {
        const int probes = 256;
        Vec2 prev = curve.eval(0.0);
        for (int i = 1; i <= probes; ++i) {
            Vec2 p = curve.eval(T * i / probes);
            rough_len += dist(prev, p);
            prev = p;
            h_min = std::min(h_min, spacing(p));
        }
        if (!(h_min > 0)) throw std::runtime_error("invalid spacing");
    }

    int samples = static_cast<int>(std::clamp(32.0 * rough_len / h_min, 4096.0, 400000.0));

    // cumulative plain and h-weighted arc length tables; also the
    // regular-parametrization guard
    std::vector<double> t_tab(static_cast<std::size_t>(samples) + 1);
    std::vector<double> wgt(static_cast<std::size_t>(samples) + 1, 0.0);
    Vec2 prev = curve.eval(0.0);
    double tangent_floor = 1e-10 * rough_len / T;
    for (int i = 0; i <= samples; ++i) {
        double t = T * i / samples;
        t_tab[static_cast<std::size_t>(i)] = t;
        if (curve.derivative(t).norm() <= tangent_floor)
            throw std::runtime_error("irregular parametrization");
        if (i > 0) {
            Vec2 p = curve.eval(t);
            double ds = dist(prev, p);
            Vec2 mid = (prev + p) * 0.5;
            wgt[static_cast<std::size_t>(i)] =
                wgt[static_cast<std::size_t>(i - 1)] + ds / spacing(mid);
            prev = p;
        }
    }

    double total = wgt.back();
    int n = std::max(3, static_cast<int>(std::lround(total)));

    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    std::size_t cursor = 0;
    for (int j = 0; j < n; ++j) {
        double target = total * j / n;
        while (cursor + 1 < wgt.size() && wgt[cursor + 1] < target) ++cursor;
        double w0 = wgt[cursor], w1 = wgt[cursor + 1];
        double f = w1 > w0 ? (target - w0) / (w1 - w0) : 0.0;
        double t = t_tab[cursor] + f * (t_tab[cursor + 1] - t_tab[cursor]);
        pts.push_back(curve.eval(t));
    }
    return pts;
}

double min_separation_factor(const NodeSet& nodes) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            double d = dist(nodes.positions[i], nodes.positions[j]);
            double h = std::min(nodes.spacing[i], nodes.spacing[j]);
            best = std::min(best, d / h);
        }
    }
    return best;
}

} // namespace mesogrow::spatial
