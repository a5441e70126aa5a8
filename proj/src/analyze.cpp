#include "mesogrow/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace mesogrow::analyze {

namespace {

Vec2 centroid(const std::vector<Vec2>& pts)
{
    Vec2 c{0, 0};
    for (const Vec2& p : pts) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= static_cast<double>(pts.size());
    c.y /= static_cast<double>(pts.size());
    return c;
}

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b)
{
    Vec2 ab{b.x - a.x, b.y - a.y};
    Vec2 ap{p.x - a.x, p.y - a.y};
    double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0 ? std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0) : 0.0;
    Vec2 q{a.x + t * ab.x, a.y + t * ab.y};
    return dist(p, q);
}

struct FoldedQuadrant {
    std::vector<Vec2> points;                  // folded into the first quadrant
    std::vector<std::pair<Vec2, Vec2>> segs;   // folded curve segments
};

double dist_to_polyline(const Vec2& p, const FoldedQuadrant& ref)
{
    double best = std::numeric_limits<double>::max();
    for (const auto& [a, b] : ref.segs)
        best = std::min(best, point_segment_dist(p, a, b));
    return best;
}

} // namespace

AnisotropyReport analyze_anisotropy(const std::vector<Vec2>& envelope_points, double h_e)
{
    const std::size_t n = envelope_points.size();
    if (n < 12)
        throw std::runtime_error("too few samples");
    Vec2 c = centroid(envelope_points);

    // quadrant index and fold (rotation by -q*90 degrees about the centroid)
    std::vector<int> quad(n);
    std::vector<Vec2> folded(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 v{envelope_points[i].x - c.x, envelope_points[i].y - c.y};
        double th = std::atan2(v.y, v.x);
        if (th < 0) th += 2 * M_PI;
        int q = std::min(3, static_cast<int>(th / (M_PI / 2)));
        quad[i] = q;
        switch (q) {
            case 0: folded[i] = v; break;
            case 1: folded[i] = {v.y, -v.x}; break;
            case 2: folded[i] = {-v.x, -v.y}; break;
            default: folded[i] = {-v.y, v.x}; break;
        }
    }

    // folded sub-polylines: keep segments whose endpoints are curve-adjacent
    // and fall in the same quadrant, so non-star-shaped arcs stay intact
    FoldedQuadrant fq[4];
    for (std::size_t i = 0; i < n; ++i) {
        fq[quad[i]].points.push_back(folded[i]);
        std::size_t j = (i + 1) % n;
        if (quad[j] == quad[i])
            fq[quad[i]].segs.emplace_back(folded[i], folded[j]);
    }
    for (const FoldedQuadrant& q : fq)
        if (q.points.size() < 3 || q.segs.empty())
            throw std::runtime_error("too few samples");

    AnisotropyReport rep;
    rep.max_abs_error.assign(3, 0.0);
    rep.max_rel_error.assign(3, 0.0);
    for (int q = 1; q < 4; ++q) {
        auto k = static_cast<std::size_t>(q - 1);
        auto account = [&](const Vec2& p, const FoldedQuadrant& ref) {
            double e = dist_to_polyline(p, ref);
            rep.max_abs_error[k] = std::max(rep.max_abs_error[k], e);
            rep.max_rel_error[k] = std::max(rep.max_rel_error[k], e / p.norm());
        };
        for (const Vec2& p : fq[q].points) account(p, fq[0]);
        for (const Vec2& p : fq[0].points) account(p, fq[static_cast<std::size_t>(q)]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        rep.e_max = std::max(rep.e_max, rep.max_abs_error[k]);
        rep.max_rel = std::max(rep.max_rel, rep.max_rel_error[k]);
    }
    rep.e_max_over_he = rep.e_max / h_e;
    return rep;
}

bool has_center_depression(const std::vector<Vec2>& envelope_points)
{
    Vec2 c = centroid(envelope_points);
    const double diag = M_PI / 4;
    const Vec2 d{std::cos(diag), std::sin(diag)};

    // the arc near the first-quadrant diagonal, as a graph u(w): u along the
    // diagonal, w transverse; a convex envelope gives a dome (u'' < 0), a
    // center depression bends the arc the other way at w = 0
    std::vector<double> w, u;
    for (const Vec2& p : envelope_points) {
        Vec2 q{p.x - c.x, p.y - c.y};
        double th = std::atan2(q.y, q.x);
        if (std::abs(wrap_angle(th - diag)) > 0.35) continue;
        u.push_back(q.x * d.x + q.y * d.y);
        w.push_back(d.x * q.y - d.y * q.x);
    }
    if (w.size() < 8) throw std::runtime_error("too few samples");

    // least-squares quartic u(w); its curvature at the diagonal decides
    Eigen::MatrixXd A(static_cast<Eigen::Index>(w.size()), 5);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
        double pw = 1.0;
        for (int j = 0; j < 5; ++j) {
            A(static_cast<Eigen::Index>(i), j) = pw;
            pw *= w[i];
        }
        rhs(static_cast<Eigen::Index>(i)) = u[i];
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
    double upp0 = 2 * coef(2); // u''(0)
    return upp0 > 0.02;
}

ConvergenceRow read_run_summary(const std::string& run_dir, double t_snapshot)
{
    std::ifstream in(run_dir + "/metrics.csv");
    if (!in) throw std::runtime_error("cannot open " + run_dir + "/metrics.csv");
    std::string line;
    std::getline(in, line); // header
    ConvergenceRow best;
    double best_dt = std::numeric_limits<double>::max();
    bool found = false;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(is, field, ','))
            vals.push_back(std::stod(field));
        if (vals.size() < 7) continue;
        double dt = std::abs(vals[1] - t_snapshot);
        if (dt <= best_dt) {
            best_dt = dt;
            best.tip_x = vals[2];
            best.envelope_length = vals[4];
            best.node_count = static_cast<std::size_t>(vals[5]);
            found = true;
        }
    }
    if (!found) throw std::runtime_error("empty metrics in " + run_dir);
    return best;
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(12);
    out << "method,h_e,tip_x,envelope_length,node_count\n";
    for (const ConvergenceRow& r : rows)
        out << r.method << ',' << r.h_e << ',' << r.tip_x << ',' << r.envelope_length << ','
            << r.node_count << '\n';
}

} // namespace mesogrow::analyze
