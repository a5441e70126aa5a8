#include "mesogrow/envelope.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <Eigen/Sparse>

#include "mesogrow/kdtree.hpp"

namespace mesogrow::envelope {

namespace {

int mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
}

int floor_div(int a, int n) {
    int q = a / n;
    if ((a % n != 0) && ((a < 0) != (n < 0))) --q;
    return q;
}

double signed_area(const std::vector<Vec2>& pts, const std::vector<int>& order) {
    double a = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Vec2& p = pts[static_cast<std::size_t>(order[i])];
        const Vec2& q = pts[static_cast<std::size_t>(order[(i + 1) % order.size()])];
        a += p.cross(q);
    }
    return 0.5 * a;
}

} // namespace

std::vector<int> order_nodes(const std::vector<Vec2>& points) {
    if (points.size() < 3) throw std::runtime_error("degenerate boundary");
    spatial::KDTree tree(points);
    std::size_t n = points.size();
    std::vector<char> used(n, 0);
    std::vector<int> order;
    order.reserve(n);
    int current = 0;
    used[0] = 1;
    order.push_back(0);
    while (order.size() < n) {
        // nearest not-yet-ordered neighbor; widen k until one is found
        int next = -1;
        for (int k = 2; next < 0; k = std::min<int>(2 * k, static_cast<int>(n))) {
            for (int idx : tree.knn(points[static_cast<std::size_t>(current)], k)) {
                if (!used[static_cast<std::size_t>(idx)]) {
                    next = idx;
                    break;
                }
            }
            if (k == static_cast<int>(n)) break;
        }
        used[static_cast<std::size_t>(next)] = 1;
        order.push_back(next);
        current = next;
    }
    if (signed_area(points, order) < 0.0)
        std::reverse(order.begin() + 1, order.end());
    return order;
}

double ParametricCurve::knot(int j) const {
    int n = static_cast<int>(knots_.size());
    return knots_[static_cast<std::size_t>(mod(j, n))] + period_ * floor_div(j, n);
}

Vec2 ParametricCurve::ctrl(int j) const {
    return ctrl_[static_cast<std::size_t>(mod(j, static_cast<int>(ctrl_.size())))];
}

int ParametricCurve::find_span(double t) const {
    int n = static_cast<int>(knots_.size());
    double t0 = knots_[0];
    int m = static_cast<int>(std::floor((t - t0) / period_));
    double tr = t - m * period_;
    // guard rounding at the period boundary
    if (tr < t0) { tr += period_; --m; }
    if (tr >= t0 + period_) { tr -= period_; ++m; }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), tr);
    int s0 = static_cast<int>(it - knots_.begin()) - 1;
    return s0 + m * n;
}

// Nonvanishing B-spline basis functions and derivatives at t for span s:
// out[(d)*(k+1) + r] is the d-th derivative of the basis of ctrl(s-k+r).
void ParametricCurve::basis(double t, int s, double* out, int nderiv) const {
    const int p = degree_;
    double ndu[5][5], left[5], right[5];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - knot(s + 1 - j);
        right[j] = knot(s + j) - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int r = 0; r <= p; ++r) out[r] = ndu[r][p];
    if (nderiv == 0) return;

    double a[2][5];
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int d = 1; d <= nderiv; ++d) {
            double dv = 0.0;
            int rk = r - d, pk = p - d;
            if (r >= d) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                dv = a[s2][0] * ndu[rk][pk];
            }
            int j1 = rk >= -1 ? 1 : -rk;
            int j2 = r - 1 <= pk ? d - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                dv += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][d] = -a[s1][d - 1] / ndu[pk + 1][r];
                dv += a[s2][d] * ndu[r][pk];
            }
            out[d * (p + 1) + r] = dv;
            std::swap(s1, s2);
        }
    }
    double f = static_cast<double>(p);
    for (int d = 1; d <= nderiv; ++d) {
        for (int r = 0; r <= p; ++r) out[d * (p + 1) + r] *= f;
        f *= static_cast<double>(p - d);
    }
}

Vec2 ParametricCurve::eval(double t) const {
    int s = find_span(t);
    double b[5];
    basis(t, s, b, 0);
    Vec2 out{0.0, 0.0};
    for (int r = 0; r <= degree_; ++r) out += b[r] * ctrl(s - degree_ + r);
    return out;
}

Vec2 ParametricCurve::derivative(double t, int order) const {
    if (order > degree_) return {0.0, 0.0};
    int s = find_span(t);
    double b[3 * 5];
    basis(t, s, b, order);
    Vec2 out{0.0, 0.0};
    for (int r = 0; r <= degree_; ++r)
        out += b[order * (degree_ + 1) + r] * ctrl(s - degree_ + r);
    return out;
}

Vec2 ParametricCurve::normal_at(double t) const {
    Vec2 d = derivative(t);
    double n = d.norm();
    if (n < 1e-12 * period_ / std::max(1, node_count()))
        throw std::runtime_error("irregular point");
    return Vec2{-d.y, d.x} * (static_cast<double>(orient_) / n);
}

double ParametricCurve::closest_param(const Vec2& x) const {
    int grid = std::max(512, 4 * node_count());
    double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        double t = period_ * i / grid;
        double d = dist2(x, eval(t));
        if (d < best_d) { best_d = d; best_t = t; }
    }
    double step = period_ / grid;
    double lo = best_t - step, hi = best_t + step;
    // golden-section refinement of |x - gamma(t)|^2
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = dist2(x, eval(c)), fd = dist2(x, eval(d));
    for (int it = 0; it < 100 && (b - a) > 1e-14 * period_; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = dist2(x, eval(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = dist2(x, eval(d));
        }
    }
    double t = 0.5 * (a + b);
    t = std::fmod(t, period_);
    if (t < 0) t += period_;
    return t;
}

bool ParametricCurve::is_inside(const Vec2& x) const {
    double t = closest_param(x);
    double dot = (x - eval(t)).dot(normal_at(t));
    if (std::abs(dot) < 1e-12) return false; // on the curve
    return dot < 0.0;
}

double ParametricCurve::length() const {
    const int segments = 5000;
    double len = 0.0;
    Vec2 prev = eval(0.0);
    for (int i = 1; i <= segments; ++i) {
        Vec2 p = eval(period_ * i / segments);
        len += dist(prev, p);
        prev = p;
    }
    return len;
}

void ParametricCurve::calibrate_orientation(const Vec2& interior_witness) {
    orient_ = 1;
    double t = closest_param(interior_witness);
    double dot = (interior_witness - eval(t)).dot(normal_at(t));
    orient_ = dot < 0.0 ? 1 : -1;
}

void ParametricCurve::write_csv(const std::string& path, int samples) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,x,y,nx,ny\n";
    out.precision(17);
    for (int i = 0; i < samples; ++i) {
        double t = period_ * i / samples;
        Vec2 p = eval(t);
        Vec2 n = normal_at(t);
        out << t << ',' << p.x << ',' << p.y << ',' << n.x << ',' << n.y << '\n';
    }
}

ParametricCurve fit_spline(const std::vector<Vec2>& ordered_points, int k) {
    if (k < 1 || k > 4) throw std::runtime_error("unsupported spline degree");
    int n = static_cast<int>(ordered_points.size());
    if (n < 3) throw std::runtime_error("degenerate boundary");

    ParametricCurve c;
    c.degree_ = std::min(k, n - 1); // a k-degree closed spline needs k+1 points
    k = c.degree_;
    c.params_.resize(static_cast<std::size_t>(n));
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
        c.params_[static_cast<std::size_t>(i)] = t;
        const Vec2& a = ordered_points[static_cast<std::size_t>(i)];
        const Vec2& b = ordered_points[static_cast<std::size_t>((i + 1) % n)];
        double d = dist(a, b);
        if (d < 1e-300) throw std::runtime_error("coincident nodes");
        t += d;
    }
    c.period_ = t;

    // knots at data parameters for odd degree, at midpoints for even degree
    c.knots_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double ui = c.params_[static_cast<std::size_t>(i)];
        if (k % 2 == 1) {
            c.knots_[static_cast<std::size_t>(i)] = ui;
        } else {
            double un = i + 1 < n ? c.params_[static_cast<std::size_t>(i + 1)] : c.period_;
            c.knots_[static_cast<std::size_t>(i)] = 0.5 * (ui + un);
        }
    }
    c.ctrl_.assign(static_cast<std::size_t>(n), Vec2{});

    // periodic collocation system: gamma(u_i) = p_i
    Eigen::SparseMatrix<double> A(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k + 1));
    for (int i = 0; i < n; ++i) {
        double ui = c.params_[static_cast<std::size_t>(i)];
        int s = c.find_span(ui);
        double b[5];
        c.basis(ui, s, b, 0);
        for (int r = 0; r <= k; ++r) {
            int col = mod(s - k + r, n);
            if (b[r] != 0.0) trips.emplace_back(i, col, b[r]);
        }
    }
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("spline collocation failed");

    Eigen::VectorXd rx(n), ry(n);
    for (int i = 0; i < n; ++i) {
        rx[i] = ordered_points[static_cast<std::size_t>(i)].x;
        ry[i] = ordered_points[static_cast<std::size_t>(i)].y;
    }
    Eigen::VectorXd cx = lu.solve(rx), cy = lu.solve(ry);
    for (int i = 0; i < n; ++i)
        c.ctrl_[static_cast<std::size_t>(i)] = {cx[i], cy[i]};

    Vec2 centroid{0.0, 0.0};
    for (const Vec2& p : ordered_points) centroid += p;
    c.calibrate_orientation(centroid / static_cast<double>(n));
    return c;
}

ShapeMetrics shape_metrics(const ParametricCurve& curve, const Vec2& center) {
    ShapeMetrics m;
    int n = curve.node_count();
    m.min_radius = std::numeric_limits<double>::infinity();
    m.max_radius = 0.0;
    m.max_angle_distortion = -std::numeric_limits<double>::infinity();
    m.min_angle_distortion = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double t = curve.node_param(i);
        Vec2 x = curve.eval(t);
        Vec2 nrm = curve.normal_at(t);
        double r = dist(x, center);
        m.mean_radius += r;
        m.min_radius = std::min(m.min_radius, r);
        m.max_radius = std::max(m.max_radius, r);
        double d = wrap_angle(polar_angle(nrm) - polar_angle(x - center));
        m.max_angle_distortion = std::max(m.max_angle_distortion, d);
        m.min_angle_distortion = std::min(m.min_angle_distortion, d);
    }
    m.mean_radius /= static_cast<double>(n);
    return m;
}

Vec2 Grain::centroid() const {
    Vec2 c{0.0, 0.0};
    for (const Vec2& p : nodes) c += p;
    return c / static_cast<double>(nodes.size());
}

void Grain::refit(int spline_degree) {
    curve = fit_spline(nodes, spline_degree);
}

} // namespace mesogrow::envelope
