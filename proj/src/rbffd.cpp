#include "mesogrow/rbffd.hpp"

#include <cmath>
#include <stdexcept>

namespace mesogrow::rbffd {

std::string op_name(Op op) {
    switch (op) {
        case Op::laplacian: return "laplacian";
        case Op::grad_x: return "grad_x";
        case Op::grad_y: return "grad_y";
        case Op::eval: return "eval";
    }
    return "?";
}

double phs_apply(Op op, const Vec2& center, const Vec2& node) {
    Vec2 d = center - node;
    double r = d.norm();
    switch (op) {
        case Op::eval: return r * r * r;
        case Op::grad_x: return 3.0 * r * d.x;
        case Op::grad_y: return 3.0 * r * d.y;
        case Op::laplacian: return 9.0 * r; // 2-d: phi'' + phi'/r = 6r + 3r
    }
    return 0.0;
}

int monomial_count(int m) { return (m + 1) * (m + 2) / 2; }

int stencil_size(int m) { return 2 * monomial_count(m); }

namespace {

// monomial exponent pairs of total degree <= m, graded order
void monomial_exponents(int m, std::vector<std::pair<int, int>>& out) {
    out.clear();
    for (int d = 0; d <= m; ++d)
        for (int i = d; i >= 0; --i) out.emplace_back(i, d - i);
}

double monomial_eval(int a, int b, const Vec2& p) {
    return std::pow(p.x, a) * std::pow(p.y, b);
}

// operator applied to x^a y^b, evaluated at point p
double monomial_apply(Op op, int a, int b, const Vec2& p) {
    switch (op) {
        case Op::eval:
            return monomial_eval(a, b, p);
        case Op::grad_x:
            return a == 0 ? 0.0 : a * monomial_eval(a - 1, b, p);
        case Op::grad_y:
            return b == 0 ? 0.0 : b * monomial_eval(a, b - 1, p);
        case Op::laplacian: {
            double s = 0.0;
            if (a >= 2) s += a * (a - 1) * monomial_eval(a - 2, b, p);
            if (b >= 2) s += b * (b - 1) * monomial_eval(a, b - 2, p);
            return s;
        }
    }
    return 0.0;
}

// rescaling exponent: operator in scaled coordinates picks up scale^order
int op_order(Op op) {
    switch (op) {
        case Op::eval: return 0;
        case Op::grad_x: return 1;
        case Op::grad_y: return 1;
        case Op::laplacian: return 2;
    }
    return 0;
}

} // namespace

StencilSystem::StencilSystem(std::span<const Vec2> stencil_nodes, int m) : m_(m) {
    n_ = static_cast<int>(stencil_nodes.size());
    int np = monomial_count(m);
    if (n_ < np) throw std::runtime_error("degenerate stencil");

    // shift to the stencil centroid-nearest node and scale by the stencil
    // radius to condition the monomial block
    origin_ = stencil_nodes[0];
    double rad = 0.0;
    for (const Vec2& p : stencil_nodes) rad = std::max(rad, dist(origin_, p));
    scale_ = rad > 0 ? rad : 1.0;

    local_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
        local_[static_cast<std::size_t>(i)] = (stencil_nodes[static_cast<std::size_t>(i)] - origin_) / scale_;

    std::vector<std::pair<int, int>> exps;
    monomial_exponents(m, exps);

    int dim = n_ + np;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j)
            A(i, j) = phs_apply(Op::eval, local_[static_cast<std::size_t>(i)],
                                local_[static_cast<std::size_t>(j)]);
        for (int j = 0; j < np; ++j) {
            double v = monomial_eval(exps[static_cast<std::size_t>(j)].first,
                                     exps[static_cast<std::size_t>(j)].second,
                                     local_[static_cast<std::size_t>(i)]);
            A(i, n_ + j) = v;
            A(n_ + j, i) = v;
        }
    }

    double norm_a = A.cwiseAbs().rowwise().sum().maxCoeff();
    lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(A);

    // cheap norm-based condition estimate: one solve against a ones vector
    Eigen::VectorXd probe = lu_.solve(Eigen::VectorXd::Ones(dim));
    double cond = norm_a * probe.cwiseAbs().maxCoeff();
    if (!std::isfinite(cond) || cond > 1e14) {
        n_ = 0;
        throw std::runtime_error("degenerate stencil");
    }
}

WeightSet StencilSystem::weights(const Vec2& center, Op op) const {
    if (!valid()) throw std::runtime_error("degenerate stencil");
    int np = monomial_count(m_);
    Vec2 z = (center - origin_) / scale_;

    std::vector<std::pair<int, int>> exps;
    monomial_exponents(m_, exps);

    Eigen::VectorXd rhs(n_ + np);
    for (int i = 0; i < n_; ++i)
        rhs[i] = phs_apply(op, z, local_[static_cast<std::size_t>(i)]);
    for (int j = 0; j < np; ++j)
        rhs[n_ + j] = monomial_apply(op, exps[static_cast<std::size_t>(j)].first,
                                     exps[static_cast<std::size_t>(j)].second, z);

    Eigen::VectorXd sol = lu_.solve(rhs);
    double rescale = std::pow(scale_, -op_order(op));
    WeightSet ws;
    ws.w.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) ws.w[static_cast<std::size_t>(i)] = sol[i] * rescale;
    return ws;
}

double StencilSystem::apply(const Vec2& center, Op op, std::span<const double> values) const {
    WeightSet ws = weights(center, op);
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += ws.w[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
    return s;
}

WeightSet compute_weights(std::span<const Vec2> stencil_nodes, const Vec2& center,
                          Op op, int m) {
    StencilSystem sys(stencil_nodes, m);
    return sys.weights(center, op);
}

DiscreteOperator assemble_operator(const spatial::NodeSet& nodes,
                                   const spatial::KDTree& tree, Op op, int m) {
    int n = stencil_size(m);
    if (static_cast<int>(nodes.size()) < n) throw std::runtime_error("insufficient nodes");
    DiscreteOperator out;
    out.op = op;
    out.rows.resize(nodes.size());
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::vector<int> st = tree.knn(nodes.positions[i], n);
        for (int j = 0; j < n; ++j)
            pts[static_cast<std::size_t>(j)] = nodes.positions[static_cast<std::size_t>(st[static_cast<std::size_t>(j)])];
        WeightSet ws;
        try {
            ws = compute_weights(pts, nodes.positions[i], op, m);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string(e.what()) + " at node " + std::to_string(i));
        }
        out.rows[i].stencil = std::move(st);
        out.rows[i].w = std::move(ws.w);
    }
    return out;
}

double shepard_interpolate(const Vec2& x, const spatial::KDTree& fit_tree,
                           std::span<const double> values, int n, double alpha) {
    std::vector<int> nb = fit_tree.knn(x, n);
    double wsum = 0.0, s = 0.0;
    for (int idx : nb) {
        double d = dist(x, fit_tree.point(idx));
        if (d == 0.0) return values[static_cast<std::size_t>(idx)];
        double w = std::pow(d, -alpha);
        wsum += w;
        s += w * values[static_cast<std::size_t>(idx)];
    }
    return s / wsum;
}

double rbffd_interpolate(const Vec2& x, const spatial::KDTree& tree,
                         std::span<const double> values, int m) {
    int n = std::min<int>(stencil_size(m), static_cast<int>(tree.size()));
    std::vector<int> nb = tree.knn(x, n);
    std::vector<Vec2> pts(nb.size());
    std::vector<double> vals(nb.size());
    for (std::size_t j = 0; j < nb.size(); ++j) {
        pts[j] = tree.point(nb[j]);
        vals[j] = values[static_cast<std::size_t>(nb[j])];
    }
    StencilSystem sys(pts, m);
    return sys.apply(x, Op::eval, vals);
}

double pu_interpolate(const Vec2& x, const spatial::KDTree& tree,
                      std::span<const double> values, std::span<const double> node_spacing,
                      int m, double radius_factor) {
    double r_max = 0.0;
    for (double h : node_spacing) r_max = std::max(r_max, radius_factor * h);
    std::vector<int> contributors;
    for (int idx : tree.radius(x, r_max)) {
        if (dist(x, tree.point(idx)) < radius_factor * node_spacing[static_cast<std::size_t>(idx)])
            contributors.push_back(idx);
    }
    if (contributors.empty()) return rbffd_interpolate(x, tree, values, m);

    int n = std::min<int>(stencil_size(m), static_cast<int>(tree.size()));
    double wsum = 0.0, s = 0.0;
    for (int idx : contributors) {
        const Vec2& xi = tree.point(idx);
        double ri = radius_factor * node_spacing[static_cast<std::size_t>(idx)];
        double d = dist(x, xi) / ri;
        double w = d == 0.0 ? 1e32 : 1.0 / (d * d); // Shepard weight on scaled distance

        // local interpolant centered on node idx, evaluated at x
        std::vector<int> nb = tree.knn(xi, n);
        std::vector<Vec2> pts(nb.size());
        std::vector<double> vals(nb.size());
        for (std::size_t j = 0; j < nb.size(); ++j) {
            pts[j] = tree.point(nb[j]);
            vals[j] = values[static_cast<std::size_t>(nb[j])];
        }
        StencilSystem sys(pts, m);
        double fi = sys.apply(x, Op::eval, vals);
        wsum += w;
        s += w * fi;
    }
    return s / wsum;
}

} // namespace mesogrow::rbffd
