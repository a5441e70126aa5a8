#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mesogrow/geometry.hpp"
#include "mesogrow/spatial.hpp"

namespace mesogrow::rbffd {

enum class Op { laplacian, grad_x, grad_y, eval };

std::string op_name(Op op);

/// Cubic polyharmonic spline r^3: the operator applied analytically at
/// `center` to phi(|x - node|).
double phs_apply(Op op, const Vec2& center, const Vec2& node);

/// Number of monomials of total degree <= m in 2-d.
int monomial_count(int m);

/// Recommended stencil size n = 2 * binom(m + 2, 2).
int stencil_size(int m);

struct WeightSet {
    std::vector<double> w; // aligned with the stencil's node list
};

/// Solves the PHS+monomial saddle system for the operator weights at
/// `center` over the given stencil nodes. Local coordinates are shifted to
/// the center and scaled before assembly. Throws "degenerate stencil" when
/// the condition estimate exceeds 1e14.
WeightSet compute_weights(std::span<const Vec2> stencil_nodes, const Vec2& center,
                          Op op, int m);

/// Reusable factorization of the saddle system for one fixed stencil;
/// weights for any center/operator then cost a pair of triangular solves.
class StencilSystem {
public:
    StencilSystem() = default;
    StencilSystem(std::span<const Vec2> stencil_nodes, int m);

    bool valid() const { return n_ > 0; }
    int n() const { return n_; }

    /// Weights for `op` at `center` (center need not be a stencil node).
    WeightSet weights(const Vec2& center, Op op) const;

    /// Interpolate/evaluate: weights(center, op) dotted with nodal values.
    double apply(const Vec2& center, Op op, std::span<const double> values) const;

private:
    int n_ = 0;
    int m_ = 0;
    double scale_ = 1.0;
    Vec2 origin_;
    std::vector<Vec2> local_; // shifted+scaled stencil nodes
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct OperatorRow {
    std::vector<int> stencil; // node indices, nearest-first
    std::vector<double> w;
};

/// One weight row per node over its n-nearest stencil.
struct DiscreteOperator {
    Op op = Op::laplacian;
    std::vector<OperatorRow> rows;

    double apply_at(int node, std::span<const double> field) const {
        const OperatorRow& r = rows[static_cast<std::size_t>(node)];
        double s = 0.0;
        for (std::size_t j = 0; j < r.stencil.size(); ++j)
            s += r.w[j] * field[static_cast<std::size_t>(r.stencil[j])];
        return s;
    }
};

/// Assembles `op` for every node of the set using n = 2*binom(m+2,2)
/// nearest-node stencils. The tree must index exactly nodes.positions.
DiscreteOperator assemble_operator(const spatial::NodeSet& nodes,
                                   const spatial::KDTree& tree, Op op, int m);

/// Inverse-distance weighted average over the n nearest fit points.
double shepard_interpolate(const Vec2& x, const spatial::KDTree& fit_tree,
                           std::span<const double> values, int n, double alpha = 2.0);

/// Local RBF-FD interpolant at x over the n(m) nearest nodes.
double rbffd_interpolate(const Vec2& x, const spatial::KDTree& tree,
                         std::span<const double> values, int m);

/// Partition-of-unity blend of per-node local RBF-FD interpolants with
/// compact support radii radius_factor * h_i. Falls back to the plain local
/// interpolant when no node's support covers x.
double pu_interpolate(const Vec2& x, const spatial::KDTree& tree,
                      std::span<const double> values, std::span<const double> node_spacing,
                      int m, double radius_factor = 2.0);

} // namespace mesogrow::rbffd
