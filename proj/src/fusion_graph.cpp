#include "rsodc/fusion_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsodc {

Index PairRelation::count_pairs() const
{
    Index count = 0;
    for (Index i = 0; i < n_; ++i)
        for (Index j = i + 1; j < n_; ++j)
            if ((*this)(i, j)) ++count;
    return count;
}

namespace {

Matrix squared_distances(const Matrix& x)
{
    const Index n = x.rows();
    Matrix d2(n, n);
    for (Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).squaredNorm();
            d2(i, j) = v;
            d2(j, i) = v;
        }
    }
    return d2;
}

PairRelation knn_from_distances(const Matrix& d2, int delta)
{
    const Index n = d2.rows();
    PairRelation rel(n);
    std::vector<Index> order(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
        order.clear();
        for (Index j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
            return a < b;
        });
        for (int r = 0; r < delta; ++r) rel.set(i, order[static_cast<std::size_t>(r)]);
    }
    return rel;
}

void check_delta(Index n, int delta)
{
    if (n < 2) throw DimensionError("fusion graph needs at least 2 subjects");
    if (delta < 1) throw ParameterError("delta must be at least 1");
    if (delta >= n) throw ParameterError("delta must be below the number of subjects");
}

}  // namespace

PairRelation knn_indicator(const Matrix& x, int delta)
{
    check_delta(x.rows(), delta);
    require_finite(x, "knn_indicator input");
    return knn_from_distances(squared_distances(x), delta);
}

FusionGraph compute_weights(const Matrix& x, double tau, int delta)
{
    check_delta(x.rows(), delta);
    if (!(tau >= 0)) throw ParameterError("tau must be non-negative");
    require_finite(x, "compute_weights input");

    const Matrix d2 = squared_distances(x);
    const PairRelation rel = knn_from_distances(d2, delta);

    FusionGraph graph;
    graph.n = x.rows();
    graph.tau = tau;
    graph.delta = delta;
    for (Index i = 0; i < graph.n; ++i) {
        for (Index j = i + 1; j < graph.n; ++j) {
            if (!rel(i, j)) continue;
            const double a = std::exp(-tau * d2(i, j));
            if (a > 0.0) {
                graph.edges.push_back({i, j});
                graph.alpha.push_back(a);
            }
        }
    }
    return graph;
}

Vector incidence_vector(const Edge& edge, Index n)
{
    if (edge.i == edge.j) throw ContractError("incidence vector of a self-loop");
    if (edge.i < 0 || edge.j < 0 || edge.i >= n || edge.j >= n)
        throw DimensionError("edge endpoint out of range");
    Vector g = Vector::Zero(n);
    g(edge.i) = 1.0;
    g(edge.j) = -1.0;
    return g;
}

FusionGraph build_quadratic(FusionGraph graph, double rho)
{
    if (!(rho > 0)) throw ParameterError("rho must be positive");
    graph.rho = rho;
    graph.C = Matrix::Zero(graph.n, graph.n);
    const double half = rho / 2.0;
    for (const Edge& e : graph.edges) {
        graph.C(e.i, e.i) += half;
        graph.C(e.j, e.j) += half;
        graph.C(e.i, e.j) -= half;
        graph.C(e.j, e.i) -= half;
    }
    if (graph.edges.empty()) {
        graph.omega = kOmegaFloor;
    } else {
        // Inflate so omega*I - C stays PSD under rounding.
        graph.omega = std::max(top_eigenvalue_sym(graph.C) * (1.0 + 1e-8), kOmegaFloor);
    }
    return graph;
}

FusionGraph build_fusion_graph(const Matrix& x, double tau, int delta, double rho)
{
    return build_quadratic(compute_weights(x, tau, delta), rho);
}

FusionGraph empty_graph(Index n, double rho)
{
    FusionGraph graph;
    graph.n = n;
    graph.delta = 0;
    graph.tau = 0.0;
    return build_quadratic(std::move(graph), rho);
}

Matrix apply_quadratic(const FusionGraph& graph, const Matrix& q)
{
    if (q.rows() != graph.n) throw DimensionError("apply_quadratic: row mismatch");
    Matrix out = Matrix::Zero(q.rows(), q.cols());
    const double half = graph.rho / 2.0;
    for (const Edge& e : graph.edges) {
        const Eigen::RowVectorXd diff = half * (q.row(e.i) - q.row(e.j));
        out.row(e.i) += diff;
        out.row(e.j) -= diff;
    }
    return out;
}

}  // namespace rsodc
