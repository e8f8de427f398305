#ifndef RSODC_FUSION_GRAPH_HPP
#define RSODC_FUSION_GRAPH_HPP

#include "rsodc/core.hpp"

#include <vector>

namespace rsodc {

/// Pair of subjects l = (i, j), 0-based, i < j.
struct Edge {
    Index i;
    Index j;
    bool operator==(const Edge&) const = default;
};

inline constexpr double kTauDefault = 0.1;
inline constexpr int kDeltaDefault = 25;
inline constexpr double kOmegaFloor = 1e-12;

/**
 * Fusion graph over subjects: the edge set with positive kernel weights, the
 * quadratic matrix C = (rho/2) sum_l g_l g_l^T (unweighted incidence) and the
 * majorization constant omega >= lambda_max(C).
 *
 * The alpha weights only enter the fusion penalty and the V-update threshold;
 * C is assembled from the bare incidence vectors.
 */
struct FusionGraph {
    Index n = 0;
    std::vector<Edge> edges;
    std::vector<double> alpha;
    double tau = kTauDefault;
    int delta = kDeltaDefault;
    double rho = 0.0;
    Matrix C;
    double omega = kOmegaFloor;

    Index edge_count() const { return static_cast<Index>(edges.size()); }
    bool has_quadratic() const { return C.rows() == n && n > 0; }
};

/// Symmetric indicator over subject pairs.
class PairRelation {
public:
    explicit PairRelation(Index n) : n_(n), bits_(static_cast<std::size_t>(n * n), 0) {}

    Index size() const { return n_; }
    bool operator()(Index i, Index j) const { return bits_[static_cast<std::size_t>(i * n_ + j)] != 0; }
    void set(Index i, Index j)
    {
        bits_[static_cast<std::size_t>(i * n_ + j)] = 1;
        bits_[static_cast<std::size_t>(j * n_ + i)] = 1;
    }
    Index count_pairs() const;

private:
    Index n_;
    std::vector<unsigned char> bits_;
};

/// Union k-nearest-neighbour indicator; distance ties go to the smaller index.
PairRelation knn_indicator(const Matrix& x, int delta);

/// Gaussian-kernel k-NN weights; edges sorted by (i, j), zero weights dropped.
FusionGraph compute_weights(const Matrix& x, double tau, int delta);

Vector incidence_vector(const Edge& edge, Index n);

/// Fills C and omega. An empty edge set yields C = 0 and omega = kOmegaFloor.
FusionGraph build_quadratic(FusionGraph graph, double rho);

/// compute_weights followed by build_quadratic.
FusionGraph build_fusion_graph(const Matrix& x, double tau, int delta, double rho);

/// Graph over n subjects without edges (no fusion penalty).
FusionGraph empty_graph(Index n, double rho);

/// C * Q evaluated edge-wise in O(|edges| * cols).
Matrix apply_quadratic(const FusionGraph& graph, const Matrix& q);

}  // namespace rsodc

#endif
