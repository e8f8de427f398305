#ifndef RSODC_KMEANS_HPP
#define RSODC_KMEANS_HPP

#include "rsodc/core.hpp"

#include <cstdint>
#include <vector>

namespace rsodc {

struct CentroidSet {
    Matrix centroids;  // k x d
    double inertia = 0.0;
};

struct KMeansResult {
    Partition labels;  // 1..k
    CentroidSet centroids;
    int iterations = 0;
    /// Inertia after seeding and after every Lloyd pass of the winning restart.
    std::vector<double> inertia_trace;
};

inline constexpr int kKMeansRestartsDefault = 20;

/// Lloyd iterations from k-means++ seeds; the restart with the smallest inertia wins.
/// Empty clusters take the point farthest from its current centroid.
KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed, int max_iter = 300);

/// Within-cluster sum of squares of `points` under `labels` (1-based).
double within_cluster_ss(const Matrix& points, const Partition& labels);

}  // namespace rsodc

#endif
