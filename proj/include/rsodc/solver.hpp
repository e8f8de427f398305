#ifndef RSODC_SOLVER_HPP
#define RSODC_SOLVER_HPP

#include "rsodc/admm_scoring.hpp"
#include "rsodc/core.hpp"
#include "rsodc/fusion_graph.hpp"
#include "rsodc/kmeans.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rsodc {

enum class FitStatus { converged, max_outer, stalled };
std::string to_string(FitStatus status);

struct Timings {
    double b_update = 0.0;
    double y_update = 0.0;
    double kmeans = 0.0;
    double total = 0.0;
};

struct FitResult {
    Matrix B_hat;      // p x d
    Matrix Y_hat;      // n x d
    Matrix embedding;  // Hn X B_hat
    Partition labels;  // 1..k
    CentroidSet centroids;
    /// Initial objective, before any update.
    double initial_objective = 0.0;
    /// Objective after each outer cycle.
    std::vector<double> objective_trace;
    int outer_iters = 0;
    /// Inner ADMM iterations per outer cycle (empty for SODC and tandem).
    std::vector<int> inner_iters;
    int b_sweeps = 0;
    bool converged = false;
    FitStatus status = FitStatus::max_outer;
    std::string method;
    Timings timings;
    std::vector<std::string> diagnostics;

    /// Outer cycles plus inner ADMM iterations.
    int convergence_count() const;
};

/// Value of each term of the RSODC objective.
struct ObjectiveTerms {
    double fit = 0.0;
    double ridge = 0.0;
    double group = 0.0;
    double fusion = 0.0;
    double total() const { return fit + ridge + group + fusion; }
};

/**
 * (1/2)||Y - Hn X B||_F^2 + eta2 ||B||_F^2 + eta1 sum_j ||beta_j|| + gamma sum_l alpha_l ||y_i - y_j||.
 * `xc` must already be centered.
 */
ObjectiveTerms objective_terms(const Matrix& xc, const SolverParams& params, const Matrix& b, const Matrix& y,
                               const FusionGraph& graph);

/// Centers the instance data and evaluates the full objective.
double objective(const ProblemInstance& instance, const Matrix& b, const Matrix& y, const FusionGraph& graph);

/// Alternating B / Y minimization followed by k-means on Hn X B.
FitResult fit_rsodc(const ProblemInstance& instance, const FusionGraph& graph, std::uint64_t seed);

/// Same loop with the fusion term removed: Y is the Procrustes factor of Hn X B.
FitResult fit_sodc(const ProblemInstance& instance, std::uint64_t seed);

/// PCA to k - 1 components followed by k-means.
FitResult tandem_baseline(const Matrix& x, int k, std::uint64_t seed, int restarts = kKMeansRestartsDefault);

struct ConvexClusteringResult {
    /// Per-subject centroids (n x p).
    Matrix M;
    /// Distinct centroids after merging, in label order.
    CentroidSet centroids;
    Partition labels;
    int iterations = 0;
    bool converged = false;
};

inline constexpr double kMergeTolerance = 1e-6;

/**
 * ADMM for min (1/2)||X - M||^2 + gamma sum_l alpha_l ||m_i - m_j|| over the graph edges.
 * Subjects are merged when their centroids differ by at most kMergeTolerance times the
 * data scale (largest row norm of centered X, or 1).
 */
ConvexClusteringResult convex_clustering(const Matrix& x, const FusionGraph& graph, double gamma, double rho,
                                         double eps = 1e-8, int max_iter = 20000);

}  // namespace rsodc

#endif
