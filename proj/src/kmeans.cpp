#include "rsodc/kmeans.hpp"

#include <limits>
#include <algorithm>
#include <numeric>

namespace rsodc {

namespace {

struct Run {
    std::vector<int> assign;  // 0-based
    Matrix centers;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

Matrix seed_plus_plus(const Matrix& x, int k, Rng& rng)
{
    const Index n = x.rows();
    Matrix centers(k, x.cols());
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    std::uniform_int_distribution<Index> first(0, n - 1);
    Index pick = first(rng);
    centers.row(0) = x.row(pick);
    taken[static_cast<std::size_t>(pick)] = 1;

    Vector d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        if (total > 0.0) {
            const double target = unif(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target && d2(i) > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All remaining points coincide with a center: take any unused index.
            std::vector<Index> free;
            for (Index i = 0; i < n; ++i)
                if (!taken[static_cast<std::size_t>(i)]) free.push_back(i);
            std::uniform_int_distribution<std::size_t> any(0, free.size() - 1);
            pick = free[any(rng)];
        }
        centers.row(c) = x.row(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
        d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

double assign_points(const Matrix& x, const Matrix& centers, std::vector<int>& assign)
{
    double inertia = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Index c = 0; c < centers.rows(); ++c) {
            const double dist = (x.row(i) - centers.row(c)).squaredNorm();
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
        assign[static_cast<std::size_t>(i)] = arg;
        inertia += best;
    }
    return inertia;
}

double cost(const Matrix& x, const Matrix& centers, const std::vector<int>& assign)
{
    double total = 0.0;
    for (Index i = 0; i < x.rows(); ++i) total += (x.row(i) - centers.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
    return total;
}

/// Recomputes means; empty clusters steal the worst-fitted point of a cluster with >= 2 members.
void update_centers(const Matrix& x, Matrix& centers, std::vector<int>& assign)
{
    const Index k = centers.rows();
    for (;;) {
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (int a : assign) ++counts[static_cast<std::size_t>(a)];
        Index empty = -1;
        for (Index c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] == 0) {
                empty = c;
                break;
            }
        if (empty < 0) break;
        double worst = -1.0;
        Index victim = -1;
        for (Index i = 0; i < x.rows(); ++i) {
            const int a = assign[static_cast<std::size_t>(i)];
            if (counts[static_cast<std::size_t>(a)] < 2) continue;
            const double dist = (x.row(i) - centers.row(a)).squaredNorm();
            if (dist > worst) {
                worst = dist;
                victim = i;
            }
        }
        assign[static_cast<std::size_t>(victim)] = static_cast<int>(empty);
        centers.row(empty) = x.row(victim);
    }
    Matrix sums = Matrix::Zero(k, x.cols());
    Vector counts = Vector::Zero(k);
    for (Index i = 0; i < x.rows(); ++i) {
        sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
        counts(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Index c = 0; c < k; ++c) centers.row(c) = sums.row(c) / counts(c);
}

Run lloyd(const Matrix& x, int k, Rng& rng, int max_iter)
{
    Run run;
    run.centers = seed_plus_plus(x, k, rng);
    run.assign.assign(static_cast<std::size_t>(x.rows()), 0);
    run.inertia = assign_points(x, run.centers, run.assign);
    run.trace.push_back(run.inertia);
    for (int it = 0; it < max_iter; ++it) {
        update_centers(x, run.centers, run.assign);
        std::vector<int> next(run.assign.size());
        const double inertia = assign_points(x, run.centers, next);
        ++run.iterations;
        const bool same = next == run.assign;
        // Ties can reassign a point without lowering the cost; keep the old labels then.
        if (same || inertia >= cost(x, run.centers, run.assign)) {
            run.inertia = cost(x, run.centers, run.assign);
            run.trace.push_back(run.inertia);
            break;
        }
        run.assign = std::move(next);
        run.inertia = inertia;
        run.trace.push_back(run.inertia);
    }
    return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed, int max_iter)
{
    if (k < 1) throw ParameterError("kmeans: k must be positive");
    if (k > points.rows()) throw ParameterError("kmeans: k exceeds the number of points");
    if (restarts < 1) throw ParameterError("kmeans: restarts must be positive");
    require_finite(points, "kmeans input");

    Run best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        Run run = lloyd(points, k, rng, max_iter);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    KMeansResult out;
    out.labels.resize(best.assign.size());
    for (std::size_t i = 0; i < best.assign.size(); ++i) out.labels[i] = best.assign[i] + 1;
    out.centroids.centroids = best.centers;
    out.centroids.inertia = best.inertia;
    out.iterations = best.iterations;
    out.inertia_trace = std::move(best.trace);
    return out;
}

double within_cluster_ss(const Matrix& points, const Partition& labels)
{
    if (static_cast<Index>(labels.size()) != points.rows())
        throw DimensionError("within_cluster_ss: label count differs from rows");
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    Matrix sums = Matrix::Zero(k, points.cols());
    Vector counts = Vector::Zero(k);
    for (Index i = 0; i < points.rows(); ++i) {
        sums.row(labels[static_cast<std::size_t>(i)] - 1) += points.row(i);
        counts(labels[static_cast<std::size_t>(i)] - 1) += 1.0;
    }
    double total = 0.0;
    for (Index i = 0; i < points.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)] - 1;
        total += (points.row(i) - sums.row(c) / counts(c)).squaredNorm();
    }
    return total;
}

}  // namespace rsodc
