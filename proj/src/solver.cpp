#include "rsodc/solver.hpp"

#include "rsodc/group_lasso.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace rsodc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Slack allowed on the objective before a Y update is rejected.
constexpr double kAcceptSlack = 1e-8;

enum class YStep { admm, procrustes };

FitResult run_alternating(const ProblemInstance& instance, const FusionGraph& graph, YStep step,
                          std::uint64_t seed, std::string method)
{
    const auto start = Clock::now();
    instance.validate();
    const SolverParams& prm = instance.params;
    if (graph.n != instance.n()) throw ContractError("fit: graph was built for a different number of subjects");

    const Matrix xc = center_columns(instance.data);
    const Index d = instance.dim();

    Matrix b0;
    if (prm.b_init == BInit::gaussian) {
        Rng rng(derive_seed(seed, 1));
        b0 = standard_normal(instance.p(), d, rng);
    } else {
        b0 = Matrix::Zero(instance.p(), d);
    }
    Coefficients coef(b0);
    ScoringState state = initial_scoring_state(initial_scores(xc, d), graph);

    FitResult result;
    result.method = std::move(method);
    auto eval = [&](const Matrix& y) { return objective_terms(xc, prm, coef.B, y, graph).total(); };
    result.initial_objective = eval(state.Y);
    double previous = result.initial_objective;

    const GroupLassoOptions b_opts{prm.nu, prm.max_b_sweeps, prm.epsilon};
    const AdmmParams admm{prm.gamma, prm.rho, prm.epsilon, prm.max_inner, prm.v_mode};
    bool step_clamp_noted = false;

    for (int t = 0; t < prm.max_outer; ++t) {
        auto phase = Clock::now();
        const StackedDesign design = build_stacked(state.Y, xc, 2.0 * prm.eta2);
        const GroupLassoReport report = update_B(coef, design, prm.eta1, b_opts);
        result.b_sweeps += report.sweeps;
        if (report.step_clamped && !step_clamp_noted) {
            result.diagnostics.push_back("nu clamped to " + std::to_string(report.nu_used) + " for stability");
            step_clamp_noted = true;
        }
        result.timings.b_update += seconds_since(phase);

        phase = Clock::now();
        const double after_b = eval(state.Y);
        const Matrix w = xc * coef.B;
        const Matrix y_prev = state.Y;
        if (step == YStep::admm) {
            inner_admm(w, state, graph, admm);
            result.inner_iters.push_back(state.iterations);
        } else {
            state.Y = procrustes(w, state.Y, &state.diagnostics);
        }
        const double candidate = eval(state.Y);
        result.timings.y_update += seconds_since(phase);
        ++result.outer_iters;

        if (!std::isfinite(candidate)) throw NumericError("fit: objective is not finite");
        if (candidate > after_b + kAcceptSlack) {
            state.Y = y_prev;
            result.objective_trace.push_back(after_b);
            result.status = FitStatus::stalled;
            result.diagnostics.push_back("outer iteration " + std::to_string(t + 1) +
                                         ": Y update raised the objective; kept the previous Y");
            break;
        }
        result.objective_trace.push_back(candidate);
        if (previous - candidate < prm.epsilon) {
            result.status = FitStatus::converged;
            result.converged = true;
            break;
        }
        previous = candidate;
    }
    for (auto& note : state.diagnostics) result.diagnostics.push_back(std::move(note));

    result.B_hat = coef.B;
    result.Y_hat = state.Y;
    result.embedding = xc * coef.B;
    if (coef.active_set.empty()) result.diagnostics.push_back("all groups are zero; the embedding is degenerate");

    const auto phase = Clock::now();
    KMeansResult km = kmeans(result.embedding, prm.k, prm.kmeans_restarts, derive_seed(seed, 2));
    result.labels = std::move(km.labels);
    result.centroids = std::move(km.centroids);
    result.timings.kmeans = seconds_since(phase);
    result.timings.total = seconds_since(start);
    return result;
}

}  // namespace

std::string to_string(FitStatus status)
{
    switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_outer: return "max_outer";
    case FitStatus::stalled: return "stalled";
    }
    return "unknown";
}

int FitResult::convergence_count() const
{
    return outer_iters + std::accumulate(inner_iters.begin(), inner_iters.end(), 0);
}

ObjectiveTerms objective_terms(const Matrix& xc, const SolverParams& params, const Matrix& b, const Matrix& y,
                               const FusionGraph& graph)
{
    if (b.rows() != xc.cols() || y.rows() != xc.rows() || b.cols() != y.cols())
        throw DimensionError("objective: inconsistent shapes of X, B and Y");
    if (graph.n != y.rows()) throw DimensionError("objective: graph size differs from n");
    ObjectiveTerms terms;
    terms.fit = 0.5 * (y - xc * b).squaredNorm();
    terms.ridge = params.eta2 * b.squaredNorm();
    terms.group = params.eta1 * b.rowwise().norm().sum();
    if (params.gamma != 0.0) {
        double fusion = 0.0;
        for (std::size_t l = 0; l < graph.edges.size(); ++l)
            fusion += graph.alpha[l] * (y.row(graph.edges[l].i) - y.row(graph.edges[l].j)).norm();
        terms.fusion = params.gamma * fusion;
    }
    return terms;
}

double objective(const ProblemInstance& instance, const Matrix& b, const Matrix& y, const FusionGraph& graph)
{
    return objective_terms(center_columns(instance.data), instance.params, b, y, graph).total();
}

FitResult fit_rsodc(const ProblemInstance& instance, const FusionGraph& graph, std::uint64_t seed)
{
    if (instance.params.gamma == 0.0) {
        // No fusion: the Y step runs on an edgeless graph, which is the plain Procrustes update.
        const FusionGraph none = empty_graph(instance.n(), instance.params.rho);
        return run_alternating(instance, none, YStep::admm, seed, "rsodc");
    }
    return run_alternating(instance, graph, YStep::admm, seed, "rsodc");
}

FitResult fit_sodc(const ProblemInstance& instance, std::uint64_t seed)
{
    const FusionGraph none = empty_graph(instance.n(), instance.params.rho > 0 ? instance.params.rho : 1.0);
    return run_alternating(instance, none, YStep::procrustes, seed, "sodc");
}

FitResult tandem_baseline(const Matrix& x, int k, std::uint64_t seed, int restarts)
{
    const auto start = Clock::now();
    if (k < 2) throw ParameterError("tandem_baseline: k must be at least 2");
    const Index d = k - 1;
    if (d > std::min(x.rows(), x.cols())) throw DimensionError("tandem_baseline: k - 1 exceeds min(n, p)");
    require_finite(x, "tandem_baseline input");

    const Matrix xc = center_columns(x);
    Eigen::JacobiSVD<Matrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    FitResult result;
    result.method = "tandem";
    result.B_hat = svd.matrixV().leftCols(d);
    result.Y_hat = svd.matrixU().leftCols(d);
    result.embedding = xc * result.B_hat;
    result.converged = true;
    result.status = FitStatus::converged;
    KMeansResult km = kmeans(result.embedding, k, restarts, derive_seed(seed, 2));
    result.labels = std::move(km.labels);
    result.centroids = std::move(km.centroids);
    result.timings.kmeans = seconds_since(start);
    result.timings.total = result.timings.kmeans;
    return result;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n))
    {
        std::iota(parent_.begin(), parent_.end(), Index{0});
    }
    Index find(Index a)
    {
        while (parent_[static_cast<std::size_t>(a)] != a) {
            parent_[static_cast<std::size_t>(a)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
            a = parent_[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(Index a, Index b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }

private:
    std::vector<Index> parent_;
};

}  // namespace

ConvexClusteringResult convex_clustering(const Matrix& x, const FusionGraph& graph, double gamma, double rho,
                                         double eps, int max_iter)
{
    const Index n = x.rows();
    if (graph.n != n) throw ContractError("convex_clustering: graph was built for a different number of points");
    if (!(gamma >= 0)) throw ParameterError("convex_clustering: gamma must be non-negative");
    if (!(rho > 0)) throw ParameterError("convex_clustering: rho must be positive");
    if (!(eps > 0)) throw ParameterError("convex_clustering: eps must be positive");
    require_finite(x, "convex_clustering input");

    const Matrix xc = center_columns(x);
    double scale = xc.rowwise().norm().maxCoeff();
    if (!(scale > 0)) scale = 1.0;

    Matrix system = Matrix::Identity(n, n);
    for (const Edge& e : graph.edges) {
        system(e.i, e.i) += rho;
        system(e.j, e.j) += rho;
        system(e.i, e.j) -= rho;
        system(e.j, e.i) -= rho;
    }
    const Eigen::LDLT<Matrix> solve(system);

    const Index m = graph.edge_count();
    ConvexClusteringResult out;
    out.M = x;
    Matrix v(m, x.cols());
    for (Index l = 0; l < m; ++l) v.row(l) = x.row(graph.edges[l].i) - x.row(graph.edges[l].j);
    Matrix lambda = Matrix::Zero(m, x.cols());

    for (int it = 0; it < max_iter; ++it) {
        Matrix rhs = x;
        for (Index l = 0; l < m; ++l) {
            const Eigen::RowVectorXd push = lambda.row(l) + rho * v.row(l);
            rhs.row(graph.edges[l].i) += push;
            rhs.row(graph.edges[l].j) -= push;
        }
        const Matrix next = solve.solve(rhs);
        const double dual = rho * (next - out.M).norm();
        out.M = next;

        double primal = 0.0;
        for (Index l = 0; l < m; ++l) {
            const Edge& e = graph.edges[l];
            const Eigen::RowVectorXd diff = out.M.row(e.i) - out.M.row(e.j);
            const Vector q = (diff - lambda.row(l) / rho).transpose();
            v.row(l) = group_soft_threshold(q, gamma * graph.alpha[static_cast<std::size_t>(l)] / rho).transpose();
            const Eigen::RowVectorXd r = v.row(l) - diff;
            lambda.row(l) += rho * r;
            primal = std::max(primal, r.norm());
        }
        ++out.iterations;
        if (primal < eps * scale && dual < eps * scale) {
            out.converged = true;
            break;
        }
    }
    require_finite(out.M, "convex_clustering centroids");

    DisjointSets sets(n);
    const double tol = kMergeTolerance * scale;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if ((out.M.row(i) - out.M.row(j)).norm() <= tol) sets.unite(i, j);

    std::vector<int> label_of_root(static_cast<std::size_t>(n), 0);
    int next_label = 0;
    out.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        int& slot = label_of_root[static_cast<std::size_t>(sets.find(i))];
        if (slot == 0) slot = ++next_label;
        out.labels[static_cast<std::size_t>(i)] = slot;
    }
    Matrix centers = Matrix::Zero(next_label, x.cols());
    Vector counts = Vector::Zero(next_label);
    for (Index i = 0; i < n; ++i) {
        centers.row(out.labels[static_cast<std::size_t>(i)] - 1) += out.M.row(i);
        counts(out.labels[static_cast<std::size_t>(i)] - 1) += 1.0;
    }
    for (Index c = 0; c < next_label; ++c) centers.row(c) /= counts(c);
    out.centroids.centroids = centers;
    out.centroids.inertia = within_cluster_ss(x, out.labels);
    return out;
}

}  // namespace rsodc
