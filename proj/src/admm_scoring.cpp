#include "rsodc/admm_scoring.hpp"

#include "rsodc/group_lasso.hpp"

#include <cmath>

namespace rsodc {

namespace {

void check_alignment(const ScoringState& state, const FusionGraph& graph)
{
    if (state.Y.rows() != graph.n) throw ContractError("scoring state and graph disagree on n");
    if (state.V.rows() != graph.edge_count() || state.Lambda.rows() != graph.edge_count())
        throw ContractError("V / Lambda rows do not align with the fusion edges");
    if (state.V.cols() != state.Y.cols() || state.Lambda.cols() != state.Y.cols())
        throw ContractError("V / Lambda columns do not match Y");
}

}  // namespace

Matrix initial_scores(const Matrix& xc, Index d)
{
    if (d < 1 || d > std::min(xc.rows() - 1, xc.cols()))
        throw DimensionError("initial_scores: need 1 <= d <= min(n - 1, p)");
    // SVD of the n x p centered data; only the leading d left vectors are used.
    Eigen::JacobiSVD<Matrix> svd(xc, Eigen::ComputeThinU);
    Matrix y = svd.matrixU().leftCols(d);
    // Pin the sign of each column so the start is reproducible across platforms.
    for (Index c = 0; c < d; ++c) {
        Index arg = 0;
        y.col(c).cwiseAbs().maxCoeff(&arg);
        if (y(arg, c) < 0) y.col(c) *= -1.0;
    }
    if (numerical_rank(svd.singularValues()) < d) {
        // Rank-deficient data: complete with centered orthonormal directions.
        y = procrustes(Matrix(xc * svd.matrixV().leftCols(d)), Matrix::Zero(xc.rows(), d));
    }
    return y;
}

ScoringState initial_scoring_state(const Matrix& y0, const FusionGraph& graph)
{
    if (y0.rows() != graph.n) throw DimensionError("initial_scoring_state: Y rows must equal graph n");
    ScoringState state;
    state.Y = y0;
    state.Q = y0;
    state.V.resize(graph.edge_count(), y0.cols());
    for (Index l = 0; l < graph.edge_count(); ++l) {
        const Edge& e = graph.edges[static_cast<std::size_t>(l)];
        state.V.row(l) = y0.row(e.i) - y0.row(e.j);
    }
    state.Lambda = Matrix::Zero(graph.edge_count(), y0.cols());
    return state;
}

Matrix assemble_D(const Matrix& w, const ScoringState& state, const FusionGraph& graph, double rho)
{
    check_alignment(state, graph);
    if (w.rows() != state.Y.rows() || w.cols() != state.Y.cols())
        throw DimensionError("assemble_D: W shape differs from Y");
    if (state.Q.rows() != w.rows() || state.Q.cols() != w.cols())
        throw DimensionError("assemble_D: Q shape differs from Y");
    if (graph.edge_count() > 0 && std::abs(graph.rho - rho) > 1e-12 * rho)
        throw ContractError("assemble_D: rho differs from the one used to build C");

    Matrix sum = w;
    for (Index l = 0; l < graph.edge_count(); ++l) {
        const Edge& e = graph.edges[static_cast<std::size_t>(l)];
        const Eigen::RowVectorXd push = state.Lambda.row(l) + rho * state.V.row(l);
        sum.row(e.i) += push;
        sum.row(e.j) -= push;
    }
    sum += 2.0 * (graph.omega * state.Q - apply_quadratic(graph, state.Q));
    return 0.5 * sum;
}

Matrix procrustes(const Matrix& d, const Matrix& fallback, std::vector<std::string>* diagnostics)
{
    const ThinSvd svd = thin_svd(d);
    const Index cols = d.cols();
    const Index n = d.rows();
    const Index rank = numerical_rank(svd.sigma);
    if (rank == cols) return svd.left * svd.right.transpose();

    if (diagnostics)
        diagnostics->push_back("procrustes: D has numerical rank " + std::to_string(rank) + " < " +
                               std::to_string(cols) + "; completing from the previous iterate");

    Matrix basis(n, cols);
    basis.leftCols(rank) = svd.left.leftCols(rank);
    const Vector ones = Vector::Ones(n) / std::sqrt(double(n));
    Index filled = rank;
    auto try_add = [&](Vector cand) {
        cand -= ones * ones.dot(cand);
        for (int pass = 0; pass < 2; ++pass)
            for (Index c = 0; c < filled; ++c) cand -= basis.col(c) * basis.col(c).dot(cand);
        const double norm = cand.norm();
        if (norm > 1e-8) basis.col(filled++) = cand / norm;
    };
    if (fallback.rows() == n)
        for (Index c = 0; c < fallback.cols() && filled < cols; ++c) try_add(fallback.col(c));
    for (Index c = 0; c < n && filled < cols; ++c) try_add(Vector::Unit(n, c));
    if (filled < cols) throw DegenerateUpdateError("procrustes: cannot complete a centered orthonormal basis");
    return basis * svd.right.transpose();
}

void update_Y(ScoringState& state, const Matrix& d)
{
    std::vector<std::string> notes;
    state.Y = procrustes(d, state.Q, &notes);
    state.Q = state.Y;
    // Repeated degeneracy inside one solve is reported once.
    for (auto& note : notes)
        if (state.diagnostics.empty() || state.diagnostics.back() != note) state.diagnostics.push_back(std::move(note));
}

double majorizer_value(const Matrix& y, const Matrix& q, const Matrix& c, double omega)
{
    const double dim = static_cast<double>(y.cols());
    const Matrix shifted_q = omega * q - c * q;
    return 2.0 * omega * dim - 2.0 * (y.transpose() * shifted_q).trace() - (q.transpose() * c * q).trace();
}

double edge_objective(const Vector& v, const Vector& q, double psi)
{
    return 0.5 * (v - q).squaredNorm() + psi * v.norm();
}

Vector v_step_paper(const Vector& v, const Vector& q, double psi)
{
    const Vector s = v - psi * (v - q);
    return group_soft_threshold(s, psi);
}

Vector v_step_exact(const Vector& q, double psi)
{
    return group_soft_threshold(q, psi);
}

void update_V(ScoringState& state, const FusionGraph& graph, double gamma, double rho, VUpdateMode mode)
{
    check_alignment(state, graph);
    for (Index l = 0; l < graph.edge_count(); ++l) {
        const Edge& e = graph.edges[static_cast<std::size_t>(l)];
        const double psi = gamma * graph.alpha[static_cast<std::size_t>(l)] / rho;
        const Vector q = (state.Y.row(e.i) - state.Y.row(e.j) - state.Lambda.row(l) / rho).transpose();
        const Vector v = state.V.row(l).transpose();
        state.V.row(l) = (mode == VUpdateMode::paper ? v_step_paper(v, q, psi) : v_step_exact(q, psi)).transpose();
    }
}

void update_Lambda(ScoringState& state, const FusionGraph& graph, double rho)
{
    check_alignment(state, graph);
    double worst = 0.0;
    for (Index l = 0; l < graph.edge_count(); ++l) {
        const Edge& e = graph.edges[static_cast<std::size_t>(l)];
        const Eigen::RowVectorXd r = state.V.row(l) - state.Y.row(e.i) + state.Y.row(e.j);
        state.Lambda.row(l) += rho * r;
        worst = std::max(worst, r.norm());
    }
    state.primal_residual = worst;
}

double scoring_surrogate_target(const Matrix& y, const Matrix& w, const ScoringState& state,
                                const FusionGraph& graph, double rho)
{
    double value = 0.5 * (y - w).squaredNorm();
    for (Index l = 0; l < graph.edge_count(); ++l) {
        const Edge& e = graph.edges[static_cast<std::size_t>(l)];
        const Eigen::RowVectorXd r = state.V.row(l) - y.row(e.i) + y.row(e.j);
        value += state.Lambda.row(l).dot(r) + 0.5 * rho * r.squaredNorm();
    }
    return value;
}

double augmented_lagrangian(const Matrix& w, const ScoringState& state, const FusionGraph& graph, double gamma,
                            double rho)
{
    check_alignment(state, graph);
    double penalty = 0.0;
    for (Index l = 0; l < graph.edge_count(); ++l)
        penalty += graph.alpha[static_cast<std::size_t>(l)] * state.V.row(l).norm();
    return scoring_surrogate_target(state.Y, w, state, graph, rho) + gamma * penalty;
}

void inner_admm(const Matrix& w, ScoringState& state, const FusionGraph& graph, const AdmmParams& params)
{
    check_alignment(state, graph);
    if (!(params.rho > 0)) throw ParameterError("inner_admm: rho must be positive");
    if (params.max_inner < 1) throw ParameterError("inner_admm: max_inner must be positive");

    state.inner_objective.clear();
    state.iterations = 0;
    state.converged = false;
    double previous = augmented_lagrangian(w, state, graph, params.gamma, params.rho);
    state.inner_objective.push_back(previous);

    for (int it = 0; it < params.max_inner; ++it) {
        update_Y(state, assemble_D(w, state, graph, params.rho));
        update_V(state, graph, params.gamma, params.rho, params.mode);
        update_Lambda(state, graph, params.rho);
        ++state.iterations;
        const double current = augmented_lagrangian(w, state, graph, params.gamma, params.rho);
        if (!std::isfinite(current)) throw NumericError("inner_admm: augmented Lagrangian is not finite");
        state.inner_objective.push_back(current);
        if (std::abs(previous - current) < params.epsilon) {
            state.converged = true;
            break;
        }
        previous = current;
    }
}

}  // namespace rsodc
