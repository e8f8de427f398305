#ifndef RSODC_ADMM_SCORING_HPP
#define RSODC_ADMM_SCORING_HPP

#include "rsodc/core.hpp"
#include "rsodc/fusion_graph.hpp"

#include <string>
#include <vector>

namespace rsodc {

/**
 * Iterate of the inner ADMM for the scoring matrix.
 *
 * Y is n x d with orthonormal, mean-zero columns. V and Lambda have one row
 * per fusion edge, in FusionGraph edge order. Q is the previous Y and anchors
 * the majorizer.
 */
struct ScoringState {
    Matrix Y;
    Matrix V;
    Matrix Lambda;
    Matrix Q;
    std::vector<double> inner_objective;
    double primal_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> diagnostics;
};

/// Leading d left singular vectors of the centered data.
Matrix initial_scores(const Matrix& xc, Index d);

/// V = (y_i - y_j) per edge, Lambda = 0, Q = Y.
ScoringState initial_scoring_state(const Matrix& y0, const FusionGraph& graph);

/// D = 1/2 (W + sum g_l lambda_l^T + rho sum g_l v_l^T + 2 (omega I - C) Q), edge-wise.
Matrix assemble_D(const Matrix& w, const ScoringState& state, const FusionGraph& graph, double rho);

/**
 * Orthogonal Procrustes solution Y = L R^T of the SVD D = L S R^T.
 *
 * When D loses rank, the missing left directions are filled from the columns
 * of Q projected off the retained ones (and off the ones vector), which keeps
 * Y orthonormal and centered; a diagnostic is recorded in that case.
 */
Matrix procrustes(const Matrix& d, const Matrix& fallback, std::vector<std::string>* diagnostics = nullptr);

/// Y <- procrustes(D), then Q <- Y.
void update_Y(ScoringState& state, const Matrix& d);

/// 2 omega d - 2 tr(Y^T (omega I - C) Q) - tr(Q^T C Q); equals tr(Y^T C Y) when Y = Q.
double majorizer_value(const Matrix& y, const Matrix& q, const Matrix& c, double omega);

/// Per-edge objective (1/2)||v - q||^2 + psi ||v||.
double edge_objective(const Vector& v, const Vector& q, double psi);

/// Literal proximal step: s = v - psi (v - q), v <- soft(s, psi).
Vector v_step_paper(const Vector& v, const Vector& q, double psi);

/// Closed-form minimizer of edge_objective: soft(q, psi).
Vector v_step_exact(const Vector& q, double psi);

void update_V(ScoringState& state, const FusionGraph& graph, double gamma, double rho, VUpdateMode mode);

/// lambda_l += rho (v_l - y_i + y_j); records max_l ||v_l - y_i + y_j|| as primal_residual.
void update_Lambda(ScoringState& state, const FusionGraph& graph, double rho);

/// Scoring-dependent part of the augmented Lagrangian:
/// (1/2)||Y - W||^2 + gamma sum alpha ||v|| + sum lambda^T (v - y_i + y_j) + (rho/2) sum ||v - y_i + y_j||^2.
double augmented_lagrangian(const Matrix& w, const ScoringState& state, const FusionGraph& graph, double gamma,
                            double rho);

/// Same as augmented_lagrangian with the Y rows replaced by `y` and only the Y-dependent terms kept.
double scoring_surrogate_target(const Matrix& y, const Matrix& w, const ScoringState& state,
                                const FusionGraph& graph, double rho);

struct AdmmParams {
    double gamma = 0.001;
    double rho = 0.01;
    double epsilon = 1e-6;
    int max_inner = 1000;
    VUpdateMode mode = VUpdateMode::exact;
};

/// Y -> V -> Lambda sweeps until the augmented Lagrangian changes by less than epsilon.
void inner_admm(const Matrix& w, ScoringState& state, const FusionGraph& graph, const AdmmParams& params);

}  // namespace rsodc

#endif
