#ifndef RSODC_GROUP_LASSO_HPP
#define RSODC_GROUP_LASSO_HPP

#include "rsodc/core.hpp"

#include <vector>

namespace rsodc {

/**
 * Vectorized regression form of the B-subproblem.
 *
 *   y* = (vec(Y), 0_{pd}),   Z = [ bdiag(Xc, ..., Xc) ; sqrt(ridge) I_{pd} ]
 *
 * with vec() stacking columns. Z is never stored: Z_j (the columns belonging
 * to variable j) is the centered column x_j placed in each of the d diagonal
 * blocks, plus sqrt(ridge) in the matching padding rows.
 */
struct StackedDesign {
    Vector y_star;
    Matrix xc;
    double ridge = 0.0;
    Index d = 0;

    Index n() const { return xc.rows(); }
    Index p() const { return xc.cols(); }
    Index rows() const { return (n() + p()) * d; }

    /// Dense Z_j, shape ((n + p) d) x d.
    Matrix block(Index j) const;
    /// Dense Z, shape ((n + p) d) x (p d).
    Matrix dense() const;
    /// Z * vec(B) without forming Z.
    Vector apply(const Matrix& b) const;
    /// Y recovered from the first n d entries of y*.
    Matrix scores() const;
};

/// Shape checks then packs the design. `ridge` is the weight on the padding
/// block: the objective term it produces is (ridge / 2) ||B||_F^2.
StackedDesign build_stacked(const Matrix& y, const Matrix& xc, double ridge);

/// phi (1 - t / ||phi||) when ||phi|| > t, else 0.
Vector group_soft_threshold(const Vector& phi, double t);

/// Groups with norm below this are snapped to exactly zero.
inline constexpr double kGroupZeroSnap = 1e-12;

struct Coefficients {
    Matrix B;
    std::vector<Index> active_set;

    explicit Coefficients(Matrix b = {});
    void refresh_active();
};

struct GroupLassoOptions {
    double nu = 0.001;
    int max_sweeps = 100;
    /// Stop once one sweep lowers the objective by less than this.
    double tolerance = 1e-6;
};

struct GroupLassoReport {
    int sweeps = 0;
    bool converged = false;
    bool step_clamped = false;
    double nu_used = 0.0;
    double objective = 0.0;
    std::vector<double> sweep_objectives;
};

/// (1/2) ||y* - Z vec(B)||^2 + eta1 sum_j ||beta_j||_2.
double group_lasso_objective(const Matrix& b, const StackedDesign& design, double eta1);

/// Largest nu that keeps every group step a descent step: 1 / max_j ||Z_j||^2.
double max_stable_step(const StackedDesign& design);

/**
 * Cyclic proximal group updates over j = 1..p:
 *   phi = beta_j + nu Z_j^T (r_j - Z_j beta_j),  beta_j <- soft(phi, nu eta1).
 * The residual is kept incrementally. nu above max_stable_step() is clamped.
 */
GroupLassoReport update_B(Coefficients& state, const StackedDesign& design, double eta1,
                          const GroupLassoOptions& options);

}  // namespace rsodc

#endif
