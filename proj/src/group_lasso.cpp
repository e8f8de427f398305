#include "rsodc/group_lasso.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rsodc {

StackedDesign build_stacked(const Matrix& y, const Matrix& xc, double ridge)
{
    if (y.rows() != xc.rows())
        throw DimensionError("build_stacked: Y has " + std::to_string(y.rows()) + " rows, X has " +
                             std::to_string(xc.rows()));
    if (y.cols() < 1) throw DimensionError("build_stacked: Y needs at least one column");
    if (!(ridge >= 0)) throw ParameterError("build_stacked: ridge weight must be non-negative");

    StackedDesign design;
    design.xc = xc;
    design.ridge = ridge;
    design.d = y.cols();
    const Index n = xc.rows();
    const Index p = xc.cols();
    design.y_star = Vector::Zero((n + p) * design.d);
    for (Index c = 0; c < design.d; ++c) design.y_star.segment(c * n, n) = y.col(c);
    return design;
}

Matrix StackedDesign::block(Index j) const
{
    if (j < 0 || j >= p()) throw DimensionError("StackedDesign::block: group out of range");
    Matrix zj = Matrix::Zero(rows(), d);
    const double root = std::sqrt(ridge);
    for (Index c = 0; c < d; ++c) {
        zj.block(c * n(), c, n(), 1) = xc.col(j);
        // Padding rows hold sqrt(ridge) I over vec(B), whose entry (j, c) sits at c p + j.
        zj(n() * d + c * p() + j, c) = root;
    }
    return zj;
}

Matrix StackedDesign::dense() const
{
    Matrix z(rows(), p() * d);
    // Column ordering follows vec(B): component-major, variable-minor.
    for (Index j = 0; j < p(); ++j) {
        const Matrix zj = block(j);
        for (Index c = 0; c < d; ++c) z.col(c * p() + j) = zj.col(c);
    }
    return z;
}

Vector StackedDesign::apply(const Matrix& b) const
{
    if (b.rows() != p() || b.cols() != d) throw DimensionError("StackedDesign::apply: shape mismatch");
    Vector out(rows());
    const Matrix fit = xc * b;
    const double root = std::sqrt(ridge);
    for (Index c = 0; c < d; ++c) {
        out.segment(c * n(), n()) = fit.col(c);
        out.segment(n() * d + c * p(), p()) = root * b.col(c);
    }
    return out;
}

Matrix StackedDesign::scores() const
{
    Matrix y(n(), d);
    for (Index c = 0; c < d; ++c) y.col(c) = y_star.segment(c * n(), n());
    return y;
}

Vector group_soft_threshold(const Vector& phi, double t)
{
    const double norm = phi.norm();
    if (norm <= t) return Vector::Zero(phi.size());
    return phi * (1.0 - t / norm);
}

Coefficients::Coefficients(Matrix b) : B(std::move(b)) { refresh_active(); }

void Coefficients::refresh_active()
{
    active_set.clear();
    for (Index j = 0; j < B.rows(); ++j)
        if (B.row(j).norm() > 0.0) active_set.push_back(j);
}

double group_lasso_objective(const Matrix& b, const StackedDesign& design, double eta1)
{
    const Vector r = design.y_star - design.apply(b);
    return 0.5 * r.squaredNorm() + eta1 * b.rowwise().norm().sum();
}

double max_stable_step(const StackedDesign& design)
{
    double worst = design.xc.colwise().squaredNorm().maxCoeff() + design.ridge;
    return worst > 0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

GroupLassoReport update_B(Coefficients& state, const StackedDesign& design, double eta1,
                          const GroupLassoOptions& options)
{
    const Index p = design.p();
    const Index d = design.d;
    if (state.B.rows() != p || state.B.cols() != d)
        throw DimensionError("update_B: coefficient shape does not match the design");
    if (!(options.nu > 0)) throw ParameterError("update_B: nu must be positive");
    if (!(eta1 >= 0)) throw ParameterError("update_B: eta1 must be non-negative");

    GroupLassoReport report;
    report.nu_used = options.nu;
    const double limit = max_stable_step(design);
    if (report.nu_used > limit) {
        report.nu_used = limit;
        report.step_clamped = true;
    }
    const double nu = report.nu_used;
    const double threshold = nu * eta1;

    // Residual of the data block; the padding block is -sqrt(ridge) B.
    Matrix resid = design.scores() - design.xc * state.B;
    double previous = group_lasso_objective(state.B, design, eta1);
    report.sweep_objectives.push_back(previous);

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        for (Index j = 0; j < p; ++j) {
            const Vector old = state.B.row(j).transpose();
            // Z_j^T (y* - Z beta) = x_j^T R - ridge * beta_j
            const Vector grad = (design.xc.col(j).transpose() * resid).transpose() - design.ridge * old;
            const Vector phi = old + nu * grad;
            Vector next = group_soft_threshold(phi, threshold);
            if (!next.allFinite())
                throw NumericError("update_B: non-finite coefficients in group " + std::to_string(j), j);
            if (next.norm() < kGroupZeroSnap) next.setZero();
            const Vector change = next - old;
            if (change.squaredNorm() > 0.0) {
                resid.noalias() -= design.xc.col(j) * change.transpose();
                state.B.row(j) = next.transpose();
            }
        }
        ++report.sweeps;
        const double current = group_lasso_objective(state.B, design, eta1);
        report.sweep_objectives.push_back(current);
        const double drop = previous - current;
        previous = current;
        if (drop < options.tolerance) {
            report.converged = true;
            break;
        }
    }
    report.objective = previous;
    state.refresh_active();
    return report;
}

}  // namespace rsodc
