#include "rsodc/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace rsodc {

std::string to_string(VUpdateMode mode)
{
    return mode == VUpdateMode::paper ? "paper" : "exact";
}

VUpdateMode parse_v_mode(const std::string& name)
{
    if (name == "paper") return VUpdateMode::paper;
    if (name == "exact") return VUpdateMode::exact;
    throw ParameterError("unknown v-mode '" + name + "' (expected paper or exact)");
}

void ProblemInstance::validate() const
{
    const auto& prm = params;
    if (data.rows() < 2 || data.cols() < 1)
        throw DimensionError("data must have at least 2 rows and 1 column");
    require_finite(data, "data");
    if (prm.k < 2) throw ParameterError("k must be at least 2");
    const Index d = prm.k - 1;
    // One degree of freedom is consumed by the centering constraint.
    if (d > std::min(data.rows() - 1, data.cols()))
        throw DimensionError("k - 1 must not exceed min(n - 1, p)");
    if (prm.eta1 < 0 || prm.eta2 < 0 || prm.gamma < 0)
        throw ParameterError("eta1, eta2 and gamma must be non-negative");
    if (!(prm.rho > 0)) throw ParameterError("rho must be positive");
    if (!(prm.nu > 0)) throw ParameterError("nu must be positive");
    if (!(prm.epsilon > 0)) throw ParameterError("epsilon must be positive");
    if (prm.gamma > 0 && !(prm.gamma < prm.rho))
        throw ParameterError("gamma / rho must be below 1");
    if (prm.max_outer < 1 || prm.max_inner < 1 || prm.max_b_sweeps < 1)
        throw ParameterError("iteration caps must be positive");
    if (prm.kmeans_restarts < 1) throw ParameterError("kmeans restarts must be positive");
}

void require_finite(const Matrix& m, const std::string& what)
{
    if (!m.allFinite()) throw NumericError(what + " contains non-finite entries");
}

Matrix center_columns(const Matrix& x)
{
    if (x.rows() < 2) throw DimensionError("center_columns needs at least 2 rows");
    const Eigen::RowVectorXd means = x.colwise().mean();
    return x.rowwise() - means;
}

ThinSvd thin_svd(const Matrix& a)
{
    if (a.cols() > a.rows()) throw DimensionError("thin_svd expects rows >= cols");
    if (a.size() == 0) throw DimensionError("thin_svd on empty matrix");
    require_finite(a, "thin_svd input");
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Index numerical_rank(const Vector& sigma)
{
    if (sigma.size() == 0 || !(sigma(0) > 0)) return 0;
    const double cut = kRankTolerance * sigma(0);
    Index r = 0;
    for (Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > cut) ++r;
    return r;
}

double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace {

constexpr Index kExactEigenLimit = 512;

double power_iteration(const Matrix& c)
{
    const Index n = c.rows();
    Vector v = Vector::Ones(n) / std::sqrt(double(n));
    // Break symmetry so the start vector is not orthogonal to the top eigenvector
    // of a Laplacian (whose null space contains the ones vector).
    for (Index i = 0; i < n; ++i) v(i) += 1e-3 * std::sin(double(i + 1));
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
        Vector w = c * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / norm;
        if (it > 0 && std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::max(lambda, 0.0);
}

}  // namespace

double top_eigenvalue_sym(const Matrix& c)
{
    if (c.rows() != c.cols()) throw DimensionError("top_eigenvalue_sym expects a square matrix");
    if (c.rows() == 0) throw DimensionError("top_eigenvalue_sym on empty matrix");
    require_finite(c, "top_eigenvalue_sym input");
    if (max_abs(c - c.transpose()) > 1e-8) throw ContractError("matrix is not symmetric");
    if (c.rows() <= kExactEigenLimit) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
        return std::max(es.eigenvalues().maxCoeff(), 0.0);
    }
    return power_iteration(c);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Matrix standard_normal(Index rows, Index cols, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    // Fill row-major so draws do not depend on Eigen's storage order.
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

}  // namespace rsodc
