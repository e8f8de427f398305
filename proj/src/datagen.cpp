#include "rsodc/datagen.hpp"

#include <cmath>

namespace rsodc {

std::optional<Index> default_c_star(Index p)
{
    switch (p) {
    case 20: return 12;
    case 50: return 24;
    case 80: return 36;
    case 100: return 48;
    default: return std::nullopt;
    }
}

Index SimulationConfig::resolved_c_star() const
{
    if (c_star) return *c_star;
    if (auto value = default_c_star(p)) return *value;
    throw ParameterError("SimulationConfig: c_star must be given for p = " + std::to_string(p));
}

void SimulationConfig::validate() const
{
    if (k < 2 || k > 4) throw ParameterError("SimulationConfig: k must be 2, 3 or 4");
    if (q < 2 || q % 2 != 0) throw ParameterError("SimulationConfig: q must be even and positive");
    const Index c = resolved_c_star();
    if (c < 0 || q + c > p) throw ParameterError("SimulationConfig: q + c_star exceeds p");
    if (n < k) throw ParameterError("SimulationConfig: n must be at least k");
    if (!(xi >= 0.0 && xi <= 1.0)) throw ParameterError("SimulationConfig: xi must lie in [0, 1]");
    if (!(xi_dagger >= 0.0 && xi_dagger <= 1.0)) throw ParameterError("SimulationConfig: xi_dagger must lie in [0, 1]");
    if (!std::isfinite(theta)) throw ParameterError("SimulationConfig: theta must be finite");
}

Matrix compound_symmetry(Index size, double xi)
{
    return (1.0 - xi) * Matrix::Identity(size, size) + xi * Matrix::Ones(size, size);
}

Matrix build_covariance(const SimulationConfig& config)
{
    config.validate();
    const Index c = config.resolved_c_star();
    Matrix sigma = Matrix::Identity(config.p, config.p);
    sigma.topLeftCorner(config.q, config.q) = compound_symmetry(config.q, config.xi);
    sigma.block(config.q, config.q, c, c) = compound_symmetry(c, config.xi_dagger);
    return sigma;
}

Matrix cluster_means(const SimulationConfig& config)
{
    config.validate();
    const Index half = config.q / 2;
    Matrix mu = Matrix::Zero(config.k, config.p);
    const double t = config.theta;
    // m1 = t(-1, 1), m2 = t 1, m3 = t(1, -1), m4 = -t 1
    mu.block(0, 0, 1, half).setConstant(-t);
    mu.block(0, half, 1, half).setConstant(t);
    mu.block(1, 0, 1, config.q).setConstant(t);
    if (config.k >= 3) {
        mu.block(2, 0, 1, half).setConstant(t);
        mu.block(2, half, 1, half).setConstant(-t);
    }
    if (config.k >= 4) mu.block(3, 0, 1, config.q).setConstant(-t);
    return mu;
}

std::vector<Index> cluster_sizes(Index n, int k)
{
    std::vector<Index> sizes(static_cast<std::size_t>(k), n / k);
    for (Index r = 0; r < n % k; ++r) ++sizes[static_cast<std::size_t>(r)];
    return sizes;
}

Matrix covariance_factor(const Matrix& sigma)
{
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Dataset generate(const SimulationConfig& config)
{
    const Matrix sigma = build_covariance(config);
    const Matrix mu = cluster_means(config);
    const Matrix factor = covariance_factor(sigma);
    Rng rng(config.seed);
    const Matrix z = standard_normal(config.n, config.p, rng);

    Dataset out;
    out.X = z * factor.transpose();
    out.labels.resize(static_cast<std::size_t>(config.n));
    Index row = 0;
    const auto sizes = cluster_sizes(config.n, config.k);
    for (int c = 0; c < config.k; ++c)
        for (Index r = 0; r < sizes[static_cast<std::size_t>(c)]; ++r, ++row) {
            out.X.row(row) += mu.row(c);
            out.labels[static_cast<std::size_t>(row)] = c + 1;
        }
    return out;
}

}  // namespace rsodc
