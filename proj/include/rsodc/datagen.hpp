#ifndef RSODC_DATAGEN_HPP
#define RSODC_DATAGEN_HPP

#include "rsodc/core.hpp"

#include <cstdint>
#include <optional>

namespace rsodc {

inline constexpr double kXiDaggerDefault = 0.6;

struct SimulationConfig {
    Index n = 60;
    Index p = 20;
    int k = 3;
    Index q = 2;
    /// Correlated noise block size; empty means the default for p (see default_c_star).
    std::optional<Index> c_star;
    double theta = 2.2;
    double xi = 0.5;
    double xi_dagger = kXiDaggerDefault;
    std::uint64_t seed = 0;

    Index resolved_c_star() const;
    void validate() const;
};

/// 12, 24, 36, 48 for p = 20, 50, 80, 100; nullopt for other p.
std::optional<Index> default_c_star(Index p);

/// Compound-symmetric block (1 - xi) I + xi 1 1^T.
Matrix compound_symmetry(Index size, double xi);

/// Block diagonal: informative block (xi), correlated noise block (xi_dagger), identity.
Matrix build_covariance(const SimulationConfig& config);

/// k x p matrix whose row l is (m_l, 0).
Matrix cluster_means(const SimulationConfig& config);

/// Cluster sizes floor(n / k), remainder spread over the first clusters.
std::vector<Index> cluster_sizes(Index n, int k);

struct Dataset {
    Matrix X;
    Partition labels;
};

/// Factor F with F F^T = sigma: Cholesky when possible, symmetric eigen root otherwise.
Matrix covariance_factor(const Matrix& sigma);

Dataset generate(const SimulationConfig& config);

}  // namespace rsodc

#endif
