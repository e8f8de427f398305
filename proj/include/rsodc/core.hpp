#ifndef RSODC_CORE_HPP
#define RSODC_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsodc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Cluster assignment per subject, values in 1..k.
using Partition = std::vector<int>;

/// All randomness in the library flows through an explicitly passed engine.
using Rng = std::mt19937_64;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, std::optional<Index> group = std::nullopt)
        : std::runtime_error(what), group_(group) {}

    /// Variable group that produced the non-finite value, when known.
    std::optional<Index> group() const { return group_; }

private:
    std::optional<Index> group_;
};

class DegenerateUpdateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class VUpdateMode { paper, exact };

std::string to_string(VUpdateMode mode);
VUpdateMode parse_v_mode(const std::string& name);

enum class BInit { gaussian, zero };

/// Tuning parameters of one RSODC/SODC fit.
struct SolverParams {
    int k = 3;
    double eta1 = 2.5;
    double eta2 = 0.0;
    double gamma = 0.001;
    double rho = 0.01;
    double nu = 0.001;
    double epsilon = 1e-6;
    int max_outer = 100;
    int max_inner = 1000;
    int max_b_sweeps = 100;
    int kmeans_restarts = 20;
    VUpdateMode v_mode = VUpdateMode::exact;
    BInit b_init = BInit::gaussian;
};

/// Centered-or-raw data plus the parameters for one fit.
struct ProblemInstance {
    Matrix data;
    SolverParams params;

    Index n() const { return data.rows(); }
    Index p() const { return data.cols(); }
    Index dim() const { return params.k - 1; }

    /// Throws ParameterError / DimensionError when the instance is unusable.
    void validate() const;
};

/// Throws NumericError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);

/// H_n X computed by subtracting column means; H_n itself is never formed.
Matrix center_columns(const Matrix& x);

struct ThinSvd {
    Matrix left;   // n x d, orthonormal columns
    Vector sigma;  // non-increasing, non-negative
    Matrix right;  // d x d orthogonal
};

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-12;

ThinSvd thin_svd(const Matrix& a);

/// Number of singular values above kRankTolerance * sigma_max.
Index numerical_rank(const Vector& sigma);

/// Largest eigenvalue of a symmetric PSD matrix. Exact for small inputs,
/// power iteration otherwise.
double top_eigenvalue_sym(const Matrix& c);

/// Maximum absolute entry of a matrix (0 for empty).
double max_abs(const Matrix& m);

/// Derives an independent stream seed from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Matrix of i.i.d. N(0, 1) draws.
Matrix standard_normal(Index rows, Index cols, Rng& rng);

}  // namespace rsodc

#endif
