#include "doctest.h"
#include "oracles.hpp"

#include "rsodc/core.hpp"
#include "rsodc/fusion_graph.hpp"

#include <cmath>
#include <limits>

using namespace rsodc;

TEST_CASE("center_columns subtracts column means")
{
    Matrix x(3, 2);
    x << 1, 1, 1, 2, 1, 3;
    const Matrix c = center_columns(x);
    CHECK(c.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c(0, 1) == doctest::Approx(-1.0));
    CHECK(c(1, 1) == doctest::Approx(0.0));
    CHECK(c(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("center_columns is idempotent and sums to zero")
{
    std::mt19937_64 rng(3);
    const Matrix x = oracle::random_normal(17, 5, rng).array() + 4.0;
    const Matrix c = center_columns(x);
    CHECK(max_abs(center_columns(c) - c) < 1e-12);
    CHECK(c.colwise().sum().cwiseAbs().maxCoeff() <= 1e-10 * 17);
}

TEST_CASE("center_columns rejects a single row")
{
    CHECK_THROWS_AS(center_columns(Matrix::Ones(1, 3)), DimensionError);
}

TEST_CASE("thin_svd of a padded diagonal")
{
    Matrix a(3, 2);
    a << 2, 0, 0, 3, 0, 0;
    const ThinSvd s = thin_svd(a);
    CHECK(s.sigma(0) == doctest::Approx(3.0));
    CHECK(s.sigma(1) == doctest::Approx(2.0));
}

TEST_CASE("thin_svd of orthonormal columns has unit singular values")
{
    std::mt19937_64 rng(5);
    const Matrix q = oracle::random_orthonormal(8, 3, rng);
    const ThinSvd s = thin_svd(q);
    for (Index i = 0; i < 3; ++i) CHECK(s.sigma(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("thin_svd reconstructs and is orthonormal")
{
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix a = oracle::random_normal(10, 2, rng);
        const ThinSvd s = thin_svd(a);
        const Matrix back = s.left * s.sigma.asDiagonal() * s.right.transpose();
        CHECK((back - a).norm() / a.norm() < 1e-9);
        CHECK(max_abs(s.left.transpose() * s.left - Matrix::Identity(2, 2)) < 1e-10);
        CHECK(max_abs(s.right.transpose() * s.right - Matrix::Identity(2, 2)) < 1e-10);
        CHECK(s.sigma(0) >= s.sigma(1));
        CHECK(s.sigma(1) >= 0.0);
    }
}

TEST_CASE("thin_svd rejects non-finite input")
{
    Matrix a = Matrix::Ones(3, 2);
    a(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(thin_svd(a), NumericError);
}

TEST_CASE("top_eigenvalue_sym simple spectra")
{
    CHECK(top_eigenvalue_sym(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
    CHECK(top_eigenvalue_sym(Matrix::Zero(4, 4)) == doctest::Approx(0.0));

    // (rho/2) times the complete-graph Laplacian on 5 nodes.
    const double rho = 0.3;
    const Index n = 5;
    const Matrix lap = n * Matrix::Identity(n, n) - Matrix::Ones(n, n);
    CHECK(top_eigenvalue_sym(0.5 * rho * lap) == doctest::Approx(0.5 * rho * n).epsilon(1e-10));
}

TEST_CASE("top_eigenvalue_sym power path dominates sampled Rayleigh quotients")
{
    std::mt19937_64 rng(11);
    // Large enough to take the power-iteration branch.
    const Matrix a = oracle::random_normal(600, 40, rng);
    const Matrix c = a * a.transpose() / 600.0;
    const double top = top_eigenvalue_sym(c);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
    CHECK(top == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-8));
    for (int rep = 0; rep < 100; ++rep) {
        Vector v = oracle::random_normal(600, 1, rng);
        v.normalize();
        CHECK(v.dot(c * v) <= top * (1 + 1e-12));
    }
}

TEST_CASE("top_eigenvalue_sym rejects asymmetric input")
{
    Matrix c = Matrix::Identity(3, 3);
    c(0, 1) = 1e-3;
    CHECK_THROWS_AS(top_eigenvalue_sym(c), ContractError);
}

TEST_CASE("instance validation")
{
    ProblemInstance inst{Matrix::Random(10, 4), SolverParams{}};
    CHECK_NOTHROW(inst.validate());
    inst.params.gamma = 0.02;  // gamma / rho = 2
    CHECK_THROWS_AS(inst.validate(), ParameterError);
    inst.params.gamma = 0.001;
    inst.params.k = 6;  // k - 1 = 5 > p
    CHECK_THROWS_AS(inst.validate(), DimensionError);
    inst.params.k = 1;
    CHECK_THROWS_AS(inst.validate(), ParameterError);
}

TEST_CASE("v-mode names round-trip")
{
    CHECK(parse_v_mode("paper") == VUpdateMode::paper);
    CHECK(parse_v_mode(to_string(VUpdateMode::exact)) == VUpdateMode::exact);
    CHECK_THROWS_AS(parse_v_mode("fast"), ParameterError);
}

TEST_CASE("derive_seed separates streams")
{
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(9, 4) == derive_seed(9, 4));
}
