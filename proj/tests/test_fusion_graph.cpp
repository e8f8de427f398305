#include "doctest.h"
#include "oracles.hpp"

#include "rsodc/fusion_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace rsodc;

namespace {

Matrix line_points()
{
    Matrix x(3, 1);
    x << 0, 1, 10;
    return x;
}

}  // namespace

TEST_CASE("knn_indicator on three points of a line")
{
    const PairRelation r = knn_indicator(line_points(), 1);
    CHECK(r(0, 1));
    CHECK(r(1, 2));
    CHECK_FALSE(r(0, 2));
    CHECK(r.count_pairs() == 2);
}

TEST_CASE("knn_indicator with delta = n - 1 covers every pair")
{
    std::mt19937_64 rng(1);
    const Matrix x = oracle::random_normal(7, 3, rng);
    CHECK(knn_indicator(x, 6).count_pairs() == 21);
}

TEST_CASE("knn_indicator always links duplicated rows")
{
    std::mt19937_64 rng(2);
    Matrix x = oracle::random_normal(9, 2, rng);
    x.row(6) = x.row(2);
    CHECK(knn_indicator(x, 1)(2, 6));
}

TEST_CASE("knn_indicator rejects delta >= n")
{
    CHECK_THROWS_AS(knn_indicator(line_points(), 3), ParameterError);
    CHECK_THROWS_AS(knn_indicator(line_points(), 0), ParameterError);
}

TEST_CASE("compute_weights evaluates the kernel")
{
    const FusionGraph g = compute_weights(line_points(), 0.1, 1);
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges[0] == Edge{0, 1});
    CHECK(g.edges[1] == Edge{1, 2});
    CHECK(g.alpha[0] == doctest::Approx(0.904837).epsilon(1e-6));
    CHECK(g.alpha[1] == doctest::Approx(3.035e-4).epsilon(1e-3));
    CHECK(g.alpha[1] == doctest::Approx(std::exp(-8.1)));
}

TEST_CASE("compute_weights with tau = 0 and a full neighbourhood is uniform")
{
    std::mt19937_64 rng(3);
    const FusionGraph g = compute_weights(oracle::random_normal(6, 2, rng), 0.0, 5);
    CHECK(g.edge_count() == 15);
    for (double a : g.alpha) CHECK(a == 1.0);
}

TEST_CASE("compute_weights gives weight 1 to coincident points")
{
    std::mt19937_64 rng(4);
    Matrix x = oracle::random_normal(5, 2, rng);
    x.row(4) = x.row(1);
    const FusionGraph g = compute_weights(x, 3.0, 1);
    const auto it = std::find(g.edges.begin(), g.edges.end(), Edge{1, 4});
    REQUIRE(it != g.edges.end());
    CHECK(g.alpha[static_cast<std::size_t>(it - g.edges.begin())] == 1.0);
}

TEST_CASE("compute_weights is invariant to row order")
{
    std::mt19937_64 rng(5);
    const Index n = 12;
    const Matrix x = oracle::random_normal(n, 3, rng);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(n, 3);
    for (Index r = 0; r < n; ++r) xp.row(r) = x.row(perm[static_cast<std::size_t>(r)]);

    const FusionGraph g = compute_weights(x, 0.2, 4);
    const FusionGraph gp = compute_weights(xp, 0.2, 4);
    Matrix w = Matrix::Zero(n, n), wp = Matrix::Zero(n, n);
    for (std::size_t l = 0; l < g.edges.size(); ++l) w(g.edges[l].i, g.edges[l].j) = w(g.edges[l].j, g.edges[l].i) = g.alpha[l];
    for (std::size_t l = 0; l < gp.edges.size(); ++l) {
        const Index i = perm[static_cast<std::size_t>(gp.edges[l].i)], j = perm[static_cast<std::size_t>(gp.edges[l].j)];
        wp(i, j) = wp(j, i) = gp.alpha[l];
    }
    CHECK(max_abs(w - wp) < 1e-15);
}

TEST_CASE("incidence vectors")
{
    const Vector g01 = incidence_vector(Edge{0, 1}, 3);
    const Vector g12 = incidence_vector(Edge{1, 2}, 3);
    CHECK(g01(0) == 1.0);
    CHECK(g01(1) == -1.0);
    CHECK(g01(2) == 0.0);
    CHECK(g12(0) == 0.0);
    CHECK(g12(1) == 1.0);
    CHECK(g12(2) == -1.0);
    CHECK(g01.sum() == 0.0);
    CHECK_THROWS_AS(incidence_vector(Edge{2, 2}, 3), ContractError);
}

TEST_CASE("build_quadratic on a single edge")
{
    Matrix x(2, 1);
    x << 0, 1;
    const FusionGraph g = build_fusion_graph(x, 0.1, 1, 2.0);
    Matrix expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK(max_abs(g.C - expected) < 1e-15);
    CHECK(g.omega == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(g.omega >= 2.0);
}

TEST_CASE("build_quadratic on the complete graph gives the Laplacian")
{
    std::mt19937_64 rng(6);
    const FusionGraph g = build_fusion_graph(oracle::random_normal(4, 2, rng), 0.5, 3, 2.0);
    const Matrix lap = 4 * Matrix::Identity(4, 4) - Matrix::Ones(4, 4);
    CHECK(max_abs(g.C - lap) < 1e-14);
    CHECK(g.omega == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("empty graph")
{
    const FusionGraph g = empty_graph(5, 0.1);
    CHECK(g.edge_count() == 0);
    CHECK(max_abs(g.C) == 0.0);
    CHECK(g.omega == kOmegaFloor);
}

TEST_CASE("C has ones in its null space and omega bounds its quadratic form")
{
    std::mt19937_64 rng(7);
    const FusionGraph g = build_fusion_graph(oracle::random_normal(30, 4, rng), 0.1, 5, 0.05);
    CHECK((g.C * Vector::Ones(30)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(max_abs(g.C - g.C.transpose()) == 0.0);
    for (int rep = 0; rep < 100; ++rep) {
        Vector v = oracle::random_normal(30, 1, rng);
        v.normalize();
        CHECK(v.dot(g.C * v) <= g.omega);
    }
    const Matrix q = oracle::random_normal(30, 2, rng);
    CHECK(max_abs(apply_quadratic(g, q) - g.C * q) < 1e-12);
}
