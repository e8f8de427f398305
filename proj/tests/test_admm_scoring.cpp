#include "doctest.h"
#include "oracles.hpp"

#include "rsodc/admm_scoring.hpp"
#include "rsodc/group_lasso.hpp"

#include <cmath>

using namespace rsodc;

namespace {

struct Setup {
    Matrix xc;
    Matrix w;
    FusionGraph graph;
    ScoringState state;
};

Setup random_setup(std::uint64_t seed, Index n = 30, Index p = 10, Index d = 2, double rho = 0.05)
{
    std::mt19937_64 rng(seed);
    Setup s;
    s.xc = center_columns(oracle::random_normal(n, p, rng));
    s.w = s.xc * oracle::random_normal(p, d, rng) * 0.3;
    s.graph = build_fusion_graph(s.xc, 0.1, 5, rho);
    s.state = initial_scoring_state(initial_scores(s.xc, d), s.graph);
    // Non-trivial multipliers and fusion differences.
    s.state.Lambda = 0.1 * oracle::random_normal(s.graph.edge_count(), d, rng);
    s.state.V += 0.05 * oracle::random_normal(s.graph.edge_count(), d, rng);
    return s;
}

double constraint_error(const Matrix& y)
{
    const Index d = y.cols();
    return std::max(max_abs(y.transpose() * y - Matrix::Identity(d, d)), y.colwise().sum().cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("initial scores are centered and orthonormal")
{
    const Setup s = random_setup(1);
    CHECK(constraint_error(s.state.Y) < 1e-10);
    CHECK(s.state.V.rows() == s.graph.edge_count());
    CHECK(max_abs(s.state.Q - s.state.Y) == 0.0);
}

TEST_CASE("assemble_D without edges")
{
    std::mt19937_64 rng(2);
    const Matrix xc = center_columns(oracle::random_normal(8, 3, rng));
    const FusionGraph g = empty_graph(8, 0.1);
    ScoringState st = initial_scoring_state(initial_scores(xc, 2), g);
    const Matrix w = xc.leftCols(2);
    const Matrix d = assemble_D(w, st, g, 0.1);
    CHECK(max_abs(d - 0.5 * (w + 2.0 * g.omega * st.Q)) < 1e-15);
}

TEST_CASE("assemble_D single-edge expansion")
{
    Matrix x(2, 1);
    x << 0, 1;
    const double rho = 0.5;
    const FusionGraph g = build_fusion_graph(x, 0.1, 1, rho);
    Matrix y(2, 1);
    y << -std::sqrt(0.5), std::sqrt(0.5);
    ScoringState st = initial_scoring_state(y, g);
    const Matrix w = Matrix::Zero(2, 1);
    const Matrix d = assemble_D(w, st, g, rho);
    // 2 D = rho g (y0 - y1)^T + 2 (omega I - C) Q
    const Matrix base = 2.0 * (g.omega * y - g.C * y);
    const double push = rho * (y(0, 0) - y(1, 0));
    CHECK(2.0 * d(0, 0) - base(0, 0) == doctest::Approx(push));
    CHECK(2.0 * d(1, 0) - base(1, 0) == doctest::Approx(-push));
}

TEST_CASE("assemble_D keeps zero column sums")
{
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const Setup s = random_setup(seed);
        const Matrix d = assemble_D(s.w, s.state, s.graph, s.graph.rho);
        CHECK(d.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("assemble_D rejects misaligned state")
{
    Setup s = random_setup(3);
    s.state.V.conservativeResize(s.state.V.rows() - 1, Eigen::NoChange);
    CHECK_THROWS_AS(assemble_D(s.w, s.state, s.graph, s.graph.rho), ContractError);
}

TEST_CASE("procrustes examples")
{
    Matrix d(3, 2);
    d << 2, 0, 0, 3, 0, 0;
    const Matrix y = procrustes(d, Matrix());
    CHECK(max_abs(y - Matrix::Identity(3, 2)) < 1e-12);

    std::mt19937_64 rng(4);
    const Matrix q = oracle::random_orthonormal(7, 3, rng);
    CHECK(max_abs(procrustes(q, Matrix()) - q) < 1e-10);
}

TEST_CASE("procrustes beats random orthonormal competitors")
{
    std::mt19937_64 rng(5);
    const Matrix d = oracle::random_normal(12, 3, rng);
    const Matrix y = procrustes(d, Matrix());
    const double best = (y.transpose() * d).trace();
    for (int rep = 0; rep < 1000; ++rep) {
        const Matrix p = oracle::random_orthonormal(12, 3, rng);
        CHECK((p.transpose() * d).trace() <= best + 1e-12);
    }
}

TEST_CASE("procrustes completes a rank-deficient D from the fallback")
{
    std::mt19937_64 rng(6);
    const Matrix q = oracle::random_centered_orthonormal(9, 2, rng);
    Matrix d = Matrix::Zero(9, 2);
    d.col(0) = q.col(0);
    std::vector<std::string> notes;
    const Matrix y = procrustes(d, q, &notes);
    CHECK(constraint_error(y) < 1e-10);
    CHECK(notes.size() == 1);
}

TEST_CASE("update_Y keeps the constraints and moves Q")
{
    Setup s = random_setup(7);
    update_Y(s.state, assemble_D(s.w, s.state, s.graph, s.graph.rho));
    CHECK(constraint_error(s.state.Y) < 1e-8);
    CHECK(max_abs(s.state.Q - s.state.Y) == 0.0);
}

TEST_CASE("majorizer touches at Y = Q and dominates elsewhere")
{
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const Index n = 5 + static_cast<Index>(rng() % 26);
        const Index d = 1 + static_cast<Index>(rng() % 3);
        const FusionGraph g = build_fusion_graph(oracle::random_normal(n, 3, rng), 0.1, 1 + static_cast<int>(rng() % (n - 1)), 0.01 + (rng() % 100) / 50.0);
        const Matrix y = oracle::random_orthonormal(n, d, rng);
        const Matrix q = oracle::random_orthonormal(n, d, rng);
        const double f = (y.transpose() * g.C * y).trace();
        CHECK(f <= majorizer_value(y, q, g.C, g.omega) + 1e-10);
        CHECK(std::abs(majorizer_value(q, q, g.C, g.omega) - (q.transpose() * g.C * q).trace()) <= 1e-10);
    }
}

TEST_CASE("majorizer with C = 0")
{
    std::mt19937_64 rng(9);
    const Matrix y = oracle::random_orthonormal(6, 2, rng);
    const Matrix q = oracle::random_orthonormal(6, 2, rng);
    const double v = majorizer_value(y, q, Matrix::Zero(6, 6), kOmegaFloor);
    CHECK(v == doctest::Approx(2 * kOmegaFloor * 2 - 2 * kOmegaFloor * (y.transpose() * q).trace()));
    CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("V step examples")
{
    Vector v(2), q(2);
    v << 1, 0;
    q << 3, 0;
    CHECK(v_step_paper(v, q, 0.5)(0) == doctest::Approx(1.5));
    CHECK(v_step_exact(q, 0.5)(0) == doctest::Approx(2.5));
    CHECK(v_step_paper(v, q, 0.5)(1) == 0.0);

    // Zero branch of the literal step: ||s|| <= psi.
    Vector small(2);
    small << 0.1, 0.0;
    CHECK(v_step_paper(small, small, 0.2).norm() == 0.0);

    // psi = 0.
    CHECK(max_abs(v_step_paper(v, q, 0.0) - v) == 0.0);
    CHECK(max_abs(v_step_exact(q, 0.0) - q) == 0.0);
}

TEST_CASE("exact V step matches the smoothed Newton oracle")
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Index d = 1 + static_cast<Index>(rng() % 4);
        const Vector q = oracle::random_normal(d, 1, rng);
        const double psi = unit(rng);
        const Vector ref = oracle::smoothed_group_lasso(Matrix::Identity(d, d), q, psi, static_cast<int>(d));
        CHECK((v_step_exact(q, psi) - ref).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("update_Lambda examples")
{
    Matrix x(2, 1);
    x << 0, 1;
    const FusionGraph g = build_fusion_graph(x, 0.1, 1, 0.1);
    Matrix y(2, 2);
    y << 0.5, 0, -0.5, 0;
    ScoringState st = initial_scoring_state(y, g);
    update_Lambda(st, g, 0.1);
    CHECK(max_abs(st.Lambda) == 0.0);  // v = y_i - y_j already

    st.V.setZero();
    update_Lambda(st, g, 0.1);
    CHECK(st.Lambda(0, 0) == doctest::Approx(-0.1));
    CHECK(st.Lambda(0, 1) == doctest::Approx(0.0));
    CHECK(st.primal_residual == doctest::Approx(1.0));
    update_Lambda(st, g, 0.1);
    CHECK(st.Lambda(0, 0) == doctest::Approx(-0.2));
}

TEST_CASE("MM step never raises the Y part of the augmented Lagrangian")
{
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        Setup s = random_setup(seed, 25, 6, 1 + static_cast<Index>(seed % 3), 0.02 + 0.1 * (seed % 4));
        for (int it = 0; it < 5; ++it) {
            const Matrix q = s.state.Q;
            const double before = scoring_surrogate_target(q, s.w, s.state, s.graph, s.graph.rho);
            update_Y(s.state, assemble_D(s.w, s.state, s.graph, s.graph.rho));
            const double after = scoring_surrogate_target(s.state.Y, s.w, s.state, s.graph, s.graph.rho);
            CHECK(after <= before + 1e-9);
            CHECK(s.state.Y.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
            update_V(s.state, s.graph, 0.001, s.graph.rho, VUpdateMode::exact);
            update_Lambda(s.state, s.graph, s.graph.rho);
        }
    }
}

TEST_CASE("inner_admm on a pinned instance")
{
    std::mt19937_64 rng(30);
    const Matrix xc = center_columns(oracle::random_normal(30, 10, rng));
    const FusionGraph g = build_fusion_graph(xc, 0.1, 25, 0.01);
    ScoringState st = initial_scoring_state(initial_scores(xc, 2), g);
    const Matrix w = xc * oracle::random_normal(10, 2, rng) * 0.2;
    for (VUpdateMode mode : {VUpdateMode::exact, VUpdateMode::paper}) {
        ScoringState run = st;
        AdmmParams prm;
        prm.mode = mode;
        inner_admm(w, run, g, prm);
        if (mode == VUpdateMode::exact) {
            CHECK(run.iterations <= 500);
            CHECK(run.converged);
        }
        CHECK(constraint_error(run.Y) <= 1e-8);
    }
}

TEST_CASE("inner_admm without edges is one Procrustes solve")
{
    std::mt19937_64 rng(31);
    const Matrix xc = center_columns(oracle::random_normal(20, 5, rng));
    const FusionGraph g = empty_graph(20, 0.01);
    ScoringState st = initial_scoring_state(initial_scores(xc, 2), g);
    const Matrix w = xc * oracle::random_normal(5, 2, rng);
    AdmmParams prm;
    prm.gamma = 0.0;
    inner_admm(w, st, g, prm);
    CHECK(st.iterations <= 2);
    const Matrix sodc = procrustes(w, Matrix());
    CHECK(max_abs(st.Y * st.Y.transpose() - sodc * sodc.transpose()) < 1e-8);
}
