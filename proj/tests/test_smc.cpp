// SPDX-License-Identifier: Apache-2.0
//
// beamrec - position-aided mmWave beam recommendation by smooth tensor completion
// Copyright (C) 2026 The beamrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "oracles.hpp"

#include "beamrec/smc.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace beamrec;

namespace
{

SmcProblem make_problem(const Eigen::MatrixXd &values, const BoolMatrix &observed, SmcParams params = {})
{
    SmcProblem p;
    p.values = values;
    p.observed = observed;
    p.params = params;
    return p;
}

} // namespace

TEST(DifferenceOperator, MatchesExplicitMatrix)
{
    for (Eigen::Index m : {1, 2, 3, 7})
    {
        const DifferenceOperator d(m);
        EXPECT_EQ(d.matrix(), oracle::difference_matrix(m));
        const Eigen::MatrixXd g = oracle::difference_matrix(m).transpose() * oracle::difference_matrix(m);
        for (Eigen::Index p = 0; p < m; ++p)
            for (Eigen::Index q = 0; q < m; ++q)
                EXPECT_EQ(d.gram(p, q), g(p, q));
        if (m > 1)
        {
            EXPECT_EQ((d.matrix() * Eigen::VectorXd::Constant(m, 3.7)).norm(), 0.0);
        }
    }
}

TEST(SmoothnessPenalty, MatchesDefinition)
{
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(5, 4, rng);
    const double expected = (oracle::difference_matrix(5) * x).squaredNorm() +
                            (x * oracle::difference_matrix(4).transpose()).squaredNorm();
    EXPECT_NEAR(smoothness_penalty(x), expected, 1e-12);
}

TEST(Svt, DiagonalExample)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 3;
    a(1, 1) = 1;
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
    expected(0, 0) = 1;
    EXPECT_NEAR((svt(a, 2.0) - expected).norm(), 0.0, 1e-12);
}

TEST(Svt, ZeroThresholdIsIdentity)
{
    std::mt19937_64 rng(1);
    for (auto [m, n] : {std::pair{4, 3}, {3, 7}, {1, 5}, {6, 6}})
    {
        const Eigen::MatrixXd a = oracle::gaussian_matrix(m, n, rng);
        EXPECT_NEAR((svt(a, 0.0) - a).norm(), 0.0, 1e-10);
    }
}

TEST(Svt, ZeroMatrixAndNegativeThreshold)
{
    EXPECT_EQ(svt(Eigen::MatrixXd::Zero(3, 4), 1.0), Eigen::MatrixXd::Zero(3, 4));
    EXPECT_THROW(svt(Eigen::MatrixXd::Ones(2, 2), -0.1), std::invalid_argument);
}

TEST(Svt, MatchesNumericProx)
{
    std::mt19937_64 rng(8);
    for (auto [m, n] : {std::pair{4, 3}, {3, 4}, {6, 2}, {5, 5}})
        for (double tau : {0.5, 1.5})
        {
            const Eigen::MatrixXd a = oracle::gaussian_matrix(m, n, rng, 2.0);
            const Eigen::MatrixXd ref = oracle::numeric_prox(a, tau, 77);
            const Eigen::MatrixXd got = svt(a, tau);
            EXPECT_NEAR((got - ref).norm(), 0.0, 1e-6);
            EXPECT_LE(oracle::prox_objective(got, a, tau), oracle::prox_objective(ref, a, tau) + 1e-10);
        }
}

TEST(Svt, KillsSmallSingularValues)
{
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd a = oracle::gaussian_matrix(6, 4, rng);
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
    const double tau = 0.5 * (s[1] + s[2]); // keep exactly two
    const Eigen::VectorXd t = Eigen::JacobiSVD<Eigen::MatrixXd>(svt(a, tau)).singularValues();
    EXPECT_NEAR(t[0], s[0] - tau, 1e-10);
    EXPECT_NEAR(t[1], s[1] - tau, 1e-10);
    EXPECT_NEAR(t[2], 0.0, 1e-10);
}

TEST(YSystem, InteriorRowOfThreeByThree)
{
    SmcParams params;
    params.gamma = 2.0;
    params.lambda = 3.0;
    BoolMatrix obs = BoolMatrix::Constant(3, 3, false);
    obs(0, 0) = true; // a corner, away from the (2,2) neighbourhood
    const YSystem sys = build_y_system(make_problem(Eigen::MatrixXd::Zero(3, 3), obs, params));
    const double kappa = 3.0 / (2 * 2.0);
    const Eigen::MatrixXd a = Eigen::MatrixXd(sys.matrix());
    const auto &idx = sys.index_map();
    const int centre = idx(1, 1);
    EXPECT_DOUBLE_EQ(a(centre, idx(0, 1)), -1.0);
    EXPECT_DOUBLE_EQ(a(centre, centre), 2.0 + 2.0 + kappa);
    EXPECT_DOUBLE_EQ(a(centre, idx(2, 1)), -1.0);
    EXPECT_DOUBLE_EQ(a(centre, idx(1, 0)), -1.0);
    EXPECT_DOUBLE_EQ(a(centre, idx(1, 2)), -1.0);
    int nonzeros = 0;
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        nonzeros += a(centre, c) != 0.0;
    EXPECT_EQ(nonzeros, 5);
}

TEST(YSystem, RowsHaveAtMostFiveNonzerosAndAreSymmetric)
{
    std::mt19937_64 rng(12);
    for (int k = 0; k < 20; ++k)
    {
        const SmcProblem prob = oracle::random_problem(rng, 9, 9, 0.1, 0.9);
        if (prob.unknown_count() == 0)
            continue;
        const YSystem sys = build_y_system(prob);
        const Eigen::MatrixXd a = Eigen::MatrixXd(sys.matrix());
        EXPECT_NEAR((a - a.transpose()).norm(), 0.0, 0.0);
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            EXPECT_LE((a.row(r).array() != 0.0).count(), 5);
    }
}

TEST(YSystem, SingleRowReducesToPathLaplacian)
{
    const int n = 6;
    SmcParams params;
    params.gamma = 1.0;
    params.lambda = 1.0;
    BoolMatrix obs = BoolMatrix::Constant(1, n, false);
    obs(0, 0) = true;
    const YSystem sys = build_y_system(make_problem(Eigen::MatrixXd::Zero(1, n), obs, params));
    const Eigen::MatrixXd dn = oracle::difference_matrix(n);
    const Eigen::MatrixXd lap = dn.transpose() * dn;
    // unknowns are columns 1..5 in order
    const Eigen::MatrixXd expected = lap.bottomRightCorner(n - 1, n - 1) + 0.5 * Eigen::MatrixXd::Identity(n - 1, n - 1);
    EXPECT_NEAR((Eigen::MatrixXd(sys.matrix()) - expected).norm(), 0.0, 1e-15);
}

TEST(YSystem, ObservedNeighbourMovesToRightHandSide)
{
    BoolMatrix obs = BoolMatrix::Constant(2, 2, false);
    obs(0, 0) = true;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = 4.0;
    const YSystem sys = build_y_system(make_problem(m, obs));
    // (0,1) and (1,0) each neighbour the observed (0,0) with coefficient -1: rhs gets +4.
    const auto &idx = sys.index_map();
    EXPECT_DOUBLE_EQ(sys.observed_rhs()[idx(0, 1)], 4.0);
    EXPECT_DOUBLE_EQ(sys.observed_rhs()[idx(1, 0)], 4.0);
    EXPECT_DOUBLE_EQ(sys.observed_rhs()[idx(1, 1)], 0.0);
}

TEST(YSystem, GammaZeroIsRejected)
{
    SmcParams params;
    params.gamma = 0.0;
    EXPECT_THROW(build_y_system(make_problem(Eigen::MatrixXd::Zero(2, 2), BoolMatrix::Constant(2, 2, false).eval(), params)),
                 std::invalid_argument);
}

TEST(YSystem, DenseAndSparsePathsAgree)
{
    std::mt19937_64 rng(6);
    SmcProblem prob;
    prob.values = oracle::gaussian_matrix(12, 12, rng);
    prob.observed = oracle::hide_fraction(12, 12, 0.6, 3);
    const YSystem sys = build_y_system(prob);
    ASSERT_TRUE(sys.uses_sparse_factorization());
    const Eigen::VectorXd b = sys.rhs(oracle::gaussian_matrix(12, 12, rng), oracle::gaussian_matrix(12, 12, rng));
    const Eigen::VectorXd y = sys.solve(b);
    const Eigen::VectorXd dense = Eigen::MatrixXd(sys.matrix()).ldlt().solve(b);
    EXPECT_NEAR((y - dense).norm(), 0.0, 1e-10 * b.norm());
    EXPECT_LE((sys.matrix() * y - b).norm(), 1e-10 * b.norm());
}

TEST(SolveY, FullyObservedReturnsM)
{
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd m = oracle::gaussian_matrix(3, 4, rng);
    const SmcProblem prob = make_problem(m, BoolMatrix::Constant(3, 4, true));
    const YSystem sys = build_y_system(prob);
    EXPECT_EQ(sys.unknowns().size(), 0u);
    EXPECT_EQ(solve_y(sys, prob, Eigen::MatrixXd::Zero(3, 4), Eigen::MatrixXd::Zero(3, 4)), m);
}

TEST(SolveY, StationaryAndMinimal)
{
    std::mt19937_64 rng(10);
    for (int k = 0; k < 10; ++k)
    {
        SmcProblem prob = oracle::random_problem(rng, 6, 6, 0.2, 0.8);
        prob.params.gamma = 0.7;
        prob.params.lambda = 1.3;
        if (prob.unknown_count() == 0)
            continue;
        const Eigen::MatrixXd x = oracle::gaussian_matrix(prob.rows(), prob.cols(), rng, 3.0);
        const Eigen::MatrixXd z = oracle::gaussian_matrix(prob.rows(), prob.cols(), rng, 1.0);
        const Eigen::MatrixXd y = solve_y(build_y_system(prob), prob, x, z);
        EXPECT_TRUE(oracle::equal_on_mask(y, prob.values, prob.observed));
        EXPECT_LE(oracle::max_free_gradient(y, x, z, prob.observed, 0.7, 1.3), 1e-6);

        const double f0 = oracle::y_objective(y, x, z, 0.7, 1.3);
        for (Eigen::Index c = 0; c < y.cols(); ++c)
            for (Eigen::Index r = 0; r < y.rows(); ++r)
                if (!prob.observed(r, c))
                    for (double h : {1e-5, -1e-5})
                    {
                        Eigen::MatrixXd moved = y;
                        moved(r, c) += h;
                        EXPECT_GT(oracle::y_objective(moved, x, z, 0.7, 1.3), f0);
                    }
    }
}

TEST(SolveY, ConstantDataStaysConstant)
{
    BoolMatrix obs = oracle::hide_fraction(5, 6, 0.5, 4);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Constant(5, 6, 7.0);
    const SmcProblem prob = make_problem(m, obs);
    const Eigen::MatrixXd y = solve_y(build_y_system(prob), prob, m, Eigen::MatrixXd::Zero(5, 6));
    EXPECT_NEAR((y - m).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(SmcSolve, FullyObserved)
{
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd m = oracle::gaussian_matrix(4, 4, rng);
    const SmcSolution sol = smc_solve(make_problem(m, BoolMatrix::Constant(4, 4, true)));
    EXPECT_EQ(sol.completed, m);
    EXPECT_TRUE(sol.converged);
    EXPECT_EQ(sol.iterations, 0);
}

TEST(SmcSolve, RankOneRamp)
{
    const Eigen::MatrixXd truth = oracle::rank_one_ramp(16, 16);
    const BoolMatrix obs = oracle::hide_fraction(16, 16, 0.3, 7);
    const SmcSolution sol = smc_solve(make_problem(truth, obs));
    EXPECT_LT(oracle::hidden_relative_error(sol.completed, truth, obs), 0.05);
    EXPECT_TRUE(oracle::equal_on_mask(sol.completed, truth, obs));
}

TEST(SmcSolve, ConstantMatrix)
{
    const Eigen::MatrixXd truth = Eigen::MatrixXd::Constant(10, 12, 7.0);
    const BoolMatrix obs = oracle::hide_fraction(10, 12, 0.5, 9);
    const SmcSolution sol = smc_solve(make_problem(truth, obs));
    EXPECT_LT((sol.completed - truth).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(SmcSolve, ObservedEntriesAreBitExact)
{
    std::mt19937_64 rng(31);
    for (int k = 0; k < 15; ++k)
    {
        SmcProblem prob = oracle::random_problem(rng, 10, 10, 0.1, 0.9);
        prob.params.max_iter = 60;
        const SmcSolution sol = smc_solve(prob);
        EXPECT_TRUE(oracle::equal_on_mask(sol.completed, prob.values, prob.observed));
    }
}

TEST(SmcSolve, TraceSatisfiesMultiplierIdentity)
{
    SmcProblem prob = make_problem(oracle::rank_one_ramp(8, 9), oracle::hide_fraction(8, 9, 0.4, 2));
    prob.params.beta = 0.7;
    const SmcSolution sol = smc_solve(prob, true);
    ASSERT_EQ(static_cast<int>(sol.trace.size()), sol.iterations);
    for (const auto &it : sol.trace)
        EXPECT_NEAR(it.dual_step, 0.7 * it.gap, 1e-12 * std::max(1.0, it.gap));
    EXPECT_LE(sol.trace.back().gap, sol.trace.front().gap);
}

TEST(SmcSolve, IterationCapReportsBestIterate)
{
    SmcProblem prob = make_problem(oracle::rank_one_ramp(8, 8), oracle::hide_fraction(8, 8, 0.5, 1));
    prob.params.max_iter = 3;
    prob.params.epsilon = 1e-14;
    const SmcSolution sol = smc_solve(prob, true);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.iterations, 3);
    double best = sol.trace.front().gap;
    for (const auto &it : sol.trace)
        best = std::min(best, it.gap);
    EXPECT_EQ(sol.final_gap, best);
}

TEST(SmcSolve, Deterministic)
{
    const SmcProblem prob = make_problem(oracle::rank_one_ramp(7, 5), oracle::hide_fraction(7, 5, 0.5, 5));
    EXPECT_EQ(smc_solve(prob).completed, smc_solve(prob).completed);
}

// Without the smoothness term nothing depends on row order.
TEST(SmcSolve, GammaZeroIsPermutationCovariant)
{
    std::mt19937_64 rng(14);
    SmcProblem prob;
    prob.values = oracle::gaussian_matrix(6, 1, rng) * oracle::gaussian_matrix(1, 5, rng) +
                  0.1 * oracle::gaussian_matrix(6, 5, rng);
    prob.observed = oracle::hide_fraction(6, 5, 0.4, 6);
    prob.params.gamma = 0.0;
    prob.params.max_iter = 200;

    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.indices() << 3, 0, 5, 1, 4, 2;
    SmcProblem permuted = prob;
    permuted.values = perm * prob.values;
    for (Eigen::Index c = 0; c < 5; ++c)
        for (Eigen::Index r = 0; r < 6; ++r)
            permuted.observed(perm.indices()[r], c) = prob.observed(r, c);

    const SmcSolution a = smc_solve(prob);
    const SmcSolution b = smc_solve(permuted);
    EXPECT_NEAR((perm * a.completed - b.completed).norm(), 0.0, 1e-8);
}

TEST(SmcSolve, GammaZeroFillsLowRank)
{
    const Eigen::MatrixXd truth = oracle::rank_one_ramp(12, 12);
    SmcProblem prob = make_problem(truth, oracle::hide_fraction(12, 12, 0.2, 4));
    prob.params.gamma = 0.0;
    prob.params.max_iter = 2000;
    const SmcSolution sol = smc_solve(prob);
    EXPECT_LT(oracle::hidden_relative_error(sol.completed, truth, prob.observed), 0.1);
}

TEST(SmcProblem, Validation)
{
    EXPECT_THROW(smc_solve(make_problem(Eigen::MatrixXd::Zero(2, 2), BoolMatrix::Constant(2, 2, false))),
                 std::invalid_argument);
    EXPECT_THROW(smc_solve(make_problem(Eigen::MatrixXd::Zero(2, 2), BoolMatrix::Constant(2, 3, true))),
                 std::invalid_argument);
    SmcParams bad;
    bad.lambda = 0.0;
    EXPECT_THROW(smc_solve(make_problem(Eigen::MatrixXd::Zero(2, 2), BoolMatrix::Constant(2, 2, true), bad)),
                 std::invalid_argument);
}

TEST(SmcTrace, WritesHeaderAndRows)
{
    SmcProblem prob = make_problem(oracle::rank_one_ramp(5, 5), oracle::hide_fraction(5, 5, 0.4, 1));
    const SmcSolution sol = smc_solve(prob, true);
    const auto path = std::filesystem::temp_directory_path() / "beamrec_trace.csv";
    save_trace(path.string(), sol.trace);
    std::ifstream is(path);
    std::string line;
    int rows = -1;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, sol.iterations);
    std::filesystem::remove(path);
}
