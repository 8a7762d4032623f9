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

#ifndef BEAMREC_SMC_HPP
#define BEAMREC_SMC_HPP

#include "detail/text.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamrec
{

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct SmcParams
{
    double gamma = 1.0;   // smoothness weight
    double lambda = 1.0;  // coupling weight; the SVT threshold is 1 / lambda
    double beta = 1.0;    // multiplier step
    double epsilon = 1e-4;
    int max_iter = 500;

    void validate() const
    {
        if (!(gamma >= 0.0) || !(lambda > 0.0) || !(beta > 0.0) || !(epsilon > 0.0) || max_iter < 1)
            throw std::invalid_argument("SmcParams: require gamma >= 0, lambda > 0, beta > 0, epsilon > 0, max_iter >= 1.");
    }
};

/// Incomplete matrix M with observed set Omega. Entries of `values` outside the mask
/// are ignored.
struct SmcProblem
{
    Eigen::MatrixXd values;
    BoolMatrix observed;
    SmcParams params;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    Eigen::Index observed_count() const { return observed.count(); }
    Eigen::Index unknown_count() const { return values.size() - observed.count(); }

    void validate() const
    {
        params.validate();
        if (values.rows() < 1 || values.cols() < 1)
            throw std::invalid_argument("SmcProblem: empty matrix.");
        if (observed.rows() != values.rows() || observed.cols() != values.cols())
            throw std::invalid_argument("SmcProblem: mask shape differs from the value shape.");
        if (observed.count() == 0)
            throw std::invalid_argument("SmcProblem: the observed set is empty.");
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            for (Eigen::Index r = 0; r < values.rows(); ++r)
                if (observed(r, c) && !std::isfinite(values(r, c)))
                    throw std::invalid_argument("SmcProblem: observed values must be finite.");
    }

    // M with zeros off the observed set.
    Eigen::MatrixXd zero_filled() const { return observed.select(values, 0.0).matrix(); }
};

struct SmcIterate
{
    int t = 0;
    double gap = 0.0;          // ||X_t - Y_t||_F
    double dual_step = 0.0;    // ||Z_t - Z_{t-1}||_F
    double nuclear_norm = 0.0; // ||X_t||_*
    double smoothness = 0.0;   // ||D_m X_t||_F^2 + ||X_t D_n^T||_F^2
};

struct SmcSolution
{
    Eigen::MatrixXd completed;
    int iterations = 0;
    double final_gap = 0.0;
    bool converged = false;
    std::vector<SmcIterate> trace; // filled when requested
};

/// First-difference operator D_m, (m-1) x m, rows (.., 1, -1, ..).
class DifferenceOperator
{
public:
    explicit DifferenceOperator(Eigen::Index m) : m_size(m)
    {
        if (m < 1)
            throw std::invalid_argument("DifferenceOperator: size must be positive.");
    }

    Eigen::Index size() const { return m_size; }

    Eigen::MatrixXd matrix() const
    {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m_size - 1, m_size);
        for (Eigen::Index r = 0; r + 1 < m_size; ++r)
        {
            d(r, r) = 1.0;
            d(r, r + 1) = -1.0;
        }
        return d;
    }

    // Entry (p, q) of D^T D: the path-graph Laplacian.
    double gram(Eigen::Index p, Eigen::Index q) const
    {
        if (m_size == 1)
            return 0.0;
        if (p == q)
            return (p == 0 || p == m_size - 1) ? 1.0 : 2.0;
        return std::abs(p - q) == 1 ? -1.0 : 0.0;
    }

private:
    Eigen::Index m_size;
};

// ||D_m X||_F^2 + ||X D_n^T||_F^2 without forming D.
inline double smoothness_penalty(const Eigen::MatrixXd &x)
{
    double s = 0.0;
    if (x.rows() > 1)
        s += (x.topRows(x.rows() - 1) - x.bottomRows(x.rows() - 1)).squaredNorm();
    if (x.cols() > 1)
        s += (x.leftCols(x.cols() - 1) - x.rightCols(x.cols() - 1)).squaredNorm();
    return s;
}

struct SvtResult
{
    Eigen::MatrixXd value;
    double nuclear_norm = 0.0; // of the thresholded matrix
};

inline SvtResult svt_with_norm(const Eigen::MatrixXd &a, double tau)
{
    if (!(tau >= 0.0))
        throw std::invalid_argument("svt: threshold must be non-negative.");
    if (a.size() == 0 || a.isZero(0.0))
        return {Eigen::MatrixXd::Zero(a.rows(), a.cols()), 0.0};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
    return {svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose(), shrunk.sum()};
}

/// Singular value thresholding D_tau(A) = U diag(max(sigma - tau, 0)) V^T, the proximal
/// operator of tau * ||.||_*.
inline Eigen::MatrixXd svt(const Eigen::MatrixXd &a, double tau) { return svt_with_norm(a, tau).value; }

/// Linear system for the unobserved entries of Y in the constrained Y-update.
///
/// Setting the gradient of
///   gamma (||D_m Y||^2 + ||Y D_n^T||^2) + tr(Z^T (Y - X)) + lambda/2 ||Y - X||^2
/// to zero at an unknown (i, j) and dividing by 2 gamma gives
///   (G_m Y + Y G_n)_ij + kappa Y_ij = (lambda X_ij - Z_ij) / (2 gamma),
/// with G = D^T D and kappa = lambda / (2 gamma). Observed neighbours move to the
/// right-hand side. A is symmetric positive definite and depends only on the mask and
/// kappa, so it is factored once per solve.
class YSystem
{
public:
    explicit YSystem(const SmcProblem &problem)
    {
        problem.validate();
        const SmcParams &p = problem.params;
        if (p.gamma == 0.0)
            throw std::invalid_argument(
                "build_y_system: gamma = 0 makes lambda / (2 gamma) undefined; use the nuclear-norm-only path.");
        m_rows = problem.rows();
        m_cols = problem.cols();
        m_inv_two_gamma = 1.0 / (2.0 * p.gamma);
        m_lambda = p.lambda;
        const double kappa = p.lambda * m_inv_two_gamma;

        m_index = Eigen::MatrixXi::Constant(m_rows, m_cols, -1);
        for (Eigen::Index c = 0; c < m_cols; ++c)
            for (Eigen::Index r = 0; r < m_rows; ++r)
                if (!problem.observed(r, c))
                {
                    m_index(r, c) = static_cast<int>(m_unknowns.size());
                    m_unknowns.emplace_back(r, c);
                }

        const auto n_unknown = static_cast<Eigen::Index>(m_unknowns.size());
        m_observed_rhs = Eigen::VectorXd::Zero(n_unknown);
        if (n_unknown == 0)
            return;

        const DifferenceOperator dm(m_rows);
        const DifferenceOperator dn(m_cols);
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(static_cast<std::size_t>(5 * n_unknown));
        for (Eigen::Index u = 0; u < n_unknown; ++u)
        {
            const auto [i, j] = m_unknowns[static_cast<std::size_t>(u)];
            // U^{(i,j)}_{pq} = G_m(p, i) [q = j] + G_n(j, q) [p = i] + kappa [p = i, q = j]
            auto couple = [&](Eigen::Index p, Eigen::Index q, double coeff) {
                if (coeff == 0.0)
                    return;
                const int k = m_index(p, q);
                if (k >= 0)
                    triplets.emplace_back(static_cast<int>(u), k, coeff);
                else
                    m_observed_rhs[u] -= coeff * problem.values(p, q);
            };
            couple(i, j, dm.gram(i, i) + dn.gram(j, j) + kappa);
            if (i > 0)
                couple(i - 1, j, dm.gram(i - 1, i));
            if (i + 1 < m_rows)
                couple(i + 1, j, dm.gram(i + 1, i));
            if (j > 0)
                couple(i, j - 1, dn.gram(j, j - 1));
            if (j + 1 < m_cols)
                couple(i, j + 1, dn.gram(j, j + 1));
        }
        m_matrix.resize(n_unknown, n_unknown);
        m_matrix.setFromTriplets(triplets.begin(), triplets.end());
        m_matrix.makeCompressed();

        if (n_unknown < dense_threshold)
        {
            m_dense.emplace(Eigen::MatrixXd(m_matrix));
            if (m_dense->info() != Eigen::Success)
                throw std::runtime_error("build_y_system: dense factorization failed.");
        }
        else
        {
            m_sparse.emplace(m_matrix);
            if (m_sparse->info() != Eigen::Success)
                throw std::runtime_error("build_y_system: sparse factorization failed.");
        }
    }

    static constexpr Eigen::Index dense_threshold = 64;

    const Eigen::SparseMatrix<double> &matrix() const { return m_matrix; }
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> &unknowns() const { return m_unknowns; }
    const Eigen::MatrixXi &index_map() const { return m_index; }
    // -sum_{(p,q) in Omega} U^{(i,j)}_{pq} M_pq per unknown.
    const Eigen::VectorXd &observed_rhs() const { return m_observed_rhs; }
    bool uses_sparse_factorization() const { return m_sparse.has_value(); }

    Eigen::VectorXd rhs(const Eigen::MatrixXd &x, const Eigen::MatrixXd &z) const
    {
        Eigen::VectorXd b = m_observed_rhs;
        for (std::size_t u = 0; u < m_unknowns.size(); ++u)
        {
            const auto [i, j] = m_unknowns[u];
            b[static_cast<Eigen::Index>(u)] += (m_lambda * x(i, j) - z(i, j)) * m_inv_two_gamma;
        }
        return b;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd &b) const
    {
        if (m_unknowns.empty())
            return {};
        return m_dense ? Eigen::VectorXd(m_dense->solve(b)) : Eigen::VectorXd(m_sparse->solve(b));
    }

private:
    Eigen::Index m_rows = 0;
    Eigen::Index m_cols = 0;
    double m_inv_two_gamma = 0.0;
    double m_lambda = 0.0;
    Eigen::MatrixXi m_index;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> m_unknowns;
    Eigen::VectorXd m_observed_rhs;
    Eigen::SparseMatrix<double> m_matrix;
    std::optional<Eigen::LDLT<Eigen::MatrixXd>> m_dense;
    std::optional<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> m_sparse;
};

inline YSystem build_y_system(const SmcProblem &problem) { return YSystem(problem); }

/// Y-update: Y_Omega = M_Omega, Y on the unknowns from the prefactored system.
inline Eigen::MatrixXd solve_y(const YSystem &system, const SmcProblem &problem, const Eigen::MatrixXd &x,
                               const Eigen::MatrixXd &z)
{
    Eigen::MatrixXd y = problem.zero_filled();
    const Eigen::VectorXd sol = system.solve(system.rhs(x, z));
    const auto &unknowns = system.unknowns();
    for (std::size_t u = 0; u < unknowns.size(); ++u)
        y(unknowns[u].first, unknowns[u].second) = sol[static_cast<Eigen::Index>(u)];
    return y;
}

// Y-update without the smoothness term: the unconstrained minimizer X - Z / lambda.
inline Eigen::MatrixXd solve_y_low_rank(const SmcProblem &problem, const Eigen::MatrixXd &x, const Eigen::MatrixXd &z)
{
    const Eigen::MatrixXd free = x - z / problem.params.lambda;
    return problem.observed.select(problem.values, free).matrix();
}

/// Smooth matrix completion by ADMM:
///   X <- D_{1/lambda}(Y + Z / lambda), Y <- constrained quadratic step, Z <- Z + beta (Y - X),
/// stopping once ||X - Y||_F <= epsilon. The result is X off the observed set and M on it.
/// When the cap is reached the iterate with the smallest gap is returned, flagged unconverged.
inline SmcSolution smc_solve(const SmcProblem &problem, bool keep_trace = false)
{
    problem.validate();
    const SmcParams &p = problem.params;

    SmcSolution out;
    if (problem.unknown_count() == 0)
    {
        out.completed = problem.values;
        out.converged = true;
        return out;
    }

    std::optional<YSystem> system;
    if (p.gamma > 0.0)
        system.emplace(problem);

    Eigen::MatrixXd x = problem.zero_filled();
    Eigen::MatrixXd y = x;
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::MatrixXd best_x = x;
    double best_gap = std::numeric_limits<double>::infinity();

    for (int t = 1; t <= p.max_iter; ++t)
    {
        auto svt_step = svt_with_norm(y + z / p.lambda, 1.0 / p.lambda);
        x = std::move(svt_step.value);
        y = system ? solve_y(*system, problem, x, z) : solve_y_low_rank(problem, x, z);
        const Eigen::MatrixXd residual = y - x;
        const Eigen::MatrixXd z_prev = keep_trace ? z : Eigen::MatrixXd();
        z += p.beta * residual;
        const double gap = residual.norm();

        out.iterations = t;
        if (keep_trace)
            out.trace.push_back({t, gap, (z - z_prev).norm(), svt_step.nuclear_norm, smoothness_penalty(x)});
        if (gap < best_gap)
        {
            best_gap = gap;
            best_x = x;
        }
        if (gap <= p.epsilon)
        {
            out.converged = true;
            break;
        }
    }

    out.final_gap = best_gap;
    out.completed = problem.observed.select(problem.values, best_x).matrix();
    return out;
}

inline void save_trace(const std::string &path, const std::vector<SmcIterate> &trace)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_trace: cannot open " + path);
    os << "t,gap,dual_step,nuclear_norm,smoothness\n";
    for (const auto &it : trace)
        os << it.t << ',' << detail::to_text(it.gap) << ',' << detail::to_text(it.dual_step) << ','
           << detail::to_text(it.nuclear_norm) << ',' << detail::to_text(it.smoothness) << '\n';
}

} // namespace beamrec

#endif
