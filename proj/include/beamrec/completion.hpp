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

#ifndef BEAMREC_COMPLETION_HPP
#define BEAMREC_COMPLETION_HPP

#include "database.hpp"
#include "detail/parallel.hpp"
#include "smc.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace beamrec
{

struct CompletionConfig
{
    SmcParams stage1;   // beam planes at observed positions
    SmcParams stage2;   // position planes per beam
    unsigned workers = 1;
    bool positions_first = false; // ablation only: swaps the stage order
    double reference = 0.0;       // subtracted before completion, added back after
};

enum class SliceKind
{
    beam_plane,
    position_plane
};

struct SliceDiagnostic
{
    SliceKind kind = SliceKind::beam_plane;
    int a = 0; // p_x or i, 1-based
    int b = 0; // p_y or j, 1-based
    int unknowns = 0;
    int iterations = 0;
    double final_gap = 0.0;
    bool converged = true;
    bool skipped = false; // no observation in the slice
};

struct StageResult
{
    PowerTensor tensor; // values completed on the processed slices, mask promoted
    std::vector<SliceDiagnostic> diagnostics;
};

struct CompletedTensor
{
    PowerTensor values;                    // fully populated; mask is the original observed set
    std::vector<std::uint8_t> stage1_mask; // mask after the first stage
    std::vector<SliceDiagnostic> diagnostics;

    std::size_t unconverged() const
    {
        std::size_t n = 0;
        for (const auto &d : diagnostics)
            n += (!d.skipped && !d.converged) ? 1 : 0;
        return n;
    }
};

namespace detail
{

inline SliceDiagnostic diagnose(SliceKind kind, int a, int b, const SmcProblem &problem, const SmcSolution &sol)
{
    return {kind, a, b, static_cast<int>(problem.unknown_count()), sol.iterations, sol.final_gap, sol.converged, false};
}

} // namespace detail

/// Completes the beam plane of every position that has at least one observation and
/// marks the whole plane observed. Positions without observations are left untouched.
inline StageResult complete_beam_planes(const PowerTensor &tensor, const SmcParams &params, unsigned workers)
{
    std::vector<std::pair<int, int>> positions;
    for (int px = 0; px < tensor.l_x(); ++px)
        for (int py = 0; py < tensor.l_y(); ++py)
            if (tensor.position_observed(px, py))
                positions.emplace_back(px, py);
    if (positions.empty())
        throw std::invalid_argument("complete_beam_planes: the tensor has no observations.");

    StageResult out{tensor, std::vector<SliceDiagnostic>(positions.size())};
    std::vector<Eigen::MatrixXd> planes(positions.size());
    detail::parallel_for(positions.size(), workers, [&](std::size_t k) {
        const auto [px, py] = positions[k];
        SmcProblem problem;
        problem.values = tensor.beam_plane(px, py);
        problem.observed.resize(tensor.c_theta(), tensor.c_phi());
        for (int i = 0; i < tensor.c_theta(); ++i)
            for (int j = 0; j < tensor.c_phi(); ++j)
                problem.observed(i, j) = tensor.observed(px, py, i, j);
        problem.params = params;
        const SmcSolution sol = smc_solve(problem);
        planes[k] = sol.completed;
        out.diagnostics[k] = detail::diagnose(SliceKind::beam_plane, px + 1, py + 1, problem, sol);
    });
    for (std::size_t k = 0; k < positions.size(); ++k)
    {
        const auto [px, py] = positions[k];
        for (int i = 0; i < tensor.c_theta(); ++i)
            for (int j = 0; j < tensor.c_phi(); ++j)
            {
                out.tensor.set_value(px, py, i, j, planes[k](i, j));
                out.tensor.set_observed(px, py, i, j, true);
            }
    }
    return out;
}

/// Completes the position plane of every beam that has at least one observation and
/// marks it observed. Beams without observations are reported as skipped.
inline StageResult complete_position_planes(const PowerTensor &tensor, const SmcParams &params, unsigned workers)
{
    const auto beams = static_cast<std::size_t>(tensor.beams());
    StageResult out{tensor, std::vector<SliceDiagnostic>(beams)};
    std::vector<Eigen::MatrixXd> planes(beams);
    detail::parallel_for(beams, workers, [&](std::size_t k) {
        const int i = static_cast<int>(k) / tensor.c_phi();
        const int j = static_cast<int>(k) % tensor.c_phi();
        SmcProblem problem;
        problem.values = tensor.position_plane(i, j);
        problem.observed.resize(tensor.l_x(), tensor.l_y());
        for (int px = 0; px < tensor.l_x(); ++px)
            for (int py = 0; py < tensor.l_y(); ++py)
                problem.observed(px, py) = tensor.observed(px, py, i, j);
        if (problem.observed.count() == 0)
        {
            out.diagnostics[k] = {SliceKind::position_plane, i + 1, j + 1, 0, 0, 0.0, false, true};
            return;
        }
        problem.params = params;
        const SmcSolution sol = smc_solve(problem);
        planes[k] = sol.completed;
        out.diagnostics[k] = detail::diagnose(SliceKind::position_plane, i + 1, j + 1, problem, sol);
    });
    bool any = false;
    for (std::size_t k = 0; k < beams; ++k)
    {
        if (out.diagnostics[k].skipped)
            continue;
        any = true;
        const int i = static_cast<int>(k) / tensor.c_phi();
        const int j = static_cast<int>(k) % tensor.c_phi();
        for (int px = 0; px < tensor.l_x(); ++px)
            for (int py = 0; py < tensor.l_y(); ++py)
            {
                out.tensor.set_value(px, py, i, j, planes[k](px, py));
                out.tensor.set_observed(px, py, i, j, true);
            }
    }
    if (!any)
        throw std::invalid_argument("complete_position_planes: the tensor has no observations.");
    return out;
}

// First stage: SMC over the beam plane of each observed position.
inline StageResult stage1(const PowerTensor &tensor, const CompletionConfig &cfg)
{
    return complete_beam_planes(tensor, cfg.stage1, cfg.workers);
}

// Second stage: SMC over the position plane of each beam, on the promoted mask.
inline StageResult stage2(const PowerTensor &t_prime, const CompletionConfig &cfg)
{
    return complete_position_planes(t_prime, cfg.stage2, cfg.workers);
}

/// Two-stage tensor completion. Slices are completed relative to `cfg.reference`, the value
/// the nuclear-norm shrinkage pulls unobserved cells toward; in dB the natural choice is the
/// power floor. Observed cells of the input are carried over bit-exactly.
inline CompletedTensor complete(const PowerTensor &tensor, const CompletionConfig &cfg)
{
    PowerTensor shifted = tensor;
    if (cfg.reference != 0.0)
        for (int px = 0; px < tensor.l_x(); ++px)
            for (int py = 0; py < tensor.l_y(); ++py)
                for (int i = 0; i < tensor.c_theta(); ++i)
                    for (int j = 0; j < tensor.c_phi(); ++j)
                        if (tensor.observed(px, py, i, j))
                            shifted.set_value(px, py, i, j, tensor.value(px, py, i, j) - cfg.reference);

    StageResult first = cfg.positions_first ? complete_position_planes(shifted, cfg.stage2, cfg.workers)
                                            : stage1(shifted, cfg);
    StageResult second = cfg.positions_first ? complete_beam_planes(first.tensor, cfg.stage1, cfg.workers)
                                             : stage2(first.tensor, cfg);

    CompletedTensor out;
    out.stage1_mask = first.tensor.mask();
    out.diagnostics = std::move(first.diagnostics);
    out.diagnostics.insert(out.diagnostics.end(), second.diagnostics.begin(), second.diagnostics.end());

    out.values = PowerTensor(tensor.l_x(), tensor.l_y(), tensor.c_theta(), tensor.c_phi(), tensor.domain());
    for (int px = 0; px < tensor.l_x(); ++px)
        for (int py = 0; py < tensor.l_y(); ++py)
            for (int i = 0; i < tensor.c_theta(); ++i)
                for (int j = 0; j < tensor.c_phi(); ++j)
                {
                    const bool observed = tensor.observed(px, py, i, j);
                    out.values.set_value(px, py, i, j,
                                         observed ? tensor.value(px, py, i, j)
                                                  : second.tensor.value(px, py, i, j) + cfg.reference);
                    out.values.set_observed(px, py, i, j, observed);
                }
    return out;
}

} // namespace beamrec

#endif
