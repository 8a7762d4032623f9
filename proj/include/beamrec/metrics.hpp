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

#ifndef BEAMREC_METRICS_HPP
#define BEAMREC_METRICS_HPP

#include "array.hpp"
#include "scene.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace beamrec
{

struct LinkBudget
{
    double bandwidth_hz = 1.76e9;
    double carrier_hz = 58.68e9;
    double noise_psd_dbm_hz = -174.0;
    double antenna_efficiency = 1.0;
    double distance_m = 1.0;

    double wavelength() const { return speed_of_light / carrier_hz; }

    void validate() const
    {
        if (!(bandwidth_hz > 0.0) || !(carrier_hz > 0.0) || !(distance_m > 0.0))
            throw std::invalid_argument("LinkBudget: bandwidth, carrier and distance must be positive.");
        if (!(antenna_efficiency > 0.0) || antenna_efficiency > 1.0)
            throw std::invalid_argument("LinkBudget: antenna efficiency must lie in (0, 1].");
    }
};

struct FrameTiming
{
    double microslot_s = 10e-6;
    double frame_s = 5e-3;
};

// eta = Lambda^2 zeta / (8 pi d^2 N_0 B), with N_0 converted from dBm/Hz to W/Hz.
inline double snr_scale(const LinkBudget &budget)
{
    budget.validate();
    const double n0_w_hz = std::pow(10.0, (budget.noise_psd_dbm_hz - 30.0) / 10.0);
    const double lambda = budget.wavelength();
    return lambda * lambda * budget.antenna_efficiency /
           (8.0 * std::numbers::pi * budget.distance_m * budget.distance_m * n0_w_hz * budget.bandwidth_hz);
}

// Fraction of the frame left after training n_tr beams.
inline double comm_fraction(const FrameTiming &timing, int n_tr)
{
    if (!(timing.microslot_s > 0.0) || !(timing.frame_s > 0.0))
        throw std::invalid_argument("FrameTiming: durations must be positive.");
    if (n_tr < 0)
        throw std::invalid_argument("comm_fraction: n_tr must be non-negative.");
    const double t_train = n_tr * timing.microslot_s;
    if (t_train > timing.frame_s)
        throw std::invalid_argument("comm_fraction: training time exceeds the frame.");
    return (timing.frame_s - t_train) / timing.frame_s;
}

struct LinkRate
{
    double rate_bps = 0.0;       // R
    double throughput_bps = 0.0; // R * f_comm
    double f_comm = 0.0;
};

/// R = B log2(1 + eta P_t |w^H h|^2), reduced by the training overhead of n_tr microslots.
inline LinkRate spectral_efficiency(const LinkBudget &budget, const FrameTiming &timing, double p_t,
                                    const CVector &w, const CVector &h, int n_tr)
{
    if (w.size() != h.size())
        throw std::invalid_argument("spectral_efficiency: beamformer and channel dimensions differ.");
    if (!(p_t >= 0.0))
        throw std::invalid_argument("spectral_efficiency: transmit power must be non-negative.");
    LinkRate out;
    out.f_comm = comm_fraction(timing, n_tr);
    out.rate_bps = budget.bandwidth_hz * std::log2(1.0 + snr_scale(budget) * p_t * std::norm(w.dot(h)));
    out.throughput_bps = out.rate_bps * out.f_comm;
    return out;
}

// Flat index of the strongest beam; ties to the smaller index.
inline int best_beam(const Eigen::VectorXd &powers)
{
    if (powers.size() == 0)
        throw std::invalid_argument("best_beam: empty power vector.");
    int best = 0;
    for (int b = 1; b < powers.size(); ++b)
        if (powers[b] > powers[best])
            best = b;
    return best;
}

/// P_pl = 1 - P_s, where P_s is the fraction of evaluation points whose recommended beams
/// (flat indices) include one reaching the true maximum power. Entry k of both spans
/// describes point k.
inline double power_loss_probability(std::span<const Eigen::VectorXd> truth,
                                     std::span<const std::vector<int>> recommended)
{
    if (truth.empty())
        throw std::domain_error("power_loss_probability: the evaluation set is empty.");
    if (truth.size() != recommended.size())
        throw std::invalid_argument("power_loss_probability: truth and recommendation counts differ.");
    std::size_t hits = 0;
    for (std::size_t k = 0; k < truth.size(); ++k)
    {
        // Identical codewords (every phi at theta = 0) give bitwise-equal powers; any of them counts.
        const double best = truth[k][best_beam(truth[k])];
        for (int b : recommended[k])
            if (truth[k][b] == best)
            {
                ++hits;
                break;
            }
    }
    return 1.0 - static_cast<double>(hits) / static_cast<double>(truth.size());
}

} // namespace beamrec

#endif
